#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "carpenter/errors.hpp"
#include "carpenter/moves.hpp"
#include "oracles.hpp"

using namespace carpenter;

TEST_CASE("ops_shift: examples") {
  const auto t = ops_shift({{0.1, 0.2, 0.6}, {0, 1}, {2}, 0.2});
  CHECK(t[0] == doctest::Approx(0.0));
  CHECK(t[1] == doctest::Approx(0.1));
  CHECK(t[2] == doctest::Approx(0.8));

  const std::vector<double> d{0.1, 0.2, 0.6};
  CHECK(ops_shift({d, {0, 1}, {2}, 0.0}) == d);

  const auto e = ops_shift({{0.5, 0.5}, {0}, {1}, 0.5});
  CHECK(e[0] == 0.0);
  CHECK(e[1] == 1.0);
}

TEST_CASE("ops_shift rejects transfers beyond the available mass") {
  CHECK_THROWS_AS(ops_shift({{0.1, 0.2, 0.6}, {0, 1}, {2}, 0.35}), InvalidInput);
  CHECK_THROWS_AS(ops_shift({{0.1, 0.2, 0.6}, {0, 1}, {2}, -0.1}), InvalidInput);
  CHECK_THROWS_AS(ops_shift({{0.1, 0.2, 0.6}, {0}, {0}, 0.05}), InvalidInput);
}

TEST_CASE("rotation_angle_for: examples") {
  const auto e = SymmetricMatrix::diagonal(std::vector<double>{0.0, 1.0});
  const auto r = rotate_to_diagonal(e, 0, 1, 0.5);
  CHECK(std::abs(r.angle) == doctest::Approx(std::numbers::pi / 4));
  CHECK(r.matrix(0, 0) == doctest::Approx(0.5));
  CHECK(r.matrix(1, 1) == doctest::Approx(0.5));

  const auto same = rotate_to_diagonal(e, 0, 1, 0.0);
  CHECK(same.angle == 0.0);
  CHECK(same.matrix == e);

  SymmetricMatrix half(2);
  half.set(0, 0, 0.5);
  half.set(1, 1, 0.5);
  half.set(0, 1, 0.5);
  const auto d = rotate_to_diagonal(half, 0, 1, 1.0);
  CHECK(std::abs(d.angle) == doctest::Approx(std::numbers::pi / 4));
  CHECK(d.matrix(0, 0) == doctest::Approx(1.0));
  CHECK(d.matrix(1, 1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(d.matrix(0, 1)) < 1e-12);
}

TEST_CASE("rotation target outside the attainable interval") {
  const auto e = SymmetricMatrix::diagonal(std::vector<double>{0.2, 0.6});
  const auto iv = attainable_interval(e, 0, 1);
  CHECK(iv.lo == doctest::Approx(0.2));
  CHECK(iv.hi == doctest::Approx(0.6));
  CHECK_THROWS_AS(rotation_angle_for(e, 0, 1, 0.7), InvalidInput);
}

TEST_CASE("rotation hits random targets") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0), w(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    SymmetricMatrix e(3);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i; j < 3; ++j) e.set(i, j, u(rng));
    const auto iv = attainable_interval(e, 0, 2);
    const double target = iv.lo + w(rng) * (iv.hi - iv.lo);
    const auto r = rotate_to_diagonal(e, 0, 2, target);
    CHECK(r.matrix(0, 0) == doctest::Approx(target).epsilon(1e-12));
    CHECK(oracle::spectrum_error(oracle::spectrum(r.matrix), oracle::spectrum(e)) < 1e-12);
  }
}

TEST_CASE("ops_restore: worked example") {
  const std::vector<double> d{0.1, 0.2, 0.6};
  const auto dt = ops_shift({d, {0, 1}, {2}, 0.2});
  const auto e = SymmetricMatrix::diagonal(dt);
  const std::size_t low[] = {0, 1};
  const std::size_t high[] = {2};
  const auto r = ops_restore(e, dt, d, low, high);
  CHECK(oracle::diagonal_error(r.matrix, d) < 1e-12);
  REQUIRE(r.plan.size() == 2);
  CHECK(r.plan.moves[0].i == 0);
  CHECK(r.plan.moves[0].j == 2);
  CHECK(r.plan.moves[1].i == 1);
  CHECK(r.plan.moves[1].j == 2);
  CHECK(oracle::spectrum_error(oracle::spectrum(r.matrix), oracle::spectrum(e)) < 1e-12);
  CHECK(max_abs_difference(replay(e, r.plan), r.matrix) < 1e-15);
}

TEST_CASE("ops_restore: nothing to restore") {
  const std::vector<double> d{0.1, 0.2, 0.6};
  const auto e = SymmetricMatrix::diagonal(d);
  const std::size_t low[] = {0, 1};
  const std::size_t high[] = {2};
  const auto r = ops_restore(e, d, d, low, high);
  CHECK(r.plan.empty());
  CHECK(r.matrix == e);
}

TEST_CASE("ops_restore: single pair gives a rank-one projection") {
  const auto e = SymmetricMatrix::diagonal(std::vector<double>{0.0, 1.0});
  const std::vector<double> dt{0.0, 1.0}, d{0.3, 0.7};
  const std::size_t low[] = {0};
  const std::size_t high[] = {1};
  const auto r = ops_restore(e, dt, d, low, high);
  CHECK(r.plan.size() == 1);
  CHECK(r.matrix(0, 0) == doctest::Approx(0.3));
  CHECK(r.matrix(1, 1) == doctest::Approx(0.7));
  CHECK(std::abs(r.matrix(0, 1)) == doctest::Approx(std::sqrt(0.21)));
  CHECK(oracle::idempotence(r.matrix) < 1e-12);
}

TEST_CASE("move plan JSON lines round trip") {
  MovePlan plan;
  plan.moves.push_back({0, 3, MoveKind::ConvexMix, 0.25});
  plan.moves.push_back({2, 1, MoveKind::GeneralRotation, -0.123456789012345678});
  std::stringstream ss;
  write_plan_jsonl(ss, plan);
  const auto back = read_plan_jsonl(ss);
  REQUIRE(back.size() == 2);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(back.moves[k].i == plan.moves[k].i);
    CHECK(back.moves[k].j == plan.moves[k].j);
    CHECK(back.moves[k].kind == plan.moves[k].kind);
    CHECK(back.moves[k].parameter == plan.moves[k].parameter);
  }
}

TEST_CASE("replay applies moves in order") {
  auto e = SymmetricMatrix::diagonal(std::vector<double>{1.0, 0.0, 0.0});
  MovePlan plan;
  plan.moves.push_back({0, 1, MoveKind::ConvexMix, 0.5});
  plan.moves.push_back({1, 2, MoveKind::GeneralRotation, 0.3});
  auto manual = e;
  apply_move(manual, plan.moves[0]);
  apply_move(manual, plan.moves[1]);
  CHECK(replay(e, plan) == manual);
  CHECK(oracle::spectrum_error(oracle::spectrum(manual), {1, 0, 0}) < 1e-12);
}
