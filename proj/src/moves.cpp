#include "carpenter/moves.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "carpenter/errors.hpp"

namespace carpenter {

namespace {

constexpr double kInputTolerance = 1e-10;
// Residual deficits below this are rounding noise, not pending transfers.
constexpr double kNegligible = 1e-15;

std::vector<std::size_t> sorted_unique(std::span<const std::size_t> idx, std::size_t n,
                                       const char* name) {
  std::vector<std::size_t> out(idx.begin(), idx.end());
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw InvalidInput(std::string(name) + " contains a repeated index");
  }
  if (!out.empty() && out.back() >= n) {
    throw InvalidInput(std::string(name) + " index " + std::to_string(out.back()) +
                       " out of range");
  }
  return out;
}

double normalize_half_turn(double theta) {
  constexpr double kPi = std::numbers::pi;
  while (theta > kPi / 2) theta -= kPi;
  while (theta <= -kPi / 2) theta += kPi;
  return theta;
}

}  // namespace

void MovePlan::append(const MovePlan& other) {
  moves.insert(moves.end(), other.moves.begin(), other.moves.end());
}

void apply_move(SymmetricMatrix& e, const Move& move) {
  if (move.kind == MoveKind::ConvexMix) {
    const double alpha = move.parameter;
    e.rotate(move.i, move.j, std::sqrt(alpha), -std::sqrt(1.0 - alpha));
  } else {
    e.rotate(move.i, move.j, std::cos(move.parameter), std::sin(move.parameter));
  }
}

SymmetricMatrix replay(const SymmetricMatrix& start, const MovePlan& plan) {
  SymmetricMatrix e = start;
  for (const Move& m : plan.moves) apply_move(e, m);
  return e;
}

void write_plan_jsonl(std::ostream& os, const MovePlan& plan) {
  for (const Move& m : plan.moves) {
    nlohmann::json j = {{"i", m.i},
                        {"j", m.j},
                        {"kind", m.kind == MoveKind::ConvexMix ? "convex_mix" : "general_rotation"},
                        {"parameter", m.parameter}};
    os << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict) << '\n';
  }
}

MovePlan read_plan_jsonl(std::istream& is) {
  MovePlan plan;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Move m;
      m.i = j.at("i").get<std::size_t>();
      m.j = j.at("j").get<std::size_t>();
      const auto kind = j.at("kind").get<std::string>();
      if (kind == "convex_mix") {
        m.kind = MoveKind::ConvexMix;
      } else if (kind == "general_rotation") {
        m.kind = MoveKind::GeneralRotation;
      } else {
        throw InvalidInput("unknown move kind '" + kind + "'");
      }
      m.parameter = j.at("parameter").get<double>();
      plan.moves.push_back(m);
    } catch (const nlohmann::json::exception& ex) {
      throw InvalidInput("plan line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return plan;
}

std::vector<double> ops_shift(const OpsRequest& req) {
  const std::size_t n = req.d.size();
  const auto low = sorted_unique(req.low, n, "I0");
  const auto high = sorted_unique(req.high, n, "I1");
  std::vector<std::size_t> both;
  std::set_intersection(low.begin(), low.end(), high.begin(), high.end(),
                        std::back_inserter(both));
  if (!both.empty()) {
    throw InvalidInput("I0 and I1 share index " + std::to_string(both.front()));
  }
  for (double x : req.d) {
    if (!(x >= 0.0 && x <= 1.0)) throw InvalidInput("sequence value outside [0,1]");
  }

  double low_max = 0.0, low_sum = 0.0;
  for (auto i : low) {
    low_max = std::max(low_max, req.d[i]);
    low_sum += req.d[i];
  }
  double high_min = 1.0, high_room = 0.0;
  for (auto i : high) {
    high_min = std::min(high_min, req.d[i]);
    high_room += 1.0 - req.d[i];
  }
  if (!low.empty() && !high.empty() && low_max > high_min + kInputTolerance) {
    std::ostringstream os;
    os << "max{d_i : i in I0} = " << low_max << " exceeds min{d_i : i in I1} = " << high_min;
    throw InvalidInput(os.str());
  }
  if (req.eta < -kInputTolerance) throw InvalidInput("eta0 must be nonnegative");
  if (req.eta > std::min(low_sum, high_room) + kInputTolerance) {
    std::ostringstream os;
    os << "eta0 = " << req.eta << " exceeds min(sum_I0 d = " << low_sum
       << ", sum_I1 (1-d) = " << high_room << ")";
    throw InvalidInput(os.str());
  }

  std::vector<double> out = req.d;
  const double eta = std::max(req.eta, 0.0);
  double remaining = eta;
  for (auto i : low) {
    if (remaining <= 0.0) break;
    const double take = std::min(out[i], remaining);
    out[i] -= take;
    remaining -= take;
  }
  remaining = eta;
  for (auto i : high) {
    if (remaining <= 0.0) break;
    const double give = std::min(1.0 - out[i], remaining);
    out[i] += give;
    remaining -= give;
  }
  return out;
}

Interval attainable_interval(const SymmetricMatrix& e, std::size_t i, std::size_t j) {
  const double u = e(i, i), v = e(j, j), w = e(i, j);
  const double mean = 0.5 * (u + v);
  const double radius = std::hypot(0.5 * (u - v), w);
  return {mean - radius, mean + radius};
}

double rotation_angle_for(const SymmetricMatrix& e, std::size_t i, std::size_t j,
                          double target) {
  const double u = e(i, i), v = e(j, j), w = e(i, j);
  const double mean = 0.5 * (u + v);
  const double half_gap = 0.5 * (u - v);
  const double radius = std::hypot(half_gap, w);
  const double offset = target - mean;
  // f(theta) = mean + half_gap cos(2 theta) + w sin(2 theta) = mean + radius cos(2 theta - psi)
  const double slack = 1e-12 * std::max(1.0, std::abs(mean)) + 1e-12 * radius;
  if (std::abs(offset) > radius + slack) {
    std::ostringstream os;
    os.precision(17);
    os << "target " << target << " outside attainable interval [" << mean - radius << ", "
       << mean + radius << "] on coordinates (" << i << "," << j << ")";
    throw InvalidInput(os.str());
  }
  if (radius == 0.0) return 0.0;
  const double ratio = std::clamp(offset / radius, -1.0, 1.0);
  const double psi = std::atan2(w, half_gap);
  const double spread = std::acos(ratio);
  const double t1 = normalize_half_turn(0.5 * (psi + spread));
  const double t2 = normalize_half_turn(0.5 * (psi - spread));
  const double a1 = std::abs(t1), a2 = std::abs(t2);
  if (std::abs(a1 - a2) <= 1e-15) return std::max(t1, t2);
  return a1 < a2 ? t1 : t2;
}

RotationResult rotate_to_diagonal(const SymmetricMatrix& e, std::size_t i, std::size_t j,
                                  double target) {
  if (i >= e.size() || j >= e.size() || i == j) {
    throw InvalidInput("rotate_to_diagonal needs two distinct in-range coordinates");
  }
  RotationResult out{e, rotation_angle_for(e, i, j, target)};
  if (out.angle != 0.0) out.matrix.rotate(i, j, std::cos(out.angle), std::sin(out.angle));
  return out;
}

RestoreResult ops_restore(const SymmetricMatrix& e_tilde, std::span<const double> d_tilde,
                          std::span<const double> d, std::span<const std::size_t> low,
                          std::span<const std::size_t> high) {
  const std::size_t n = e_tilde.size();
  if (d_tilde.size() != n || d.size() != n) {
    throw InvalidInput("ops_restore: diagonal lengths must match the matrix dimension");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(e_tilde(k, k) - d_tilde[k]) > kInputTolerance) {
      throw InvalidInput("ops_restore: diag(E_tilde) differs from d_tilde at index " +
                         std::to_string(k));
    }
  }
  const auto lo = sorted_unique(low, n, "I0");
  const auto hi = sorted_unique(high, n, "I1");

  std::vector<double> deficit(lo.size()), surplus(hi.size());
  double deficit_sum = 0.0, surplus_sum = 0.0;
  for (std::size_t a = 0; a < lo.size(); ++a) {
    deficit[a] = d[lo[a]] - d_tilde[lo[a]];
    if (deficit[a] < -kInputTolerance) {
      throw InvalidInput("ops_restore: d_tilde exceeds d on I0 index " + std::to_string(lo[a]));
    }
    deficit_sum += deficit[a];
  }
  for (std::size_t b = 0; b < hi.size(); ++b) {
    surplus[b] = d_tilde[hi[b]] - d[hi[b]];
    if (surplus[b] < -kInputTolerance) {
      throw InvalidInput("ops_restore: d_tilde below d on I1 index " + std::to_string(hi[b]));
    }
    surplus_sum += surplus[b];
  }
  if (std::abs(deficit_sum - surplus_sum) > kInputTolerance) {
    throw InvalidInput("ops_restore: mass removed from I0 does not match mass added to I1");
  }
  for (std::size_t k = 0; k < n; ++k) {
    const bool touched = std::binary_search(lo.begin(), lo.end(), k) ||
                         std::binary_search(hi.begin(), hi.end(), k);
    if (!touched && std::abs(d[k] - d_tilde[k]) > kInputTolerance) {
      throw InvalidInput("ops_restore: d and d_tilde differ outside I0 and I1 at index " +
                         std::to_string(k));
    }
  }

  RestoreResult out{e_tilde, {}};
  std::size_t a = 0, b = 0;
  for (;;) {
    while (a < lo.size() && deficit[a] <= kNegligible) ++a;
    while (b < hi.size() && surplus[b] <= kNegligible) ++b;
    if (a == lo.size() || b == hi.size()) break;
    const std::size_t i = lo[a], j = hi[b];
    const double t = std::min(deficit[a], surplus[b]);
    const bool closes_i = t == deficit[a];
    const double target = closes_i ? d[i] : out.matrix(i, i) + t;
    double theta = 0.0;
    try {
      theta = rotation_angle_for(out.matrix, i, j, target);
    } catch (const InvalidInput& ex) {
      std::ostringstream os;
      os.precision(17);
      os << "ops_restore: infeasible transfer of " << t << " from " << j << " to " << i
         << " (E_ii=" << out.matrix(i, i) << ", E_jj=" << out.matrix(j, j)
         << ", E_ij=" << out.matrix(i, j) << "): " << ex.what();
      throw InvariantViolation(os.str());
    }
    if (theta != 0.0) {
      out.matrix.rotate(i, j, std::cos(theta), std::sin(theta));
      out.plan.moves.push_back({i, j, MoveKind::GeneralRotation, theta});
    }
    deficit[a] = closes_i ? 0.0 : deficit[a] - t;
    surplus[b] -= t;
  }
  return out;
}

}  // namespace carpenter
