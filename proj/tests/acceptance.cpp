// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance <path-to-carpenter-cli>
#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "carpenter/carpenter.hpp"
#include "carpenter/horn.hpp"
#include "carpenter/moves.hpp"
#include "carpenter/tetris.hpp"
#include "oracles.hpp"

using namespace carpenter;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0 && secs > limit_s) {
    out.pass = false;
    out.detail += " [over time limit " + std::to_string(limit_s) + " s]";
  }
  if (!out.pass) ++failures;
  std::printf("%s criterion %d: %s (%.2f s) %s\n", out.pass ? "PASS" : "FAIL", id, name, secs,
              out.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

// Kadison invariants computed directly from the definitions.
std::pair<double, double> invariants(const std::vector<double>& d) {
  double a = 0.0, b = 0.0;
  for (double x : d) (x < 0.5 ? a : b) += x < 0.5 ? x : 1.0 - x;
  return {a, b};
}

Outcome exact_construction() {
  std::mt19937_64 rng(20240601);
  double worst_idem = 0, worst_diag = 0, worst_trace = 0;
  bool symmetric = true;
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + rng() % 100;
    const auto d = oracle::integral_diagonal(rng, n);
    double sum = 0.0;
    for (double x : d) sum += x;
    for (auto pipeline : {BuildOptions::Pipeline::Shortcut, BuildOptions::Pipeline::Full}) {
      BuildOptions o;
      o.pipeline = pipeline;
      const auto r = build({d, {}}, o);
      const auto& p = r.matrix;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) symmetric = symmetric && p(i, j) == p(j, i);
      worst_idem = std::max(worst_idem, oracle::idempotence(p));
      worst_diag = std::max(worst_diag, oracle::diagonal_error(p, d));
      worst_trace = std::max(worst_trace, std::abs(p.trace() - std::round(sum)));
    }
  }
  const bool ok = symmetric && worst_idem <= 1e-9 && worst_diag <= 1e-9 && worst_trace <= 1e-8;
  return {ok, "symmetric=" + std::string(symmetric ? "exact" : "NO") + " idempotence=" +
                  fmt(worst_idem) + " diagonal=" + fmt(worst_diag) + " trace=" + fmt(worst_trace)};
}

Outcome horn_round_trip() {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.1, 5.0);
  double worst_spec = 0, worst_diag = 0;
  for (int t = 0; t < 200; ++t) {
    const auto n = static_cast<Eigen::Index>(1 + rng() % 20);
    const auto m = n + static_cast<Eigen::Index>(rng() % (61 - n));
    std::vector<double> lambdas(n);
    for (double& l : lambdas) l = u(rng);
    // Diagonal of Q diag(lambda, 0) Q^T is majorized by lambda.
    Eigen::MatrixXd gauss(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) gauss(i, j) = g(rng);
    const Eigen::MatrixXd q = gauss.householderQr().householderQ();
    Eigen::VectorXd ev = Eigen::VectorXd::Zero(m);
    for (Eigen::Index i = 0; i < n; ++i) ev(i) = lambdas[i];
    const Eigen::MatrixXd a = q * ev.asDiagonal() * q.transpose();
    std::vector<double> d(m);
    for (Eigen::Index i = 0; i < m; ++i) d[i] = std::max(0.0, a(i, i));
    const auto s = horn_build({lambdas, d}, 1e-9);
    std::vector<double> want(m, 0.0);
    std::copy(lambdas.begin(), lambdas.end(), want.begin());
    worst_spec = std::max(worst_spec, oracle::spectrum_error(oracle::spectrum(s), want));
    worst_diag = std::max(worst_diag, oracle::diagonal_error(s, d));
  }
  return {worst_spec <= 1e-8 && worst_diag <= 1e-10,
          "spectrum=" + fmt(worst_spec) + " diagonal=" + fmt(worst_diag)};
}

Outcome tetris_suite() {
  bool ok = true;
  std::string detail;
  double worst_gram = 0, worst_col = 0;
  std::size_t families = 0;

  // Anchors for d = 0.4.
  {
    TetrisStream s(std::make_unique<ListSource>(std::vector<double>(50, 0.4)));
    const auto& r1 = s.next_row();
    const bool anchors = std::abs(s.sigma(1) - 0.6) < 1e-15 && std::abs(s.a(1) - 0.3) < 1e-15 &&
                         r1.lo == 1 && r1.values.size() == 3 &&
                         std::abs(r1.values[0] - std::sqrt(0.4)) < 1e-15 &&
                         std::abs(r1.values[1] - std::sqrt(0.3)) < 1e-15 &&
                         std::abs(r1.values[2] + std::sqrt(0.3)) < 1e-15;
    s.next_row();
    const bool second = std::abs(s.sigma(2) - 0.8) < 1e-15 && std::abs(s.a(2) - 0.4) < 1e-15;
    if (!anchors || !second) {
      ok = false;
      detail += "anchors mismatch; ";
    }
  }

  std::vector<std::vector<double>> heads{{}, {0.7}, {0.9}};
  for (const auto& head : heads) {
    for (double c : {0.1, 0.25, 0.4, 0.5}) {
      ++families;
      std::vector<double> d(head);
      d.resize(12000, c);
      TetrisStream s(std::make_unique<ListSource>(d));
      for (int r = 0; r < 500; ++r) s.next_row();
      const auto& rows = s.rows();
      for (std::size_t n = 2; n <= 500; ++n) {
        if (!(s.m(n - 1) + 2 <= s.k(n) && s.k(n) <= s.m(n))) {
          ok = false;
          detail += "threshold order broken; ";
          break;
        }
      }
      // Gram matrix over positions, all pairs.
      for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t q = r; q < rows.size(); ++q) {
          double dot = 0.0;
          for (std::size_t x = 0; x < rows[r].values.size(); ++x) {
            const std::size_t p = rows[r].lo + x;
            if (p >= rows[q].lo && p < rows[q].lo + rows[q].values.size()) {
              dot += rows[r].values[x] * rows[q].values[p - rows[q].lo];
            }
          }
          worst_gram = std::max(worst_gram, std::abs(dot - (r == q ? 1.0 : 0.0)));
        }
      }
      // Column norms from the rows, for columns no later row can reach.
      const std::size_t complete = s.k(500) - 2;
      std::vector<double> norms(complete, 0.0);
      for (const auto& row : rows)
        for (std::size_t x = 0; x < row.values.size(); ++x)
          if (row.lo + x <= complete) norms[row.lo + x - 1] += row.values[x] * row.values[x];
      for (std::size_t p = 1; p <= complete; ++p)
        worst_col = std::max(worst_col, std::abs(norms[p - 1] - s.at_position(p).value));
    }
  }
  ok = ok && worst_gram <= 1e-11 && worst_col <= 1e-12;
  return {ok, detail + std::to_string(families) + " families, gram=" + fmt(worst_gram) +
                  " columns=" + fmt(worst_col)};
}

Outcome ops_suite() {
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g;
  double worst_shift = 0, worst_diag = 0, worst_spec = 0, worst_replay = 0;
  bool signs = true;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng() % 12;
    std::vector<double> d(n);
    for (double& x : d) x = u(rng);
    // Random disjoint I0, I1 with max(d on I0) <= min(d on I1).
    const double cut = u(rng);
    std::vector<std::size_t> low, high;
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = rng() % 3;
      if (r == 0 && d[i] <= cut) low.push_back(i);
      if (r == 1 && d[i] >= cut) high.push_back(i);
    }
    if (low.empty() || high.empty()) {
      --t;
      continue;
    }
    double cap_low = 0, cap_high = 0;
    for (auto i : low) cap_low += d[i];
    for (auto i : high) cap_high += 1 - d[i];
    const double eta = u(rng) * std::min(cap_low, cap_high);
    const auto dt = ops_shift({d, low, high, eta});

    double moved_low = 0, moved_high = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool in_low = std::find(low.begin(), low.end(), i) != low.end();
      const bool in_high = std::find(high.begin(), high.end(), i) != high.end();
      if (!in_low && !in_high) worst_shift = std::max(worst_shift, std::abs(dt[i] - d[i]));
      if (in_low) signs = signs && dt[i] <= d[i] && dt[i] >= 0.0;
      if (in_high) signs = signs && dt[i] >= d[i] && dt[i] <= 1.0;
      if (in_low) moved_low += d[i] - dt[i];
      if (in_high) moved_high += dt[i] - d[i];
    }
    worst_shift = std::max({worst_shift, std::abs(moved_low - eta), std::abs(moved_high - eta)});

    // A random symmetric matrix with diagonal d-tilde.
    SymmetricMatrix e(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) e.set(i, j, 0.3 * g(rng));
    for (std::size_t i = 0; i < n; ++i) e.set(i, i, dt[i]);
    const auto r = ops_restore(e, dt, d, low, high);
    worst_diag = std::max(worst_diag, oracle::diagonal_error(r.matrix, d));
    worst_spec = std::max(worst_spec,
                          oracle::spectrum_error(oracle::spectrum(r.matrix), oracle::spectrum(e)));
    worst_replay = std::max(worst_replay, max_abs_difference(replay(e, r.plan), r.matrix));
  }
  const bool ok = signs && worst_shift <= 1e-12 && worst_diag <= 1e-9 && worst_spec <= 1e-9 &&
                  worst_replay <= 1e-12;
  return {ok, std::string("shift invariants ") + (signs ? "ok" : "VIOLATED") + " transfer=" +
                  fmt(worst_shift) + " diagonal=" + fmt(worst_diag) + " spectrum=" +
                  fmt(worst_spec) + " replay=" + fmt(worst_replay)};
}

Outcome necessity() {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g;
  double worst = 0.0;
  std::size_t total = 0;
  const std::pair<int, int> shapes[] = {{4, 2}, {6, 3}, {8, 5}};
  for (auto [n, rank] : shapes) {
    for (int t = 0; t < 1000; ++t, ++total) {
      Eigen::MatrixXd gauss(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) gauss(i, j) = g(rng);
      const Eigen::MatrixXd q = gauss.householderQr().householderQ();
      const Eigen::MatrixXd basis = q.leftCols(rank);
      const Eigen::MatrixXd p = basis * basis.transpose();
      std::vector<double> d(n);
      for (int i = 0; i < n; ++i) d[i] = p(i, i);
      const auto [a, b] = invariants(d);
      worst = std::max(worst, std::abs((a - b) - std::round(a - b)));
    }
    const auto lib = necessity_oracle(n, rank, 1000, 1234);
    if (!lib.passed) return {false, "library oracle failed for n=" + std::to_string(n)};
    worst = std::max(worst, lib.worst_defect);
  }
  return {worst <= 1e-8, std::to_string(total) + " sampled projections (plus library oracle), "
                             "max |a-b - round(a-b)| = " + fmt(worst)};
}

Outcome negative_entries() {
  std::mt19937_64 rng(314);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double least_negative = -1.0;
  int built = 0;
  while (built < 100) {
    const double x = u(rng), y = u(rng), z = 2.0 - x - y;
    if (!(x > 0 && y > 0 && z > 0 && z < 1)) continue;
    const auto r = build({{x, y, z}, {}});
    if (!r.report.pass()) return {false, "build failed verification"};
    double most = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < i; ++j) most = std::min(most, r.matrix(i, j));
    least_negative = std::max(least_negative, most);
    ++built;
  }
  return {least_negative < -1e-12,
          "100 triples, max over triples of the smallest off-diagonal entry = " +
              fmt(least_negative)};
}

int run_cli(const std::string& cli, const std::string& args) {
  const int status = std::system((cli + " " + args + " 2>/dev/null").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome infeasibility(const std::string& cli) {
  if (cli.empty() || !fs::exists(cli)) return {false, "CLI binary not given"};
  const fs::path dir = fs::temp_directory_path() / ("carpenter_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  std::vector<std::vector<double>> cases{{1.0 / 3}, {0.2, 0.9}};
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  while (cases.size() < 102) {
    std::vector<double> d(1 + rng() % 20);
    double s = 0.0;
    for (double& x : d) s += x = u(rng);
    const auto [a, b] = invariants(d);
    if (std::abs(s - std::round(s)) > 1e-6 && std::abs((a - b) - std::round(a - b)) > 1e-6)
      cases.push_back(d);
  }
  std::string detail;
  bool ok = true;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const auto& d = cases[k];
    const fs::path in = dir / "spec.json", out = dir / "report.json";
    std::ofstream(in) << nlohmann::json{{"prefix", d}}.dump(-1, ' ', false) << '\n';
    const int code = run_cli(cli, "classify -i " + in.string() + " -o " + out.string());
    const int build_code = k < 2 ? run_cli(cli, "build -i " + in.string() + " -o " +
                                                    (dir / "m.csv").string())
                                 : 2;
    std::ifstream report(out);
    const auto j = nlohmann::json::parse(report);
    const auto [a, b] = invariants(d);
    const bool witness = j["verdict"] == "Infeasible" &&
                         std::abs(j["a"].get<double>() - a) <= 1e-12 &&
                         std::abs(j["b"].get<double>() - b) <= 1e-12 &&
                         std::abs(j["a_minus_b"].get<double>() - (a - b)) <= 1e-12;
    if (code != 2 || build_code != 2 || !witness) {
      ok = false;
      detail += "case " + std::to_string(k) + " exit " + std::to_string(code) + "/" +
                std::to_string(build_code) + (witness ? "" : " bad witness") + "; ";
    }
    if (k == 0) detail += "(1/3): a-b=" + fmt(j["a_minus_b"].get<double>()) + "; ";
    if (k == 1) detail += "(0.2,0.9): a-b=" + fmt(j["a_minus_b"].get<double>()) + "; ";
  }
  fs::remove_all(dir);
  return {ok, detail + std::to_string(cases.size()) + " lists rejected with exit 2"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  criterion(1, "exact construction, 500 random finite diagonals, both pipelines", 60, exact_construction);
  criterion(2, "Horn round trip, 200 majorization inputs", 30, horn_round_trip);
  criterion(3, "tetris streams, 500 rows per family", 10, tetris_suite);
  criterion(4, "mass transfer and restoration, 200 random requests", 0, ops_suite);
  criterion(5, "necessity oracle, 1000 projections per shape", 0, necessity);
  criterion(6, "negative off-diagonal entry for triples summing to 2", 0, negative_entries);
  criterion(7, "infeasibility detection through the CLI", 0, [&] { return infeasibility(cli); });
  std::printf("%d of 7 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
