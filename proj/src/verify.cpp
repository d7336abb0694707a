#include "carpenter/verify.hpp"

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "carpenter/diagonal.hpp"
#include "carpenter/errors.hpp"
#include "carpenter/kernels.hpp"

namespace carpenter {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::MatrixXd to_eigen(MatrixView m) {
  return Eigen::Map<const RowMajor>(m.data.data(), static_cast<Eigen::Index>(m.n),
                                    static_cast<Eigen::Index>(m.n));
}

}  // namespace

std::vector<double> symmetric_eigenvalues(MatrixView m) {
  if (m.n == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(to_eigen(m), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw InvariantViolation("eigensolver did not converge");
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

VerificationReport check_projection(MatrixView p, std::span<const double> d, double tol,
                                    std::span<const std::uint8_t> mask, double diagonal_tol) {
  if (p.data.size() != p.n * p.n) throw InvalidInput("check_projection: matrix is not square");
  if (d.size() != p.n) throw InvalidInput("check_projection: diagonal length mismatch");
  if (!mask.empty() && mask.size() != p.n) throw InvalidInput("check_projection: mask length");

  VerificationReport r;
  r.dimension = p.n;
  r.tolerance = tol;
  r.diagonal_tolerance = diagonal_tol < 0.0 ? tol : diagonal_tol;
  r.symmetry_defect = kernels::parallel::symmetry_defect(p);
  r.idempotence_defect = kernels::parallel::idempotence_defect(p);
  for (std::size_t i = 0; i < p.n; ++i) {
    r.trace += p(i, i);
    if (mask.empty() || mask[i]) {
      r.diagonal_max_error = std::max(r.diagonal_max_error, std::abs(p(i, i) - d[i]));
    }
  }
  // Symmetrize before the eigensolver so a defective input still gets a rank.
  std::vector<double> sym(p.data.begin(), p.data.end());
  for (std::size_t i = 0; i < p.n; ++i) {
    for (std::size_t j = i + 1; j < p.n; ++j) {
      const double avg = 0.5 * (p(i, j) + p(j, i));
      sym[i * p.n + j] = sym[j * p.n + i] = avg;
    }
  }
  for (double ev : symmetric_eigenvalues(MatrixView{p.n, sym})) {
    if (ev > 0.5) ++r.estimated_rank;
  }
  r.symmetry_pass = r.symmetry_defect <= tol;
  r.idempotence_pass = r.idempotence_defect <= tol;
  r.diagonal_pass = r.diagonal_max_error <= r.diagonal_tolerance;
  return r;
}

double check_rows(std::span<const SparseRow> rows) { return kernels::parallel::gram_defect(rows); }

std::vector<double> random_orthogonal(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = normal(gen);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  std::vector<double> out(n * n);
  Eigen::Map<RowMajor>(out.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) = q;
  return out;
}

OracleResult necessity_oracle(std::size_t n, std::size_t rank, std::size_t trials,
                              std::uint64_t seed) {
  if (rank > n) throw InvalidInput("necessity_oracle: rank exceeds dimension");
  OracleResult out;
  out.trials = trials;
  double worst = 0.0;
  std::size_t failures = 0;
  const auto count = static_cast<std::int64_t>(trials);
#pragma omp parallel for reduction(max : worst) reduction(+ : failures) schedule(dynamic)
  for (std::int64_t t = 0; t < count; ++t) {
    const auto q = random_orthogonal(n, seed + static_cast<std::uint64_t>(t));
    // diag(P)_i = sum_{k < rank} Q_ik^2
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = 0.0;
      for (std::size_t k = 0; k < rank; ++k) d += q[i * n + k] * q[i * n + k];
      if (d < 0.5) {
        a += d;
      } else {
        b += 1.0 - d;
      }
    }
    const double defect = std::abs(std::round(a - b) - (a - b));
    worst = std::max(worst, defect);
    if (defect > 1e-8) ++failures;
  }
  out.worst_defect = worst;
  out.failures = failures;
  out.passed = failures == 0;
  return out;
}

}  // namespace carpenter
