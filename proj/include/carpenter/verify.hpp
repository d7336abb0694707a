#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "carpenter/matrix.hpp"
#include "carpenter/tetris.hpp"

namespace carpenter {

inline constexpr double kProjectionTolerance = 1e-9;

struct VerificationReport {
  std::size_t dimension = 0;
  double symmetry_defect = 0.0;
  double idempotence_defect = 0.0;
  double diagonal_max_error = 0.0;
  double trace = 0.0;
  std::size_t estimated_rank = 0;
  double tolerance = kProjectionTolerance;
  double diagonal_tolerance = kProjectionTolerance;

  bool symmetry_pass = false;
  bool idempotence_pass = false;
  bool diagonal_pass = false;

  bool pass() const { return symmetry_pass && idempotence_pass && diagonal_pass; }
};

/// Checks that `p` is an orthogonal projection with diagonal `d`. When `mask`
/// is non-empty only entries with mask[i] set count toward the diagonal error.
/// `diagonal_tol` defaults to `tol`.
VerificationReport check_projection(MatrixView p, std::span<const double> d,
                                    double tol = kProjectionTolerance,
                                    std::span<const std::uint8_t> mask = {},
                                    double diagonal_tol = -1.0);

inline VerificationReport check_projection(const SymmetricMatrix& p, std::span<const double> d,
                                           double tol = kProjectionTolerance) {
  return check_projection(p.view(), d, tol);
}

/// max |Gram - I| over the rows.
double check_rows(std::span<const SparseRow> rows);

/// Ascending eigenvalues of a symmetric matrix (Eigen's self-adjoint solver).
std::vector<double> symmetric_eigenvalues(MatrixView m);
inline std::vector<double> symmetric_eigenvalues(const SymmetricMatrix& m) {
  return symmetric_eigenvalues(m.view());
}

/// Random orthogonal n x n matrix (row-major): QR of a standard Gaussian
/// matrix drawn from mt19937_64(seed), columns sign-normalized so R has a
/// positive diagonal.
std::vector<double> random_orthogonal(std::size_t n, std::uint64_t seed);

struct OracleResult {
  bool passed = true;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double worst_defect = 0.0;  // max |round(a-b) - (a-b)| over trials
};

/// Samples random rank-`rank` projections Q diag(1..1,0..0) Q^T on R^n and
/// checks that a - b of each diagonal is an integer within 1e-8. Trial t uses
/// seed + t, so results do not depend on the thread count.
OracleResult necessity_oracle(std::size_t n, std::size_t rank, std::size_t trials,
                              std::uint64_t seed);

}  // namespace carpenter
