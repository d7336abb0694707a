#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "carpenter/matrix.hpp"
#include "carpenter/moves.hpp"

namespace carpenter {

/// Target spectrum (positive eigenvalues) and diagonal for a finite-rank
/// Schur-Horn construction. Both lists may be given in any order.
struct MajorizationInput {
  std::vector<double> lambdas;
  std::vector<double> diag;
};

inline constexpr double kMajorizationTolerance = 1e-10;

struct MajorizationCheck {
  bool ok = false;
  /// 1-based n of the first failed partial-sum inequality; N+1 denotes the
  /// total-sum equality; nullopt when ok or when the input is malformed.
  std::optional<std::size_t> first_violation;
  double excess = 0.0;  // by how much the failed relation is missed

  explicit operator bool() const { return ok; }
};

/// Tests sum_{i<=n} d_i <= sum_{i<=n} lambda_i for n <= N (both sorted
/// nonincreasing) and equality of the totals, all within `tol`.
MajorizationCheck check_majorization(const MajorizationInput& input,
                                     double tol = kMajorizationTolerance);

/// S = v v^T with v_i = sqrt(d_i): rank one, eigenvalue sum(d), diagonal d.
SymmetricMatrix rank_one(std::span<const double> diag, double lambda);

/// U^T E U for the two-coordinate rotation with mixing weight alpha.
/// Requires E(i,j) == 0 (within 1e-12); new diagonal entries are
/// alpha E_ii + (1-alpha) E_jj and (1-alpha) E_ii + alpha E_jj.
SymmetricMatrix convex_mix_unitary(const SymmetricMatrix& e, std::size_t i, std::size_t j,
                                   double alpha);

/// Weight that makes convex_mix_unitary restore `head` after `delta` was moved
/// from a tail entry `tail` onto it. Returns 1 in the 0/0 case.
double mixing_weight(double head, double tail, double delta);

struct HornBuild {
  SymmetricMatrix matrix;
  /// Direct sum of rank-one blocks before any rotation; replaying `plan` on it
  /// reproduces `matrix`.
  SymmetricMatrix blocks;
  MovePlan plan;
  /// m0 and delta of every peel, outermost first (sorted coordinates, 1-based m0).
  std::vector<std::size_t> m0;
  std::vector<double> delta;
  /// Peels where the single-entry transfer would break majorization and the
  /// water-filling repair was used instead.
  std::size_t water_filled_peels = 0;
};

/// Positive semidefinite S with eigenvalues `lambdas` (padded with zeros) and
/// diagonal `diag`, built by peeling the smallest eigenvalue at a time.
HornBuild horn_build_traced(const MajorizationInput& input, double tol = kMajorizationTolerance);

SymmetricMatrix horn_build(const MajorizationInput& input, double tol = kMajorizationTolerance);

}  // namespace carpenter
