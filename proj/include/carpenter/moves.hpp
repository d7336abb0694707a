#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "carpenter/matrix.hpp"

namespace carpenter {

enum class MoveKind { ConvexMix, GeneralRotation };

/// One 2-coordinate orthogonal conjugation. For ConvexMix the parameter is the
/// mixing weight alpha; for GeneralRotation it is the angle theta.
struct Move {
  std::size_t i = 0;
  std::size_t j = 0;
  MoveKind kind = MoveKind::GeneralRotation;
  double parameter = 0.0;
};

/// Ordered audit trail of diagonal-surgery steps.
struct MovePlan {
  std::vector<Move> moves;

  bool empty() const { return moves.empty(); }
  std::size_t size() const { return moves.size(); }
  void append(const MovePlan& other);
};

/// Applies a single move in place.
void apply_move(SymmetricMatrix& e, const Move& move);

/// Replays every move of `plan` on a copy of `start`.
SymmetricMatrix replay(const SymmetricMatrix& start, const MovePlan& plan);

/// One JSON object per line: {"i":..,"j":..,"kind":"convex_mix"|"general_rotation","parameter":..}.
void write_plan_jsonl(std::ostream& os, const MovePlan& plan);
MovePlan read_plan_jsonl(std::istream& is);

struct OpsRequest {
  std::vector<double> d;
  std::vector<std::size_t> low;   // I0
  std::vector<std::size_t> high;  // I1
  double eta = 0.0;               // eta0
};

/// Moves mass `eta` out of the low block and into the high block. Walks each
/// block in ascending index order, pushing entries to 0 (low) or 1 (high)
/// until the transfer is exhausted.
std::vector<double> ops_shift(const OpsRequest& request);

struct RotationResult {
  SymmetricMatrix matrix;
  double angle = 0.0;
};

/// Attainable values of entry (i,i) under rotations in the {i,j} plane: the
/// eigenvalues of the 2x2 principal submatrix.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};
Interval attainable_interval(const SymmetricMatrix& e, std::size_t i, std::size_t j);

/// Rotation angle theta with (G^T E G)_{ii} = target, taken as the solution of
/// smallest |theta| in (-pi/2, pi/2] (positive on ties). Throws InvalidInput
/// when the target is outside the attainable interval.
double rotation_angle_for(const SymmetricMatrix& e, std::size_t i, std::size_t j, double target);

RotationResult rotate_to_diagonal(const SymmetricMatrix& e, std::size_t i, std::size_t j,
                                  double target);

struct RestoreResult {
  SymmetricMatrix matrix;
  MovePlan plan;
};

/// Returns a matrix orthogonally equivalent to `e_tilde` whose diagonal is `d`,
/// given that `d_tilde` came from ops_shift(d, low, high, .).
RestoreResult ops_restore(const SymmetricMatrix& e_tilde, std::span<const double> d_tilde,
                          std::span<const double> d, std::span<const std::size_t> low,
                          std::span<const std::size_t> high);

}  // namespace carpenter
