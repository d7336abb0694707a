#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "carpenter/extended.hpp"

namespace carpenter {

/// Every tail term equals c.
struct ConstantTail {
  double c = 0.0;
};

/// Tail term at position i = 1, 2, ... is x_i = min(c * (i + offset)^-p, 1),
/// or 1 - x_i when `complement` is set.
struct PowerTail {
  double c = 1.0;
  double p = 1.0;
  std::size_t offset = 0;
  bool complement = false;

  double term(std::size_t position) const;
};

using Tail = std::variant<std::monostate, ConstantTail, PowerTail>;

/// A diagonal sequence: a finite prefix followed by an optional infinite tail.
struct DiagonalSpec {
  std::vector<double> prefix;
  Tail tail;

  bool has_tail() const { return !std::holds_alternative<std::monostate>(tail); }

  /// Value at 0-based global index; tail terms start at prefix.size().
  double value(std::size_t index) const;

  /// Throws InvalidInput if any value lies outside [0,1] or the tail
  /// parameters are out of range.
  void validate() const;
};

/// Tail contributions to the two Kadison sums.
struct TailSums {
  Extended below_half;            // sum of d_i over d_i < 1/2
  Extended one_minus_above_half;  // sum of (1 - d_i) over d_i >= 1/2
};

TailSums tail_sums(const DiagonalSpec& spec);

/// Sum of c * j^-p for j >= first, p > 1, accurate to ~1e-13 absolute.
double power_series_sum(double c, double p, std::size_t first);

enum class Verdict { CaseI, CaseII, Infeasible };

const char* to_string(Verdict v);

/// A count that may be infinite (a constant 0 or 1 tail).
struct TrivialCount {
  std::size_t finite = 0;
  bool unbounded = false;

  friend bool operator==(const TrivialCount&, const TrivialCount&) = default;
};

inline constexpr double kIntegralityTolerance = 1e-9;

struct KadisonReport {
  Extended a;
  Extended b;
  TrivialCount num_zeros;
  TrivialCount num_ones;
  Verdict verdict = Verdict::Infeasible;

  /// a - b when both are finite.
  std::optional<double> difference() const;
};

/// Computes a = sum_{d<1/2} d and b = sum_{d>=1/2} (1-d) over prefix and tail
/// and applies Kadison's criterion.
KadisonReport classify(const DiagonalSpec& spec);

/// True when |round(x) - x| <= tol.
bool is_near_integer(double x, double tol = kIntegralityTolerance);

/// Result of removing exact 0 and 1 entries.
struct StrippedSpec {
  DiagonalSpec core;
  TrivialCount num_zeros;
  TrivialCount num_ones;
  /// Original 0-based index of each core prefix entry.
  std::vector<std::size_t> prefix_origin;
  /// Original 0-based index of core tail position 1.
  std::size_t tail_origin = 0;

  /// Original index of a core term (prefix entries first, then tail).
  std::size_t origin(std::size_t core_index) const;
};

StrippedSpec strip_trivial(const DiagonalSpec& spec);

/// Entry-wise d -> 1 - d, tail included.
DiagonalSpec complement(const DiagonalSpec& spec);

}  // namespace carpenter
