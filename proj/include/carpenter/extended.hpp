#pragma once

#include <cmath>
#include <limits>
#include <ostream>

namespace carpenter {

/// Nonnegative extended real: a finite value or a symbolic +infinity.
/// Infinity is a flag, never a float sentinel, so comparisons stay exact.
class Extended {
 public:
  constexpr Extended() = default;
  constexpr explicit Extended(double value) : value_(value) {}

  static constexpr Extended infinity() {
    Extended e;
    e.infinite_ = true;
    return e;
  }

  constexpr bool is_finite() const { return !infinite_; }
  constexpr bool is_infinite() const { return infinite_; }

  /// Finite value; meaningless when infinite.
  constexpr double value() const { return value_; }

  /// For display and JSON only.
  double as_double() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  friend constexpr Extended operator+(Extended lhs, Extended rhs) {
    if (lhs.infinite_ || rhs.infinite_) return infinity();
    return Extended(lhs.value_ + rhs.value_);
  }

  friend constexpr bool operator==(const Extended&, const Extended&) = default;

  friend std::ostream& operator<<(std::ostream& os, const Extended& e) {
    if (e.infinite_) return os << "inf";
    return os << e.value_;
  }

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace carpenter
