#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace carpenter {

/// Read-only view of a dense row-major square matrix. Used by the
/// verification kernels, which must also accept matrices read from disk that
/// are not symmetric.
struct MatrixView {
  std::size_t n = 0;
  std::span<const double> data;

  double operator()(std::size_t i, std::size_t j) const { return data[i * n + j]; }
};

/// Dense real symmetric matrix. Every write mirrors across the diagonal, so
/// entries (i,j) and (j,i) are always bit-identical.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  static SymmetricMatrix identity(std::size_t n);
  static SymmetricMatrix diagonal(std::span<const double> values);

  std::size_t size() const { return n_; }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double value) {
    data_[i * n_ + j] = value;
    data_[j * n_ + i] = value;
  }

  std::vector<double> diagonal() const;
  double trace() const;
  MatrixView view() const { return {n_, data_}; }

  /// Result entry (a,b) is this(order[a], order[b]).
  SymmetricMatrix permuted(std::span<const std::size_t> order) const;

  /// Copies this matrix into a zero n x n matrix at coordinates `coords`:
  /// result(coords[a], coords[b]) = this(a, b).
  SymmetricMatrix embedded(std::size_t n, std::span<const std::size_t> coords) const;

  /// Replaces this with G^T * this * G, where G acts on coordinates {i,j} by
  /// G e_i = c e_i + s e_j and G e_j = -s e_i + c e_j.
  void rotate(std::size_t i, std::size_t j, double c, double s);

  friend bool operator==(const SymmetricMatrix&, const SymmetricMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Max-norm of the difference; dimensions must agree.
double max_abs_difference(const SymmetricMatrix& lhs, const SymmetricMatrix& rhs);

/// I - P.
SymmetricMatrix complement(const SymmetricMatrix& p);

}  // namespace carpenter
