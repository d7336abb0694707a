#include "carpenter/matrix.hpp"

#include <cmath>

#include "carpenter/errors.hpp"

namespace carpenter {

SymmetricMatrix SymmetricMatrix::identity(std::size_t n) {
  SymmetricMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m.set(i, i, 1.0);
  return m;
}

SymmetricMatrix SymmetricMatrix::diagonal(std::span<const double> values) {
  SymmetricMatrix m(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m.set(i, i, values[i]);
  return m;
}

std::vector<double> SymmetricMatrix::diagonal() const {
  std::vector<double> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = (*this)(i, i);
  return out;
}

double SymmetricMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < n_; ++i) t += (*this)(i, i);
  return t;
}

SymmetricMatrix SymmetricMatrix::permuted(std::span<const std::size_t> order) const {
  if (order.size() != n_) throw InvalidInput("permutation length does not match dimension");
  SymmetricMatrix out(n_);
  for (std::size_t a = 0; a < n_; ++a) {
    for (std::size_t b = 0; b < n_; ++b) out.data_[a * n_ + b] = (*this)(order[a], order[b]);
  }
  return out;
}

SymmetricMatrix SymmetricMatrix::embedded(std::size_t n,
                                          std::span<const std::size_t> coords) const {
  if (coords.size() != n_) throw InvalidInput("embedding needs one coordinate per row");
  SymmetricMatrix out(n);
  for (std::size_t a = 0; a < n_; ++a) {
    if (coords[a] >= n) throw InvalidInput("embedding coordinate out of range");
    for (std::size_t b = 0; b < n_; ++b) out.data_[coords[a] * n + coords[b]] = (*this)(a, b);
  }
  return out;
}

void SymmetricMatrix::rotate(std::size_t i, std::size_t j, double c, double s) {
  if (i >= n_ || j >= n_ || i == j) throw InvalidInput("rotation needs two distinct coordinates");
  const double u = (*this)(i, i);
  const double v = (*this)(j, j);
  const double w = (*this)(i, j);
  for (std::size_t k = 0; k < n_; ++k) {
    if (k == i || k == j) continue;
    const double eki = (*this)(k, i);
    const double ekj = (*this)(k, j);
    set(k, i, c * eki + s * ekj);
    set(k, j, -s * eki + c * ekj);
  }
  set(i, i, c * c * u + 2.0 * c * s * w + s * s * v);
  set(j, j, s * s * u - 2.0 * c * s * w + c * c * v);
  set(i, j, c * s * (v - u) + (c * c - s * s) * w);
}

double max_abs_difference(const SymmetricMatrix& lhs, const SymmetricMatrix& rhs) {
  if (lhs.size() != rhs.size()) throw InvalidInput("dimension mismatch");
  const auto a = lhs.view().data;
  const auto b = rhs.view().data;
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  return worst;
}

SymmetricMatrix complement(const SymmetricMatrix& p) {
  const std::size_t n = p.size();
  SymmetricMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.set(i, i, 1.0 - p(i, i));
    for (std::size_t j = i + 1; j < n; ++j) out.set(i, j, -p(i, j));
  }
  return out;
}

}  // namespace carpenter
