#include "carpenter/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace carpenter::kernels {

namespace {

// Columns of M laid out as rows, so (M M)_ij is a dot of two contiguous rows.
std::vector<double> transposed(MatrixView m) {
  std::vector<double> t(m.n * m.n);
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::size_t j = 0; j < m.n; ++j) t[j * m.n + i] = m(i, j);
  }
  return t;
}

double product_entry(MatrixView m, const std::vector<double>& cols, std::size_t i,
                     std::size_t j) {
  const double* ri = m.data.data() + i * m.n;
  const double* cj = cols.data() + j * m.n;
  double s = 0.0;
  for (std::size_t k = 0; k < m.n; ++k) s += ri[k] * cj[k];
  return s;
}

double sparse_dot(const SparseRow& r, const SparseRow& s) {
  const std::size_t lo = std::max(r.lo, s.lo);
  const std::size_t hi = std::min(r.hi(), s.hi());
  double acc = 0.0;
  for (std::size_t p = lo; p <= hi; ++p) acc += r.values[p - r.lo] * s.values[p - s.lo];
  return acc;
}

bool overlap(const SparseRow& r, const SparseRow& s) {
  return !r.values.empty() && !s.values.empty() && r.lo <= s.hi() && s.lo <= r.hi();
}

double gram_row(std::span<const SparseRow> rows, std::size_t r) {
  double worst = 0.0;
  for (std::size_t s = r; s < rows.size(); ++s) {
    const double target = r == s ? 1.0 : 0.0;
    const double g = overlap(rows[r], rows[s]) ? sparse_dot(rows[r], rows[s]) : 0.0;
    worst = std::max(worst, std::abs(g - target));
  }
  return worst;
}

}  // namespace

namespace serial {

double symmetry_defect(MatrixView m) {
  double worst = 0.0;
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::size_t j = i + 1; j < m.n; ++j) worst = std::max(worst, std::abs(m(i, j) - m(j, i)));
  }
  return worst;
}

double idempotence_defect(MatrixView m) {
  const auto cols = transposed(m);
  double worst = 0.0;
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::size_t j = 0; j < m.n; ++j) {
      worst = std::max(worst, std::abs(product_entry(m, cols, i, j) - m(i, j)));
    }
  }
  return worst;
}

double gram_defect(std::span<const SparseRow> rows) {
  double worst = 0.0;
  for (std::size_t r = 0; r < rows.size(); ++r) worst = std::max(worst, gram_row(rows, r));
  return worst;
}

}  // namespace serial

namespace parallel {

double symmetry_defect(MatrixView m) {
  double worst = 0.0;
  const auto n = static_cast<std::int64_t>(m.n);
#pragma omp parallel for reduction(max : worst) schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = i + 1; j < n; ++j) {
      worst = std::max(worst, std::abs(m(i, j) - m(j, i)));
    }
  }
  return worst;
}

double idempotence_defect(MatrixView m) {
  const auto cols = transposed(m);
  double worst = 0.0;
  const auto n = static_cast<std::int64_t>(m.n);
#pragma omp parallel for reduction(max : worst) schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      worst = std::max(worst, std::abs(product_entry(m, cols, i, j) - m(i, j)));
    }
  }
  return worst;
}

double gram_defect(std::span<const SparseRow> rows) {
  double worst = 0.0;
  const auto count = static_cast<std::int64_t>(rows.size());
#pragma omp parallel for reduction(max : worst) schedule(dynamic, 8)
  for (std::int64_t r = 0; r < count; ++r) worst = std::max(worst, gram_row(rows, r));
  return worst;
}

}  // namespace parallel

}  // namespace carpenter::kernels
