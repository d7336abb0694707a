#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "carpenter/matrix.hpp"

namespace oracle {

inline Eigen::MatrixXd dense(const carpenter::SymmetricMatrix& m) {
  const auto n = static_cast<Eigen::Index>(m.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = m(i, j);
  return out;
}

// Ascending eigenvalues.
inline std::vector<double> spectrum(const carpenter::SymmetricMatrix& m) {
  if (m.size() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(m), Eigen::EigenvaluesOnly);
  return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

inline double idempotence(const carpenter::SymmetricMatrix& m) {
  const auto p = dense(m);
  return m.size() == 0 ? 0.0 : (p * p - p).cwiseAbs().maxCoeff();
}

inline double diagonal_error(const carpenter::SymmetricMatrix& m, const std::vector<double>& d) {
  double worst = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) worst = std::max(worst, std::abs(m(i, i) - d[i]));
  return worst;
}

// Sorted-ascending comparison of spectra.
inline double spectrum_error(std::vector<double> got, std::vector<double> want) {
  std::sort(got.begin(), got.end());
  std::sort(want.begin(), want.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
  return worst;
}

// Uniform entries with the last adjusted so the sum is an integer; retries
// until the adjusted entry lands in [0,1].
inline std::vector<double> integral_diagonal(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  while (true) {
    std::vector<double> d(n);
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) s += d[i] = u(rng);
    const double last = std::ceil(s) - s;
    if (last >= 0.0 && last <= 1.0) {
      d[n - 1] = last;
      return d;
    }
  }
}

}  // namespace oracle
