#include "carpenter/tetris.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "carpenter/errors.hpp"

namespace carpenter {

namespace {

constexpr double kBoundSlack = 1e-12;
// Radicands this small are rounding residue of an exact zero; their square
// roots (~1e-7) would otherwise dominate the Gram defect.
constexpr double kRadicandNoise = 1e-14;

double sqrt_clamped(double x, const char* what, std::size_t n) {
  if (x < kRadicandNoise) {
    if (x < -kBoundSlack) {
      std::ostringstream os;
      os << "tetris row " << n << ": negative radicand " << x << " for " << what;
      throw InvariantViolation(os.str());
    }
    return 0.0;
  }
  return std::sqrt(x);
}

}  // namespace

ListSource::ListSource(std::vector<double> values) {
  terms_.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) terms_.push_back({i, values[i]});
}

ListSource::ListSource(std::vector<Term> terms) : terms_(std::move(terms)) {}

std::optional<Term> ListSource::next() {
  if (pos_ == terms_.size()) return std::nullopt;
  return terms_[pos_++];
}

SpecSource::SpecSource(DiagonalSpec spec) : spec_(std::move(spec)) {}

SpecSource::SpecSource(DiagonalSpec spec, StrippedSpec mapping)
    : spec_(std::move(spec)), mapping_(std::move(mapping)) {}

void SpecSource::refill() {
  const std::size_t limit = spec_.has_tail() ? produced_ + kChunk
                                             : std::min(produced_ + kChunk, spec_.prefix.size());
  for (; produced_ < limit; ++produced_) {
    const std::size_t index = mapping_ ? mapping_->origin(produced_) : produced_;
    buffer_.push_back({index, spec_.value(produced_)});
  }
}

std::optional<Term> SpecSource::next() {
  if (buffer_.empty()) refill();
  if (buffer_.empty()) return std::nullopt;
  Term t = buffer_.front();
  buffer_.pop_front();
  return t;
}

double solve_a(double sigma, double d1, double d2) {
  auto in_unit = [](double x) { return x >= -kBoundSlack && x <= 1.0 + kBoundSlack; };
  if (!in_unit(sigma) || !in_unit(d1) || !in_unit(d2)) {
    throw InvalidInput("solve_a: sigma, d1, d2 must lie in [0,1]");
  }
  if (std::max(d1, d2) > sigma + kBoundSlack) {
    std::ostringstream os;
    os.precision(17);
    os << "solve_a: max(d1,d2) = " << std::max(d1, d2) << " exceeds sigma = " << sigma;
    throw InvalidInput(os.str());
  }
  if (sigma > d1 + d2 + kBoundSlack) {
    std::ostringstream os;
    os.precision(17);
    os << "solve_a: sigma = " << sigma << " exceeds d1 + d2 = " << d1 + d2;
    throw InvalidInput(os.str());
  }
  const double denom = 2.0 * sigma - d1 - d2;
  if (!(denom > 0.0)) return sigma;  // d1 = d2 = sigma: any a in [0, sigma] works
  const double a = sigma * (sigma - d2) / denom;
  // Keep every table entry a, sigma-a, d1-a, d2-sigma+a nonnegative.
  const double lo = std::max(0.0, sigma - d2);
  const double hi = std::min(sigma, d1);
  return lo <= hi ? std::clamp(a, lo, hi) : a;
}

TetrisStream::TetrisStream(std::unique_ptr<TermSource> source)
    : source_(std::move(source)), cum_{0.0} {
  if (!source_) throw InvalidInput("TetrisStream needs a term source");
}

bool TetrisStream::reaches(double partial, std::size_t n) const {
  const double target = static_cast<double>(n);
  return partial >= target - 1e-13 * target;
}

void TetrisStream::pull_term() {
  if (raw_.size() >= kMaxTerms) {
    throw InvalidInput("tetris: row " + std::to_string(m_.size() + 1) + " needs more than " +
                       std::to_string(kMaxTerms) + " terms; the diagonal diverges too slowly");
  }
  auto t = source_->next();
  if (!t) {
    throw NeedsMoreTerms("tetris: source exhausted after " + std::to_string(raw_.size()) +
                         " terms");
  }
  const bool first = raw_.empty();
  if (first ? !(t->value >= 0.0 && t->value < 1.0) : !(t->value >= 0.0 && t->value <= 0.5)) {
    std::ostringstream os;
    os << "tetris: term " << raw_.size() + 1 << " (input index " << t->index << ") = " << t->value
       << (first ? " must lie in [0,1)" : " must lie in [0,1/2]");
    throw InvalidInput(os.str());
  }
  raw_.push_back(*t);
  raw_sum_.add(t->value);
  raw_cum_.push_back(raw_sum_.value());
}

void TetrisStream::reorder(std::size_t upto) {
  while (m_.size() < upto) {
    const std::size_t n = m_.size() + 1;
    const std::size_t prev_m = n == 1 ? 0 : m_.back();

    // m_n = min{k : sum_{i<=k} d_i >= n}, in source order.
    std::size_t mn = prev_m + 1;
    for (;; ++mn) {
      while (raw_.size() < mn) pull_term();
      if (reaches(raw_cum_[mn - 1], n)) break;
    }

    // Block (prev_m, m_n] in nonincreasing order.
    std::vector<Term> block(raw_.begin() + static_cast<std::ptrdiff_t>(prev_m),
                            raw_.begin() + static_cast<std::ptrdiff_t>(mn));
    std::stable_sort(block.begin(), block.end(),
                     [](const Term& x, const Term& y) { return x.value > y.value; });
    CompensatedSum running;
    running.add(cum_.back());
    for (const Term& t : block) {
      ordered_.push_back(t);
      running.add(t.value);
      cum_.push_back(running.value());
    }

    // k_n on the reordered sequence; m_n is an upper bound.
    std::size_t kn = mn;
    for (std::size_t k = prev_m + 1; k <= mn; ++k) {
      if (reaches(cum_[k], n)) {
        kn = k;
        break;
      }
    }
    if (kn < prev_m + 2) {
      std::ostringstream os;
      os << "tetris: threshold k_" << n << " = " << kn << " violates m_{n-1}+2 = " << prev_m + 2;
      throw InvariantViolation(os.str());
    }

    const double sigma = static_cast<double>(n) - cum_[kn - 2];
    const double d1 = ordered_[kn - 2].value;
    const double d2 = ordered_[kn - 1].value;
    if (d1 < d2) throw InvariantViolation("tetris: reordering left d_{pi(k-1)} < d_{pi(k)}");
    if (sigma < std::max(d1, d2) - kBoundSlack || sigma > d1 + d2 + kBoundSlack) {
      std::ostringstream os;
      os.precision(17);
      os << "tetris: sigma_" << n << " = " << sigma << " outside [" << std::max(d1, d2) << ", "
         << d1 + d2 << "]";
      throw InvariantViolation(os.str());
    }
    m_.push_back(mn);
    k_.push_back(kn);
    sigma_.push_back(sigma);
    a_.push_back(solve_a(std::clamp(sigma, 0.0, 1.0), d1, d2));
  }
}

const SparseRow& TetrisStream::next_row() {
  const std::size_t n = rows_.size() + 1;
  reorder(n);
  const std::size_t kn = k_[n - 1];
  const double sigma = sigma_[n - 1];
  const double an = a_[n - 1];

  SparseRow row;
  row.n = n;
  std::size_t first_plain = 1;
  if (n == 1) {
    row.lo = 1;
  } else {
    const std::size_t kp = k_[n - 2];
    const double sp = sigma_[n - 2];
    const double ap = a_[n - 2];
    row.lo = kp - 1;
    row.values.push_back(sqrt_clamped(ordered_[kp - 2].value - ap, "d - a", n));
    row.values.push_back(sqrt_clamped(ordered_[kp - 1].value - sp + ap, "d - sigma + a", n));
    first_plain = kp + 1;
  }
  for (std::size_t p = first_plain; p + 2 <= kn; ++p) {
    row.values.push_back(std::sqrt(ordered_[p - 1].value));
  }
  row.values.push_back(sqrt_clamped(an, "a", n));
  row.values.push_back(-sqrt_clamped(sigma - an, "sigma - a", n));
  for (std::size_t p = row.lo; p <= row.hi(); ++p) row.indices.push_back(ordered_[p - 1].index);

  double norm_sq = 0.0;
  for (double v : row.values) norm_sq += v * v;
  if (std::abs(norm_sq - 1.0) > kBoundSlack) {
    std::ostringstream os;
    os.precision(17);
    os << "tetris: row " << n << " has squared norm " << norm_sq;
    throw InvariantViolation(os.str());
  }
  rows_.push_back(std::move(row));
  return rows_.back();
}

CompletedColumns TetrisStream::completed_columns() const {
  CompletedColumns out;
  if (rows_.empty()) return out;
  const std::size_t kr = k_[rows_.size() - 1];
  out.count = kr >= 2 ? kr - 2 : 0;
  out.norms_sq.assign(out.count, 0.0);
  for (const SparseRow& row : rows_) {
    for (std::size_t p = row.lo; p <= row.hi() && p <= out.count; ++p) {
      const double v = row.values[p - row.lo];
      out.norms_sq[p - 1] += v * v;
    }
  }
  for (std::size_t p = 1; p <= out.count; ++p) {
    out.targets.push_back(ordered_[p - 1].value);
    out.indices.push_back(ordered_[p - 1].index);
  }
  return out;
}

ProjectionPrefix TetrisStream::projection_prefix(std::size_t rows) const {
  if (rows > rows_.size()) {
    throw InvalidInput("projection_prefix: only " + std::to_string(rows_.size()) +
                       " rows have been emitted");
  }
  const std::size_t dim = rows == 0 ? 0 : k_[rows - 1];
  SymmetricMatrix by_position(dim);
  for (std::size_t r = 0; r < rows; ++r) {
    const SparseRow& row = rows_[r];
    for (std::size_t x = 0; x < row.values.size(); ++x) {
      for (std::size_t y = x; y < row.values.size(); ++y) {
        const std::size_t p = row.lo - 1 + x, q = row.lo - 1 + y;
        by_position.set(p, q, by_position(p, q) + row.values[x] * row.values[y]);
      }
    }
  }
  std::vector<std::size_t> order(dim);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return ordered_[x].index < ordered_[y].index;
  });
  ProjectionPrefix out{by_position.permuted(order), {}};
  for (auto p : order) out.indices.push_back(ordered_[p].index);
  return out;
}

}  // namespace carpenter
