#include "carpenter/diagonal.hpp"

#include <cmath>
#include <sstream>

#include "carpenter/errors.hpp"

namespace carpenter {

namespace {

// Terms of a power tail are min(c j^-p, 1) for j = offset+1, offset+2, ...
double raw_power_term(const PowerTail& t, double j) {
  return std::min(t.c * std::pow(j, -t.p), 1.0);
}

// Guards the finite enumerations below (terms >= 1/2 or == 1).
constexpr std::size_t kMaxHeadTerms = 100'000'000;

void check_head_length(std::size_t count) {
  if (count > kMaxHeadTerms) {
    throw InvalidInput("power tail has more than 1e8 terms above 1/2; decay too slow to evaluate");
  }
}

}  // namespace

double PowerTail::term(std::size_t position) const {
  const double x = raw_power_term(*this, static_cast<double>(position + offset));
  return complement ? 1.0 - x : x;
}

double DiagonalSpec::value(std::size_t index) const {
  if (index < prefix.size()) return prefix[index];
  const std::size_t position = index - prefix.size() + 1;
  if (const auto* ct = std::get_if<ConstantTail>(&tail)) return ct->c;
  if (const auto* pt = std::get_if<PowerTail>(&tail)) return pt->term(position);
  throw InvalidInput("index " + std::to_string(index) + " beyond a finite diagonal of length " +
                     std::to_string(prefix.size()));
}

void DiagonalSpec::validate() const {
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    const double d = prefix[i];
    if (!(d >= 0.0 && d <= 1.0)) {
      std::ostringstream os;
      os << "prefix[" << i << "] = " << d << " is outside [0,1]";
      throw InvalidInput(os.str());
    }
  }
  if (const auto* ct = std::get_if<ConstantTail>(&tail)) {
    if (!(ct->c >= 0.0 && ct->c <= 1.0)) throw InvalidInput("constant tail value outside [0,1]");
  } else if (const auto* pt = std::get_if<PowerTail>(&tail)) {
    if (!(pt->c > 0.0 && std::isfinite(pt->c))) throw InvalidInput("power tail needs c > 0");
    if (!(pt->p > 0.0 && std::isfinite(pt->p))) throw InvalidInput("power tail needs p > 0");
  }
}

double power_series_sum(double c, double p, std::size_t first) {
  if (!(p > 1.0)) throw InvalidInput("power_series_sum requires p > 1");
  if (first == 0) first = 1;

  // Direct summation up to N-1, then an Euler-Maclaurin remainder for j >= N.
  // Derivatives of f(x) = c x^-p alternate in sign and decrease in magnitude, so
  // the truncation error is bounded by the first omitted correction term.
  auto derivative = [&](int order, double x) {
    double coeff = c;
    for (int k = 0; k < order; ++k) coeff *= -(p + k);
    return coeff * std::pow(x, -p - order);
  };
  constexpr double kB2 = 1.0 / 6.0, kB4 = -1.0 / 30.0, kB6 = 1.0 / 42.0, kB8 = -1.0 / 30.0;
  constexpr double kF2 = 2.0, kF4 = 24.0, kF6 = 720.0, kF8 = 40320.0;

  CompensatedSum head;
  std::size_t j = first;
  std::size_t n = std::max<std::size_t>(first, 1024);
  for (;;) {
    for (; j < n; ++j) head.add(c * std::pow(static_cast<double>(j), -p));
    const double x = static_cast<double>(n);
    const double bound = std::abs(kB8 / kF8 * derivative(7, x));
    if (bound < 1e-14 || n > (std::size_t{1} << 40)) break;
    n *= 2;
  }
  const double x = static_cast<double>(n);
  const double integral = c * std::pow(x, 1.0 - p) / (p - 1.0);
  const double remainder = integral + 0.5 * c * std::pow(x, -p) - kB2 / kF2 * derivative(1, x) -
                           kB4 / kF4 * derivative(3, x) - kB6 / kF6 * derivative(5, x);
  return head.value() + remainder;
}

TailSums tail_sums(const DiagonalSpec& spec) {
  TailSums out;
  if (const auto* ct = std::get_if<ConstantTail>(&spec.tail)) {
    if (ct->c < 0.5) {
      out.below_half = ct->c == 0.0 ? Extended(0.0) : Extended::infinity();
    } else {
      out.one_minus_above_half = ct->c == 1.0 ? Extended(0.0) : Extended::infinity();
    }
    return out;
  }
  const auto* pt = std::get_if<PowerTail>(&spec.tail);
  if (pt == nullptr) return out;

  // Head: the finitely many raw terms x_j on the "large" side of 1/2. Without
  // complement these are x >= 1/2 and feed b; with complement, 1 - x < 1/2
  // (i.e. x > 1/2) and they feed a.
  CompensatedSum head;
  std::size_t j = pt->offset + 1;
  std::size_t count = 0;
  for (;; ++j, ++count) {
    check_head_length(count);
    const double x = raw_power_term(*pt, static_cast<double>(j));
    const bool large = pt->complement ? (x > 0.5) : (x >= 0.5);
    if (!large) break;
    head.add(1.0 - x);
  }
  // Remaining raw terms x_j, j >= first_small, are all on the small side.
  const Extended series =
      pt->p <= 1.0 ? Extended::infinity() : Extended(power_series_sum(pt->c, pt->p, j));
  if (pt->complement) {
    out.below_half = Extended(head.value());
    out.one_minus_above_half = series;
  } else {
    out.one_minus_above_half = Extended(head.value());
    out.below_half = series;
  }
  return out;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::CaseI:
      return "CaseI";
    case Verdict::CaseII:
      return "CaseII";
    case Verdict::Infeasible:
      return "Infeasible";
  }
  return "?";
}

bool is_near_integer(double x, double tol) { return std::abs(std::round(x) - x) <= tol; }

std::optional<double> KadisonReport::difference() const {
  if (a.is_infinite() || b.is_infinite()) return std::nullopt;
  return a.value() - b.value();
}

namespace {

// Number of leading power-tail terms with raw value exactly 1.
std::size_t leading_saturated_terms(const PowerTail& pt) {
  std::size_t count = 0;
  for (std::size_t j = pt.offset + 1;; ++j, ++count) {
    check_head_length(count);
    if (raw_power_term(pt, static_cast<double>(j)) < 1.0) break;
  }
  return count;
}

}  // namespace

KadisonReport classify(const DiagonalSpec& spec) {
  KadisonReport report;
  CompensatedSum a, b;
  for (double d : spec.prefix) {
    if (d < 0.5) {
      a.add(d);
    } else {
      b.add(1.0 - d);
    }
    if (d == 0.0) ++report.num_zeros.finite;
    if (d == 1.0) ++report.num_ones.finite;
  }
  const TailSums tail = tail_sums(spec);
  report.a = Extended(a.value()) + tail.below_half;
  report.b = Extended(b.value()) + tail.one_minus_above_half;

  if (const auto* ct = std::get_if<ConstantTail>(&spec.tail)) {
    if (ct->c == 0.0) report.num_zeros.unbounded = true;
    if (ct->c == 1.0) report.num_ones.unbounded = true;
  } else if (const auto* pt = std::get_if<PowerTail>(&spec.tail)) {
    const std::size_t saturated = leading_saturated_terms(*pt);
    (pt->complement ? report.num_zeros : report.num_ones).finite += saturated;
  }

  if (report.a.is_infinite() || report.b.is_infinite()) {
    report.verdict = Verdict::CaseII;
  } else if (is_near_integer(report.a.value() - report.b.value())) {
    report.verdict = Verdict::CaseI;
  } else {
    report.verdict = Verdict::Infeasible;
  }
  return report;
}

std::size_t StrippedSpec::origin(std::size_t core_index) const {
  if (core_index < prefix_origin.size()) return prefix_origin[core_index];
  return tail_origin + (core_index - prefix_origin.size());
}

StrippedSpec strip_trivial(const DiagonalSpec& spec) {
  StrippedSpec out;
  for (std::size_t i = 0; i < spec.prefix.size(); ++i) {
    const double d = spec.prefix[i];
    if (d == 0.0) {
      ++out.num_zeros.finite;
    } else if (d == 1.0) {
      ++out.num_ones.finite;
    } else {
      out.core.prefix.push_back(d);
      out.prefix_origin.push_back(i);
    }
  }
  out.tail_origin = spec.prefix.size();
  if (const auto* ct = std::get_if<ConstantTail>(&spec.tail)) {
    if (ct->c == 0.0) {
      out.num_zeros.unbounded = true;
    } else if (ct->c == 1.0) {
      out.num_ones.unbounded = true;
    } else {
      out.core.tail = *ct;
    }
  } else if (const auto* pt = std::get_if<PowerTail>(&spec.tail)) {
    const std::size_t saturated = leading_saturated_terms(*pt);
    (pt->complement ? out.num_zeros : out.num_ones).finite += saturated;
    PowerTail rest = *pt;
    rest.offset += saturated;
    out.core.tail = rest;
    out.tail_origin += saturated;
  }
  return out;
}

DiagonalSpec complement(const DiagonalSpec& spec) {
  DiagonalSpec out;
  out.prefix.reserve(spec.prefix.size());
  for (double d : spec.prefix) out.prefix.push_back(1.0 - d);
  if (const auto* ct = std::get_if<ConstantTail>(&spec.tail)) {
    out.tail = ConstantTail{1.0 - ct->c};
  } else if (const auto* pt = std::get_if<PowerTail>(&spec.tail)) {
    PowerTail flipped = *pt;
    flipped.complement = !pt->complement;
    out.tail = flipped;
  }
  return out;
}

}  // namespace carpenter
