#include "carpenter/carpenter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "carpenter/errors.hpp"
#include "carpenter/horn.hpp"

namespace carpenter {

namespace {

std::string describe(const KadisonReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "no projection has this diagonal: a = " << r.a << ", b = " << r.b;
  if (auto diff = r.difference()) os << ", a - b = " << *diff << " is not an integer";
  return os.str();
}

void check_unit_interval(std::span<const double> d) {
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(d[i] >= 0.0 && d[i] <= 1.0)) {
      throw InvalidInput("entry " + std::to_string(i) + " outside [0,1]");
    }
  }
}

std::vector<double> pick(std::span<const double> d, std::span<const std::size_t> idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(d[i]);
  return out;
}

// Copies `block` into `target` at coordinates `coords`.
void place_block(SymmetricMatrix& target, const SymmetricMatrix& block,
                 std::span<const std::size_t> coords) {
  for (std::size_t a = 0; a < coords.size(); ++a) {
    for (std::size_t b = a; b < coords.size(); ++b) target.set(coords[a], coords[b], block(a, b));
  }
}

SymmetricMatrix shortcut(std::span<const double> d) {
  const double total = std::accumulate(d.begin(), d.end(), 0.0);
  if (is_near_integer(total)) return build_summable(d);
  return build_cosummable(d);
}

}  // namespace

Infeasible::Infeasible(KadisonReport report)
    : std::runtime_error(describe(report)), report_(std::move(report)) {}

SymmetricMatrix build_summable(std::span<const double> d) {
  check_unit_interval(d);
  CompensatedSum sum;
  for (double x : d) sum.add(x);
  const double total = sum.value();
  if (!is_near_integer(total)) {
    std::ostringstream os;
    os.precision(17);
    os << "build_summable: sum of the diagonal is " << total << ", not an integer";
    throw InvalidInput(os.str());
  }
  const auto rank = static_cast<std::size_t>(std::llround(total));
  if (rank == 0) return SymmetricMatrix(d.size());

  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] > 0.0) support.push_back(i);
  }
  MajorizationInput input{std::vector<double>(rank, 1.0), pick(d, support)};
  const SymmetricMatrix core = horn_build(input, kIntegralityTolerance);
  return core.embedded(d.size(), support);
}

SymmetricMatrix build_cosummable(std::span<const double> d) {
  check_unit_interval(d);
  std::vector<double> flipped(d.size());
  std::transform(d.begin(), d.end(), flipped.begin(), [](double x) { return 1.0 - x; });
  return complement(build_summable(flipped));
}

CaseOneResult build_case1(std::span<const double> d) {
  check_unit_interval(d);
  DiagonalSpec spec{{d.begin(), d.end()}, {}};
  const KadisonReport report = classify(spec);
  if (report.verdict != Verdict::CaseI) throw Infeasible(report);

  CaseOneResult out;
  auto fallback = [&](std::string why) {
    out.matrix = shortcut(d);
    out.notice = std::move(why);
    return out;
  };

  std::vector<std::size_t> j0, j1;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] == 0.0 || d[i] == 1.0) continue;
    (d[i] < 0.5 ? j0 : j1).push_back(i);
  }
  if (j0.empty()) return fallback("no entries below 1/2; co-summable shortcut");
  if (j1.size() < 2) return fallback("fewer than two entries in [1/2,1); summable shortcut");

  CaseOneTrace trace;
  trace.i1 = *std::min_element(j1.begin(), j1.end(),
                               [&](std::size_t x, std::size_t y) { return d[x] < d[y]; });
  const double cap = 1.0 - d[trace.i1];

  // J0': largest suffix of J0 (by index) with sum < 1 - d_{i1}.
  double j0p_sum = 0.0;
  for (auto it = j0.rbegin(); it != j0.rend(); ++it) {
    if (j0p_sum + d[*it] >= cap) break;
    j0p_sum += d[*it];
    trace.j0_prime.push_back(*it);
  }
  std::reverse(trace.j0_prime.begin(), trace.j0_prime.end());
  if (trace.j0_prime.empty()) return fallback("every entry of J0 is at least 1 - d_i1");

  auto i2 = std::find_if(j1.begin(), j1.end(), [&](std::size_t i) {
    return d[i] > d[trace.i1] && d[i] + j0p_sum >= 1.0;
  });
  if (i2 == j1.end()) {
    return fallback("no i2 with d_i2 > d_i1 and d_i2 + sum(J0') >= 1; shortcut");
  }
  trace.i2 = *i2;
  trace.eta0 = std::max(0.0, j0p_sum - (1.0 - d[trace.i2]));

  // I0: shortest prefix of J0' with sum > eta0.
  double i0_sum = 0.0;
  for (auto i : trace.j0_prime) {
    trace.i0.push_back(i);
    i0_sum += d[i];
    if (i0_sum > trace.eta0) break;
  }

  const std::size_t high[] = {trace.i1};
  trace.d_tilde =
      ops_shift({std::vector<double>(d.begin(), d.end()), trace.i0, {trace.i1}, trace.eta0});

  std::vector<std::size_t> first = trace.j0_prime;
  first.push_back(trace.i2);
  std::sort(first.begin(), first.end());
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!std::binary_search(first.begin(), first.end(), i)) rest.push_back(i);
  }

  SymmetricMatrix direct_sum(d.size());
  place_block(direct_sum, build_summable(pick(trace.d_tilde, first)), first);
  place_block(direct_sum, build_cosummable(pick(trace.d_tilde, rest)), rest);

  auto restored = ops_restore(direct_sum, trace.d_tilde, d, trace.i0, high);
  out.matrix = std::move(restored.matrix);
  out.plan = std::move(restored.plan);
  out.trace = std::move(trace);
  return out;
}

BlockPartitioner::BlockPartitioner(DiagonalSpec core, StrippedSpec mapping)
    : source_(core, mapping) {
  std::vector<Term> heads;
  for (std::size_t k = 0; k < core.prefix.size(); ++k) {
    if (core.prefix[k] > 0.5) heads.push_back({mapping.origin(k), core.prefix[k]});
  }
  if (const auto* ct = std::get_if<ConstantTail>(&core.tail); ct && ct->c > 0.5) {
    throw InvalidInput("block partition: infinitely many entries above 1/2");
  }
  if (const auto* pt = std::get_if<PowerTail>(&core.tail)) {
    if (pt->complement) throw InvalidInput("block partition: infinitely many entries above 1/2");
    for (std::size_t pos = 1; pt->term(pos) > 0.5; ++pos) {
      const std::size_t k = core.prefix.size() + pos - 1;
      heads.push_back({mapping.origin(k), pt->term(pos)});
    }
  }
  blocks_.resize(std::max<std::size_t>(1, heads.size()));
  for (std::size_t b = 0; b < heads.size(); ++b) {
    blocks_[b].queue.push_back(heads[b]);
    blocks_[b].sum = heads[b].value;
    reserved_.push_back(heads[b].index);
  }
  std::sort(reserved_.begin(), reserved_.end());
}

bool BlockPartitioner::materialize_one() {
  const auto t = source_.next();
  if (!t) return false;
  if (std::binary_search(reserved_.begin(), reserved_.end(), t->index)) return true;
  auto lightest = std::min_element(blocks_.begin(), blocks_.end(),
                                   [](const Block& x, const Block& y) { return x.sum < y.sum; });
  lightest->queue.push_back(*t);
  lightest->sum += t->value;
  return true;
}

std::optional<Term> BlockPartitioner::pull(std::size_t block) {
  std::lock_guard lock(mutex_);
  Block& b = blocks_.at(block);
  while (b.queue.empty()) {
    if (!materialize_one()) return std::nullopt;
  }
  Term t = b.queue.front();
  b.queue.pop_front();
  b.members.push_back(t.index);
  return t;
}

std::vector<std::size_t> BlockPartitioner::members(std::size_t block) const {
  std::lock_guard lock(mutex_);
  return blocks_.at(block).members;
}

namespace {

class BlockSource : public TermSource {
 public:
  BlockSource(std::shared_ptr<BlockPartitioner> partition, std::size_t block)
      : partition_(std::move(partition)), block_(block) {}
  std::optional<Term> next() override { return partition_->pull(block_); }

 private:
  std::shared_ptr<BlockPartitioner> partition_;
  std::size_t block_;
};

// Sum of d_i over d_i <= 1/2, as an extended real.
Extended low_mass(const DiagonalSpec& spec) {
  CompensatedSum s;
  for (double d : spec.prefix) {
    if (d <= 0.5) s.add(d);
  }
  if (const auto* ct = std::get_if<ConstantTail>(&spec.tail)) {
    if (ct->c > 0.0 && ct->c <= 0.5) return Extended::infinity();
  } else if (const auto* pt = std::get_if<PowerTail>(&spec.tail)) {
    if (!pt->complement && pt->p <= 1.0) return Extended::infinity();
    // Otherwise only finitely many tail terms are <= 1/2 or the series converges.
  }
  return Extended(s.value());
}

}  // namespace

CaseTwoPlan build_case2(const DiagonalSpec& spec, const StrippedSpec& mapping) {
  if (low_mass(spec).is_infinite()) {
    CaseTwoPlan plan;
    plan.partition = std::make_shared<BlockPartitioner>(spec, mapping);
    for (std::size_t b = 0; b < plan.partition->block_count(); ++b) {
      plan.streams.push_back(
          std::make_unique<TetrisStream>(std::make_unique<BlockSource>(plan.partition, b)));
    }
    return plan;
  }
  const KadisonReport report = classify(spec);
  if (report.verdict != Verdict::CaseII || report.b.is_finite()) {
    throw InvalidInput("build_case2: neither sum_{d<=1/2} d nor b diverges");
  }
  CaseTwoPlan plan = build_case2(complement(spec), mapping);
  plan.complemented = !plan.complemented;
  return plan;
}

CaseTwoPlan build_case2(const DiagonalSpec& spec) {
  const StrippedSpec stripped = strip_trivial(spec);
  return build_case2(stripped.core, stripped);
}

namespace {

constexpr std::size_t kMaxMaterialized = 2'000'000;
constexpr std::size_t kMaxDenseDimension = 4096;

BuildResult build_finite(const DiagonalSpec& spec, const StrippedSpec& stripped,
                         const BuildOptions& options, BuildResult out) {
  const std::vector<double>& d = spec.prefix;
  if (options.pipeline == BuildOptions::Pipeline::Full) {
    auto r = build_case1(d);
    out.matrix = std::move(r.matrix);
    out.plan = std::move(r.plan);
    out.notice = std::move(r.notice);
  } else {
    out.matrix = shortcut(d);
  }
  if (stripped.num_zeros.unbounded) {
    out.notice += (out.notice.empty() ? "" : "; ");
    out.notice += "zero tail realized by the zero operator; matrix covers the prefix";
  }
  if (stripped.num_ones.unbounded) {
    out.notice += (out.notice.empty() ? "" : "; ");
    out.notice += "unit tail realized by the identity; matrix covers the prefix";
  }
  out.indices.resize(d.size());
  std::iota(out.indices.begin(), out.indices.end(), 0);
  out.target = d;
  out.exact.assign(d.size(), 1);
  out.report = check_projection(out.matrix, d);
  return out;
}

// Case (i) with an infinite (power) tail: entries below epsilon become 0,
// entries above 1-epsilon become 1, and the dropped mass is spread over the
// remaining entries so their sum is an integer.
BuildResult build_approximate(const DiagonalSpec& spec, const BuildOptions& options,
                              BuildResult out) {
  const double eps = options.epsilon;
  if (!(eps > 0.0 && eps < 0.5)) throw InvalidInput("epsilon must lie in (0, 1/2)");
  const auto* pt = std::get_if<PowerTail>(&spec.tail);
  if (pt == nullptr) throw InvalidInput("approximate mode needs a power tail");

  std::vector<double> values = spec.prefix;
  for (std::size_t pos = 1;; ++pos) {
    const double v = pt->term(pos);
    const bool negligible = pt->complement ? v > 1.0 - eps : v < eps;
    if (negligible) break;
    if (values.size() >= kMaxMaterialized) {
      throw InvalidInput("approximate mode: epsilon too small, more than 2e6 terms needed");
    }
    values.push_back(v);
  }

  std::vector<double> w(values.size());
  std::vector<std::size_t> kept;
  CompensatedSum a_kept, b_kept, kept_sum;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (v < eps) {
      w[i] = 0.0;
    } else if (v > 1.0 - eps) {
      w[i] = 1.0;
    } else {
      w[i] = v;
      kept.push_back(i);
      kept_sum.add(v);
      if (v < 0.5) {
        a_kept.add(v);
      } else {
        b_kept.add(1.0 - v);
      }
    }
  }
  const double a = out.classification.a.value();
  const double b = out.classification.b.value();
  const double moved = (a - b) - (a_kept.value() - b_kept.value());
  const double goal = std::round(kept_sum.value() + moved);
  const double delta = goal - kept_sum.value();
  double room = 0.0, mass = kept_sum.value();
  for (auto i : kept) room += 1.0 - w[i];
  if (delta > 0.0) {
    if (delta > room) throw InvalidInput("approximate mode: dropped mass exceeds headroom");
    for (auto i : kept) w[i] += delta * (1.0 - values[i]) / room;
  } else if (delta < 0.0) {
    if (-delta > mass) throw InvalidInput("approximate mode: dropped mass exceeds kept mass");
    for (auto i : kept) w[i] += delta * values[i] / mass;
  }

  out.approximate = true;
  out.approximation_error =
      std::max(0.0, a - a_kept.value()) + std::max(0.0, b - b_kept.value());
  out.matrix = build_summable(w);
  out.indices.resize(values.size());
  std::iota(out.indices.begin(), out.indices.end(), 0);
  out.target = values;
  out.exact.assign(values.size(), 1);
  out.report = check_projection(out.matrix.view(), values, kProjectionTolerance, {},
                                out.approximation_error + kProjectionTolerance);
  std::ostringstream os;
  os << "approximate: " << values.size() << " terms materialized, epsilon " << eps;
  out.notice = os.str();
  return out;
}

BuildResult build_streamed(const DiagonalSpec& spec, const StrippedSpec& stripped,
                           const BuildOptions& options, BuildResult out) {
  auto plan = std::make_shared<CaseTwoPlan>(build_case2(stripped.core, stripped));

  struct Piece {
    ProjectionPrefix prefix;
    std::vector<std::size_t> complete;
  };
  std::vector<Piece> pieces;
  std::size_t dimension = 0;
  for (auto& stream : plan->streams) {
    for (std::size_t r = 0; r < options.truncation_rows; ++r) stream->next_row();
    dimension += stream->k(stream->rows_emitted());
    if (dimension > kMaxDenseDimension) {
      throw InvalidInput("truncated matrix would exceed dimension " +
                         std::to_string(kMaxDenseDimension) +
                         "; lower --rows or use the stream command");
    }
    Piece piece{stream->projection_prefix(stream->rows_emitted()), {}};
    piece.complete = stream->completed_columns().indices;
    std::sort(piece.complete.begin(), piece.complete.end());
    if (plan->complemented) piece.prefix.matrix = complement(piece.prefix.matrix);
    pieces.push_back(std::move(piece));
  }

  // Coordinates: every streamed column plus the exact 0/1 prefix entries.
  std::vector<std::size_t> coords;
  for (const auto& piece : pieces) {
    coords.insert(coords.end(), piece.prefix.indices.begin(), piece.prefix.indices.end());
  }
  for (std::size_t i = 0; i < spec.prefix.size(); ++i) {
    if (spec.prefix[i] == 0.0 || spec.prefix[i] == 1.0) coords.push_back(i);
  }
  std::sort(coords.begin(), coords.end());
  auto slot = [&](std::size_t index) {
    return static_cast<std::size_t>(std::lower_bound(coords.begin(), coords.end(), index) -
                                    coords.begin());
  };

  out.matrix = SymmetricMatrix(coords.size());
  out.exact.assign(coords.size(), 0);
  for (const auto& piece : pieces) {
    std::vector<std::size_t> at;
    for (auto index : piece.prefix.indices) at.push_back(slot(index));
    place_block(out.matrix, piece.prefix.matrix, at);
    for (auto index : piece.complete) out.exact[slot(index)] = 1;
  }
  for (std::size_t i = 0; i < spec.prefix.size(); ++i) {
    if (spec.prefix[i] == 1.0) out.matrix.set(slot(i), slot(i), 1.0);
    if (spec.prefix[i] == 0.0 || spec.prefix[i] == 1.0) out.exact[slot(i)] = 1;
  }
  out.indices = coords;
  for (auto index : coords) out.target.push_back(spec.value(index));
  out.streamed = true;
  out.streams = plan;
  out.report = check_projection(out.matrix.view(), out.target, kProjectionTolerance, out.exact);
  std::ostringstream os;
  os << plan->streams.size() << " block(s), " << options.truncation_rows << " rows each"
     << (plan->complemented ? ", complement route" : "");
  out.notice = os.str();
  return out;
}

}  // namespace

BuildResult build(const DiagonalSpec& spec, const BuildOptions& options) {
  spec.validate();
  BuildResult out;
  out.classification = classify(spec);
  switch (out.classification.verdict) {
    case Verdict::Infeasible:
      throw Infeasible(out.classification);
    case Verdict::CaseII:
      return build_streamed(spec, strip_trivial(spec), options, std::move(out));
    case Verdict::CaseI:
      break;
  }
  const StrippedSpec stripped = strip_trivial(spec);
  if (stripped.core.has_tail()) return build_approximate(spec, options, std::move(out));
  return build_finite(spec, stripped, options, std::move(out));
}

}  // namespace carpenter
