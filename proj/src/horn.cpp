#include "carpenter/horn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "carpenter/errors.hpp"
#include "carpenter/extended.hpp"

namespace carpenter {

namespace {

std::vector<double> sorted_desc(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

// Sorted-descending `values` majorized by `lambdas` padded with zeros, up to tol.
bool head_majorized(std::vector<double> values, std::span<const double> lambdas, double tol) {
  std::sort(values.begin(), values.end(), std::greater<>());
  CompensatedSum lhs, rhs;
  for (std::size_t n = 0; n < values.size(); ++n) {
    lhs.add(values[n]);
    if (n < lambdas.size()) rhs.add(lambdas[n]);
    if (lhs.value() > rhs.value() + tol) return false;
  }
  return true;
}

void place_outer_product(SymmetricMatrix& m, std::span<const std::size_t> coords,
                         std::span<const double> values) {
  for (std::size_t a = 0; a < coords.size(); ++a) {
    m.set(coords[a], coords[a], values[a]);
    const double ra = std::sqrt(values[a]);
    for (std::size_t b = a + 1; b < coords.size(); ++b) {
      m.set(coords[a], coords[b], ra * std::sqrt(values[b]));
    }
  }
}

struct Repair {
  // Single-entry transfer: head coordinate and mixing weight alpha.
  std::size_t head = 0;
  double alpha = 1.0;
  // Water-filled transfer: increments on several head coordinates.
  std::vector<std::size_t> raised;
  std::size_t tail = 0;
  bool water_filled = false;
  std::vector<double> targets;  // water-filled: diagonal before this peel
};

}  // namespace

MajorizationCheck check_majorization(const MajorizationInput& input, double tol) {
  for (double l : input.lambdas) {
    if (!(l > 0.0) || !std::isfinite(l)) throw InvalidInput("eigenvalues must be positive");
  }
  for (double d : input.diag) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw InvalidInput("diagonal must be nonnegative");
  }
  if (input.diag.size() < input.lambdas.size()) {
    throw InvalidInput("diagonal length M must be at least the rank N");
  }
  const auto lambdas = sorted_desc(input.lambdas);
  const auto diag = sorted_desc(input.diag);
  MajorizationCheck out;
  CompensatedSum dsum, lsum;
  for (std::size_t n = 0; n < lambdas.size(); ++n) {
    dsum.add(diag[n]);
    lsum.add(lambdas[n]);
    if (dsum.value() > lsum.value() + tol) {
      out.first_violation = n + 1;
      out.excess = dsum.value() - lsum.value();
      return out;
    }
  }
  for (std::size_t n = lambdas.size(); n < diag.size(); ++n) dsum.add(diag[n]);
  const double gap = dsum.value() - lsum.value();
  if (std::abs(gap) > tol) {
    out.first_violation = lambdas.size() + 1;
    out.excess = gap;
    return out;
  }
  out.ok = true;
  return out;
}

SymmetricMatrix rank_one(std::span<const double> diag, double lambda) {
  CompensatedSum total;
  bool nonzero = false;
  for (double d : diag) {
    if (!(d >= 0.0)) throw InvalidInput("rank_one: diagonal must be nonnegative");
    nonzero = nonzero || d > 0.0;
    total.add(d);
  }
  if (!nonzero) throw InvalidInput("rank_one: diagonal must be nonzero");
  if (std::abs(total.value() - lambda) > kMajorizationTolerance) {
    std::ostringstream os;
    os << "rank_one: diagonal sums to " << total.value() << ", eigenvalue is " << lambda;
    throw InvalidInput(os.str());
  }
  SymmetricMatrix s(diag.size());
  std::vector<std::size_t> coords(diag.size());
  std::iota(coords.begin(), coords.end(), 0);
  place_outer_product(s, coords, diag);
  return s;
}

SymmetricMatrix convex_mix_unitary(const SymmetricMatrix& e, std::size_t i, std::size_t j,
                                   double alpha) {
  if (i >= e.size() || j >= e.size() || i == j) {
    throw InvalidInput("convex_mix_unitary needs two distinct in-range coordinates");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidInput("alpha must lie in [0,1]");
  if (std::abs(e(i, j)) > 1e-12) {
    throw InvalidInput("convex_mix_unitary: coordinates are coupled (E_ij != 0); "
                       "use rotate_to_diagonal");
  }
  SymmetricMatrix out = e;
  if (alpha != 1.0) apply_move(out, {i, j, MoveKind::ConvexMix, alpha});
  return out;
}

double mixing_weight(double head, double tail, double delta) {
  const double num = head - tail + delta;
  const double den = head - tail + 2.0 * delta;
  if (den <= 0.0) return 1.0;
  return std::clamp(num / den, 0.0, 1.0);
}

HornBuild horn_build_traced(const MajorizationInput& input, double tol) {
  const auto check = check_majorization(input, tol);
  if (!check) {
    std::ostringstream os;
    os << "majorization fails at n = " << check.first_violation.value_or(0) << " (excess "
       << check.excess << ")";
    throw InvalidInput(os.str());
  }
  const std::size_t m = input.diag.size();
  const auto lambdas = sorted_desc(input.lambdas);

  // cur[k]: current diagonal target at original coordinate k.
  std::vector<double> cur = input.diag;
  std::vector<std::size_t> head(m);
  std::iota(head.begin(), head.end(), 0);

  HornBuild out;
  out.blocks = SymmetricMatrix(m);
  std::vector<Repair> repairs;

  const double scale = std::max(1.0, std::accumulate(lambdas.begin(), lambdas.end(), 0.0));
  const double hit_slack = 8.0 * std::numeric_limits<double>::epsilon() * scale;

  for (std::size_t rank = lambdas.size(); rank > 0; --rank) {
    std::stable_sort(head.begin(), head.end(),
                     [&](std::size_t x, std::size_t y) { return cur[x] > cur[y]; });
    if (rank == 1) {
      std::vector<double> values(head.size());
      for (std::size_t a = 0; a < head.size(); ++a) values[a] = cur[head[a]];
      place_outer_product(out.blocks, head, values);
      break;
    }
    const double lambda = lambdas[rank - 1];
    // m0 = max{m : sum_{i>=m} d_i >= lambda_N}, found scanning from the end.
    const std::size_t len = head.size();
    CompensatedSum suffix;
    std::size_t m0 = 0;  // 1-based; 0 = not found
    for (std::size_t pos = len; pos > 0; --pos) {
      suffix.add(cur[head[pos - 1]]);
      if (suffix.value() >= lambda - hit_slack) {
        m0 = pos;
        break;
      }
    }
    if (m0 < 2) {
      throw InvariantViolation("horn_build: no room for the remaining eigenvalues (m0 < 2)");
    }
    const double delta = std::max(0.0, suffix.value() - lambda);
    out.m0.push_back(m0);
    out.delta.push_back(delta);

    const std::size_t tail_coord = head[m0 - 1];
    const double tail_before = cur[tail_coord];
    std::vector<std::size_t> block(head.begin() + static_cast<std::ptrdiff_t>(m0 - 1), head.end());
    std::vector<double> values(block.size());
    for (std::size_t a = 0; a < block.size(); ++a) values[a] = cur[block[a]];
    values[0] = std::max(0.0, tail_before - delta);
    place_outer_product(out.blocks, block, values);
    head.resize(m0 - 1);

    if (delta > 0.0) {
      const std::span<const double> remaining(lambdas.data(), rank - 1);
      const std::size_t last = head.back();
      std::vector<double> head_values(head.size());
      for (std::size_t a = 0; a < head.size(); ++a) head_values[a] = cur[head[a]];
      head_values.back() += delta;

      Repair rep;
      rep.tail = tail_coord;
      if (head_majorized(head_values, remaining, 1e-13)) {
        rep.head = last;
        rep.alpha = mixing_weight(cur[last], tail_before, delta);
        cur[last] += delta;
      } else {
        // Water-fill delta onto the smallest head entries instead.
        ++out.water_filled_peels;
        rep.water_filled = true;
        rep.targets = cur;
        rep.targets[tail_coord] = tail_before;
        const std::size_t h = head.size();
        double level = 0.0;
        CompensatedSum bottom;
        std::size_t r = 1;
        for (; r <= h; ++r) {
          bottom.add(cur[head[h - r]]);
          level = (bottom.value() + delta) / static_cast<double>(r);
          if (r == h || level <= cur[head[h - r - 1]]) break;
        }
        for (std::size_t a = h - r; a < h; ++a) {
          if (level > cur[head[a]]) {
            rep.raised.push_back(head[a]);
            cur[head[a]] = level;
          }
        }
      }
      repairs.push_back(std::move(rep));
    }
    cur[tail_coord] = values[0];
  }

  // Undo the transfers innermost first; each rotation sees exactly the direct
  // sum it would see in the recursive formulation.
  out.matrix = out.blocks;
  for (auto it = repairs.rbegin(); it != repairs.rend(); ++it) {
    if (!it->water_filled) {
      if (it->alpha != 1.0) {
        out.matrix = convex_mix_unitary(out.matrix, it->head, it->tail, it->alpha);
        out.plan.moves.push_back({it->head, it->tail, MoveKind::ConvexMix, it->alpha});
      }
      continue;
    }
    const auto now = out.matrix.diagonal();
    const std::size_t low[] = {it->tail};
    auto restored = ops_restore(out.matrix, now, it->targets, low, it->raised);
    out.matrix = std::move(restored.matrix);
    out.plan.append(restored.plan);
  }
  return out;
}

SymmetricMatrix horn_build(const MajorizationInput& input, double tol) {
  return horn_build_traced(input, tol).matrix;
}

}  // namespace carpenter
