#pragma once

#include <cstddef>
#include <deque>
#include <memory>
#include <optional>
#include <vector>

#include "carpenter/diagonal.hpp"
#include "carpenter/matrix.hpp"

namespace carpenter {

/// A diagonal value together with its 0-based index in the caller's input.
struct Term {
  std::size_t index = 0;
  double value = 0.0;
};

/// Pull-based sequence of diagonal terms. Returns nullopt when exhausted.
class TermSource {
 public:
  virtual ~TermSource() = default;
  virtual std::optional<Term> next() = 0;
};

/// Finite list of terms; indices are list positions unless given.
class ListSource : public TermSource {
 public:
  explicit ListSource(std::vector<double> values);
  explicit ListSource(std::vector<Term> terms);
  std::optional<Term> next() override;

 private:
  std::vector<Term> terms_;
  std::size_t pos_ = 0;
};

/// Terms of a DiagonalSpec: the prefix, then the tail expanded lazily in
/// chunks of kChunk terms. `origin` maps a spec index to the reported index.
class SpecSource : public TermSource {
 public:
  static constexpr std::size_t kChunk = 1024;

  explicit SpecSource(DiagonalSpec spec);
  SpecSource(DiagonalSpec spec, StrippedSpec mapping);
  std::optional<Term> next() override;

 private:
  void refill();

  DiagonalSpec spec_;
  std::optional<StrippedSpec> mapping_;
  std::deque<Term> buffer_;
  std::size_t produced_ = 0;
};

/// Finitely supported row of the streamed frame. Columns are positions in the
/// reordered sequence, 1-based: the row covers [lo, lo + values.size() - 1].
struct SparseRow {
  std::size_t n = 0;
  std::size_t lo = 1;
  std::vector<double> values;
  /// Input index of each covered column.
  std::vector<std::size_t> indices;

  std::size_t hi() const { return lo + values.size() - 1; }
};

/// Entry a of the 2x2 transfer table. Requires
/// max(d1,d2) <= sigma <= d1 + d2 and all values in [0,1] (1e-12 slack).
double solve_a(double sigma, double d1, double d2);

struct CompletedColumns {
  std::size_t count = 0;
  std::vector<double> norms_sq;  // squared column norms, positions 1..count
  std::vector<double> targets;   // d_{pi(i)} for the same positions
  std::vector<std::size_t> indices;
};

struct ProjectionPrefix {
  SymmetricMatrix matrix;
  /// Input index of each coordinate, ascending.
  std::vector<std::size_t> indices;
};

/// Streaming construction of a projection with a prescribed non-summable
/// diagonal d_1 in [0,1), d_i in [0,1/2] for i >= 2. Rows v_n are emitted one
/// at a time; consecutive rows overlap in two columns and are orthogonal.
///
/// Single owner; not thread-safe.
class TetrisStream {
 public:
  /// Upper bound on materialized terms per stream.
  static constexpr std::size_t kMaxTerms = std::size_t{1} << 22;

  explicit TetrisStream(std::unique_ptr<TermSource> source);

  /// Extends the reordering until thresholds m_n, k_n are known for n <= upto.
  /// Throws NeedsMoreTerms if the source is exhausted first, InvalidInput past
  /// kMaxTerms.
  void reorder(std::size_t upto);

  /// Emits v_{rows_emitted()+1}.
  const SparseRow& next_row();

  std::size_t rows_emitted() const { return rows_.size(); }
  const std::vector<SparseRow>& rows() const { return rows_; }

  // 1-based accessors, valid once reorder(n) has run.
  std::size_t m(std::size_t n) const { return m_.at(n - 1); }
  std::size_t k(std::size_t n) const { return k_.at(n - 1); }
  double sigma(std::size_t n) const { return sigma_.at(n - 1); }
  double a(std::size_t n) const { return a_.at(n - 1); }
  std::size_t thresholds_known() const { return k_.size(); }

  /// Value and input index at 1-based reordered position p.
  const Term& at_position(std::size_t p) const { return ordered_.at(p - 1); }
  std::size_t positions_known() const { return ordered_.size(); }

  /// Columns no later row touches (positions 1..k_R - 2) and their norms.
  CompletedColumns completed_columns() const;

  /// sum_{n<=R} v_n v_n^T on positions 1..k_R, coordinates reordered to
  /// ascending input index.
  ProjectionPrefix projection_prefix(std::size_t rows) const;

 private:
  bool reaches(double partial, std::size_t n) const;
  void pull_term();

  std::unique_ptr<TermSource> source_;
  std::vector<Term> raw_;         // source order
  std::vector<double> raw_cum_;   // compensated prefix sums of raw_
  CompensatedSum raw_sum_;
  std::vector<Term> ordered_;     // pi order, complete blocks only
  std::vector<double> cum_;       // prefix sums of ordered_ (cum_[p] = sum of first p)
  std::vector<std::size_t> m_, k_;
  std::vector<double> sigma_, a_;
  std::vector<SparseRow> rows_;
};

}  // namespace carpenter
