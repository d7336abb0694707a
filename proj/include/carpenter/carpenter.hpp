#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "carpenter/diagonal.hpp"
#include "carpenter/matrix.hpp"
#include "carpenter/moves.hpp"
#include "carpenter/tetris.hpp"
#include "carpenter/verify.hpp"

namespace carpenter {

/// No projection has the requested diagonal. Carries the Kadison witness.
class Infeasible : public std::runtime_error {
 public:
  explicit Infeasible(KadisonReport report);
  const KadisonReport& report() const { return report_; }

 private:
  KadisonReport report_;
};

/// Projection with diagonal d, for finite d with integer sum: Horn's
/// construction with all eigenvalues 1 on the nonzero entries.
SymmetricMatrix build_summable(std::span<const double> d);

/// I - build_summable(1 - d); needs an integer sum of 1 - d.
SymmetricMatrix build_cosummable(std::span<const double> d);

/// Choices made by the case (i) pipeline, all as 0-based indices into d.
struct CaseOneTrace {
  std::size_t i1 = 0;
  std::size_t i2 = 0;
  std::vector<std::size_t> j0_prime;
  std::vector<std::size_t> i0;
  double eta0 = 0.0;
  std::vector<double> d_tilde;
};

struct CaseOneResult {
  SymmetricMatrix matrix;
  MovePlan plan;
  std::optional<CaseOneTrace> trace;  // empty when the shortcut was taken
  std::string notice;                 // why the shortcut was taken
};

/// Case (i) for finite d through the full pipeline: mass transfer between a
/// low block and i1, two summable/co-summable projections, then restoration
/// of the original diagonal by rotations. Falls back to build_summable or
/// build_cosummable when the pipeline's strict selections do not exist.
CaseOneResult build_case1(std::span<const double> d);

/// Hands out the terms of a diagonal to blocks so that each block holds at
/// most one entry above 1/2 (placed first) and every block's sum diverges.
/// Terms are materialized on demand; safe to use from several threads.
class BlockPartitioner {
 public:
  BlockPartitioner(DiagonalSpec core, StrippedSpec mapping);

  std::size_t block_count() const { return blocks_.size(); }
  std::optional<Term> pull(std::size_t block);
  /// Input indices handed to `block` so far.
  std::vector<std::size_t> members(std::size_t block) const;

 private:
  struct Block {
    std::deque<Term> queue;
    std::vector<std::size_t> members;
    double sum = 0.0;
  };
  bool materialize_one();

  mutable std::mutex mutex_;
  SpecSource source_;
  std::vector<std::size_t> reserved_;  // input indices of the entries > 1/2
  std::vector<Block> blocks_;
};

struct CaseTwoPlan {
  std::vector<std::unique_ptr<TetrisStream>> streams;
  std::shared_ptr<BlockPartitioner> partition;
  /// Streams realize 1 - d; the final projection is I - P.
  bool complemented = false;
};

/// Case (ii): partition into blocks, one tetris stream per block.
/// `spec` must be free of exact 0/1 entries (see strip_trivial); `mapping`
/// translates core indices back to input indices.
CaseTwoPlan build_case2(const DiagonalSpec& spec, const StrippedSpec& mapping);
CaseTwoPlan build_case2(const DiagonalSpec& spec);

struct BuildOptions {
  enum class Mode { Exact, Approximate };
  enum class Pipeline { Shortcut, Full };
  Mode mode = Mode::Exact;
  double epsilon = 1e-6;
  std::size_t truncation_rows = 100;
  Pipeline pipeline = Pipeline::Shortcut;
};

struct BuildResult {
  KadisonReport classification;
  SymmetricMatrix matrix;
  /// Input index of each matrix coordinate.
  std::vector<std::size_t> indices;
  /// Requested diagonal value at each coordinate.
  std::vector<double> target;
  /// 1 where the diagonal entry is final (always 1 in finite modes; streamed
  /// columns still touched by future rows are 0).
  std::vector<std::uint8_t> exact;
  VerificationReport report;
  double approximation_error = 0.0;
  bool approximate = false;
  bool streamed = false;
  MovePlan plan;
  std::string notice;
  /// Case (ii) only: the live streams, for further advancement.
  std::shared_ptr<CaseTwoPlan> streams;
};

/// Classifies `spec` and builds a projection realizing it (exactly, approximately
/// for infinite summable inputs, or as a streamed truncation for case (ii)).
/// Throws Infeasible when no projection exists.
BuildResult build(const DiagonalSpec& spec, const BuildOptions& options = {});

}  // namespace carpenter
