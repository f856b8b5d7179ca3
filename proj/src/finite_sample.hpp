#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "core_model.hpp"

namespace pretestcov {

enum class IntervalMode {
  two_stage,   // pretest, then pooled or separate intervals
  no_pretest,  // separate intervals always
};

struct McEstimate {
  double coverage = 0.0;
  std::uint64_t reps = 0;
  double std_err = 0.0;
  std::uint64_t seed = 0;
};

/// Repetitions per independent random stream.
inline constexpr std::uint64_t kMcBlockSize = 4096;

/// Monte Carlo estimate of P(theta1 in interval1, theta2 in interval2) under
/// independent binomial sampling of the four margins. Deterministic in
/// (inputs, seed) and independent of config.workers.
McEstimate mc_coverage(const StudyDesign& design, const CellProbs& p,
                       const AnalysisConfig& config, IntervalMode mode,
                       std::uint64_t reps, std::uint64_t seed);

struct EnumerationOptions {
  std::uint64_t max_outcomes = 10'000'000;
  /// Diagnostic: count every outcome as covered (result must be 1).
  bool always_covered = false;
};

/// Exact coverage under the binomial model, summing the probability of every
/// outcome whose intervals cover both log odds ratios. Throws BudgetExceeded
/// when the outcome set is larger than options.max_outcomes.
double enumerate_coverage(const StudyDesign& design, const CellProbs& p,
                          const AnalysisConfig& config, IntervalMode mode,
                          const EnumerationOptions& options = {});

/// Grid coordinates epsilon, epsilon + h, ..., not exceeding 1 - epsilon,
/// rounded to 12 decimals.
std::vector<double> grid_axis(double epsilon, double h);

/// p for linear index `index` of the 4-D grid axis^4, p1 varying slowest.
CellProbs grid_point(const std::vector<double>& axis, std::size_t index);

struct StageCandidate {
  std::size_t grid_index = 0;
  CellProbs p;
  McEstimate estimate;
};

struct SearchStage {
  std::uint64_t reps = 0;
  std::size_t evaluated = 0;
  /// Points carried out of this stage, lowest estimate first (ties broken
  /// by grid order).
  std::vector<StageCandidate> candidates;
};

struct SearchResult {
  double min_coverage = 1.0;
  CellProbs argmin;
  std::size_t argmin_index = 0;
  std::vector<SearchStage> stages;
};

/// Three-stage Monte Carlo search for the minimum coverage over the grid
/// axis^4: every point with stage1_reps, the `keep` lowest again with
/// stage2_reps, and the lowest of those with stage3_reps. Each stage uses
/// its own random streams.
SearchResult min_coverage_search(const StudyDesign& design,
                                 const AnalysisConfig& config,
                                 IntervalMode mode);

}  // namespace pretestcov
