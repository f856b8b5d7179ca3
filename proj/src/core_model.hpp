#pragma once

#include <array>
#include <cstdint>

namespace pretestcov {

/// Case and control counts of a two-stratum case-control study.
struct StudyDesign {
  std::int64_t n1 = 1;   // cases, stratum 1
  std::int64_t n1p = 1;  // controls, stratum 1
  std::int64_t n2 = 1;   // cases, stratum 2
  std::int64_t n2p = 1;  // controls, stratum 2

  std::uint64_t outcome_count() const noexcept;
  StudyDesign scaled(std::int64_t factor) const;
  StudyDesign swapped_strata() const noexcept { return {n2, n2p, n1, n1p}; }

  friend bool operator==(const StudyDesign&, const StudyDesign&) = default;
};

/// Reference case-control design (n1, n1', n2, n2').
inline constexpr StudyDesign kReferenceDesign{1092, 467, 449, 488};

/// Exposure probabilities for cases and controls in each stratum.
struct CellProbs {
  double p1 = 0.5;
  double p1p = 0.5;
  double p2 = 0.5;
  double p2p = 0.5;

  double theta1() const noexcept;
  double theta2() const noexcept;
  double psi1() const noexcept;
  double psi2() const noexcept;

  CellProbs swapped_strata() const noexcept { return {p2, p2p, p1, p1p}; }
  CellProbs mirrored() const noexcept {
    return {1.0 - p1, 1.0 - p1p, 1.0 - p2, 1.0 - p2p};
  }

  friend bool operator==(const CellProbs&, const CellProbs&) = default;
};

/// Exposed cases/controls observed in each stratum.
struct ObservedTables {
  std::int64_t y1 = 0;
  std::int64_t y1p = 0;
  std::int64_t y2 = 0;
  std::int64_t y2p = 0;
};

struct McSchedule {
  std::uint64_t stage1_reps = 10000;
  std::uint64_t stage2_reps = 200000;
  std::uint64_t stage3_reps = 1000000;
  std::size_t keep = 10;
};

struct AnalysisConfig {
  double alpha = 0.05;    // nominal non-coverage
  double beta = 0.05;     // pretest level
  double epsilon = 0.02;  // parameter space is [epsilon, 1-epsilon]^4
  double grid_step = 0.096;
  McSchedule schedule{};
  std::uint64_t seed = 20140101;
  unsigned workers = 0;  // 0: one per hardware thread
};

/// Closed interval on the log-odds scale, or the empty set.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty = false;

  static Interval make_empty() noexcept { return {0.0, 0.0, true}; }
  static Interval centred(double centre, double half_width) noexcept {
    return {centre - half_width, centre + half_width, false};
  }

  bool contains(double x) const noexcept { return !empty && lo <= x && x <= hi; }
  double width() const noexcept { return empty ? 0.0 : hi - lo; }
  Interval intersect(const Interval& other) const noexcept;
  /// exp-transformed endpoints (odds-ratio scale view).
  Interval to_odds_scale() const noexcept;
};

struct WoolfSummary {
  double theta_hat1 = 0.0;
  double theta_hat2 = 0.0;
  double sigma_hat_sq1 = 0.0;
  double sigma_hat_sq2 = 0.0;
  double t_hat = 0.0;
  double theta_hat_pooled = 0.0;
};

struct NormalQuantiles {
  double c_alpha = 0.0;        // two-sided, level 1 - alpha
  double c_tilde_alpha = 0.0;  // two-sided, level sqrt(1 - alpha)
  double c_beta = 0.0;         // two-sided, level 1 - beta
};

struct TwoStageIntervals {
  Interval theta1;
  Interval theta2;
  bool rejected = false;  // homogeneity rejected -> separate intervals
};

void validate(const StudyDesign& design);
/// Each probability strictly inside (0,1).
void validate(const CellProbs& p);
/// Each probability inside [epsilon, 1 - epsilon].
void validate(const CellProbs& p, double epsilon);
void validate(const StudyDesign& design, const ObservedTables& tables);
void validate(const AnalysisConfig& config);

/// (y + 1/2) / (n + 1) for each of the four margins, in the order
/// (p1, p1', p2, p2').
std::array<double, 4> adjusted_props(const StudyDesign& design,
                                     const ObservedTables& tables);

WoolfSummary woolf_summary(const StudyDesign& design,
                           const ObservedTables& tables);

/// Test statistic and pooled estimate from the per-stratum estimates.
WoolfSummary woolf_from_estimates(double theta_hat1, double sigma_hat_sq1,
                                  double theta_hat2, double sigma_hat_sq2) noexcept;

/// Adjusted-proportion log odds, log(p/(1-p)) with p = (y + 1/2)/(n + 1).
double adjusted_logit(std::int64_t y, std::int64_t n) noexcept;
/// One margin's contribution (1/n)(1/p + 1/(1-p)) to a Woolf variance.
double adjusted_margin_variance(std::int64_t y, std::int64_t n) noexcept;

/// Quantiles for 0 < alpha < 1 and 0 < beta <= 1.
NormalQuantiles normal_quantiles(double alpha, double beta);

/// Same as normal_quantiles but also admits beta = 0 (c_beta = +inf), the
/// never-reject limit used by the large-sample evaluators.
NormalQuantiles normal_quantiles_extended(double alpha, double beta);

/// Select intervals for (theta1, theta2) from a Woolf summary: separate
/// sqrt(1-alpha) intervals when |T| > c_beta, otherwise the pooled interval
/// for both.
TwoStageIntervals select_intervals(const WoolfSummary& summary,
                                   const NormalQuantiles& q);

TwoStageIntervals two_stage_intervals(const StudyDesign& design,
                                      const ObservedTables& tables,
                                      const AnalysisConfig& config);

/// Separate intervals irrespective of the pretest.
TwoStageIntervals separate_intervals(const WoolfSummary& summary,
                                     const NormalQuantiles& q);

}  // namespace pretestcov
