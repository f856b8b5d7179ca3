#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "core_model.hpp"
#include "finite_sample.hpp"
#include "quadrature.hpp"

namespace pretestcov {

/// Large-sample model: the estimated log odds ratios are independent
/// N(theta_i, sigma_sq_i) with known variances.
struct AsymptoticParams {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double sigma_sq1 = 1.0;
  double sigma_sq2 = 1.0;
  double lambda = 0.0;    // mean of the homogeneity statistic T
  double theta_av = 0.0;  // mean of the pooled estimator
  double w = 0.5;         // variance of the pooled estimator
};

AsymptoticParams asymptotic_params(const StudyDesign& design, const CellProbs& p);

/// P(theta1 in J, theta2 in J, |T| <= c_beta). beta may be 0 (never reject).
double accept_branch_prob(const AsymptoticParams& params, double alpha, double beta);

/// Inner probability g(z2) = P(Z1 in [-c~, c~] and in the acceptance band
/// for T given Z2 = z2).
double acceptance_overlap(const AsymptoticParams& params, const NormalQuantiles& q,
                          double z2) noexcept;

/// Points in (-c~, c~) where an endpoint of the acceptance band meets an
/// endpoint of [-c~, c~]; g is not differentiable there. Sorted, at most 4.
std::vector<double> overlap_kinks(const AsymptoticParams& params,
                                  const NormalQuantiles& q);

struct RejectBranch {
  double probability = 0.0;
  QuadratureResult integral;  // of g(z2) phi(z2) over [-c~, c~]
  std::vector<double> kinks;
};

/// P(theta1 in I1, theta2 in I2, |T| > c_beta), as (1 - alpha) minus the
/// probability that both separate intervals cover and the pretest accepts.
RejectBranch reject_branch(const AsymptoticParams& params, double alpha, double beta,
                           const QuadratureSpec& quad);

double reject_branch_prob(const AsymptoticParams& params, double alpha, double beta,
                          const QuadratureSpec& quad);

/// Large-sample simultaneous coverage of the two-stage intervals.
double asymptotic_coverage(const StudyDesign& design, const CellProbs& p, double alpha,
                           double beta, const QuadratureSpec& quad);

/// Large-sample coverage of the separate intervals without a pretest.
/// Independent of the design and p.
double asymptotic_no_pretest_coverage(const StudyDesign& design, const CellProbs& p,
                                      double alpha);

struct GridFailure {
  std::size_t grid_index = 0;
  CellProbs p;
  std::string message;
};

struct GridMinimum {
  double min_coverage = 1.0;
  double tie_band = 1e-9;
  std::size_t evaluated = 0;
  /// Every grid point within tie_band of the minimum, in grid order.
  std::vector<CellProbs> argmins;
  std::vector<std::size_t> argmin_indices;
  std::vector<GridFailure> failures;
};

/// Minimum of the large-sample coverage over the grid axis^4.
GridMinimum asymptotic_grid_min(const StudyDesign& design, double alpha, double beta,
                                double epsilon, double h, const QuadratureSpec& quad,
                                IntervalMode mode = IntervalMode::two_stage,
                                unsigned workers = 0, double tie_band = 1e-9);

}  // namespace pretestcov
