#include "asymptotic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"
#include "normal.hpp"
#include "parallel.hpp"

namespace pretestcov {

namespace {

double population_variance(double n_case, double p, double n_control, double pp) {
  return (1.0 / n_case) * (1.0 / p + 1.0 / (1.0 - p)) +
         (1.0 / n_control) * (1.0 / pp + 1.0 / (1.0 - pp));
}

// Acceptance band for Z1 given Z2 = z2: centre slope * z2 - shift, half
// width c_beta * sqrt(1 + slope^2).
struct Band {
  double slope;
  double half;
  double shift;

  explicit Band(const AsymptoticParams& prm, const NormalQuantiles& q) {
    const double s1 = std::sqrt(prm.sigma_sq1);
    slope = std::sqrt(prm.sigma_sq2) / s1;
    half = q.c_beta == 0.0 ? 0.0 : q.c_beta * std::sqrt(1.0 + slope * slope);
    shift = (prm.theta1 - prm.theta2) / s1;
  }

  double lo(double z2) const noexcept { return slope * z2 - half - shift; }
  double hi(double z2) const noexcept { return slope * z2 + half - shift; }
};

}  // namespace

AsymptoticParams asymptotic_params(const StudyDesign& design, const CellProbs& p) {
  validate(design);
  validate(p);
  AsymptoticParams a;
  a.theta1 = p.theta1();
  a.theta2 = p.theta2();
  a.sigma_sq1 = population_variance(static_cast<double>(design.n1), p.p1,
                                    static_cast<double>(design.n1p), p.p1p);
  a.sigma_sq2 = population_variance(static_cast<double>(design.n2), p.p2,
                                    static_cast<double>(design.n2p), p.p2p);
  a.lambda = (a.theta1 - a.theta2) / std::sqrt(a.sigma_sq1 + a.sigma_sq2);
  const double w1 = 1.0 / a.sigma_sq1;
  const double w2 = 1.0 / a.sigma_sq2;
  a.w = 1.0 / (w1 + w2);
  a.theta_av = (w1 * a.theta1 + w2 * a.theta2) * a.w;
  return a;
}

double accept_branch_prob(const AsymptoticParams& prm, double alpha, double beta) {
  const NormalQuantiles q = normal_quantiles_extended(alpha, beta);
  const double sd = std::sqrt(prm.w);
  const double half = q.c_alpha * sd;
  const double a = std::max(prm.theta1, prm.theta2) - half;
  const double b = std::min(prm.theta1, prm.theta2) + half;
  if (a >= b) return 0.0;
  const double pooled_in_both =
      normal_interval_prob((a - prm.theta_av) / sd, (b - prm.theta_av) / sd);
  const double accept = std::isinf(q.c_beta)
                            ? 1.0
                            : normal_interval_prob(-q.c_beta - prm.lambda,
                                                   q.c_beta - prm.lambda);
  return pooled_in_both * accept;
}

double acceptance_overlap(const AsymptoticParams& prm, const NormalQuantiles& q,
                          double z2) noexcept {
  const Band band(prm, q);
  const double c = q.c_tilde_alpha;
  const double a = std::max(-c, band.lo(z2));
  const double b = std::min(c, band.hi(z2));
  if (a >= b) return 0.0;
  return normal_interval_prob(a, b);
}

std::vector<double> overlap_kinks(const AsymptoticParams& prm, const NormalQuantiles& q) {
  const Band band(prm, q);
  const double c = q.c_tilde_alpha;
  std::vector<double> candidates;
  for (double endpoint : {-c, c}) {
    // band.lo(z) = endpoint and band.hi(z) = endpoint
    candidates.push_back((endpoint + band.half + band.shift) / band.slope);
    candidates.push_back((endpoint - band.half + band.shift) / band.slope);
  }
  std::vector<double> kinks;
  for (double z : candidates) {
    if (std::isfinite(z) && z > -c && z < c) kinks.push_back(z);
  }
  std::sort(kinks.begin(), kinks.end());
  const auto last = std::unique(kinks.begin(), kinks.end(),
                                [](double x, double y) { return y - x <= 1e-12; });
  kinks.erase(last, kinks.end());
  return kinks;
}

RejectBranch reject_branch(const AsymptoticParams& prm, double alpha, double beta,
                           const QuadratureSpec& quad) {
  const NormalQuantiles q = normal_quantiles_extended(alpha, beta);
  RejectBranch out;
  out.kinks = overlap_kinks(prm, q);
  if (q.c_beta == 0.0) {
    // The band collapses to a point: the pretest rejects almost surely.
    out.probability = 1.0 - alpha;
    return out;
  }
  const double c = q.c_tilde_alpha;
  std::vector<double> breaks;
  breaks.reserve(out.kinks.size() + 2);
  breaks.push_back(-c);
  breaks.insert(breaks.end(), out.kinks.begin(), out.kinks.end());
  breaks.push_back(c);
  out.integral = integrate_piecewise(
      [&](double z2) { return acceptance_overlap(prm, q, z2) * normal_pdf(z2); },
      breaks, quad);
  out.probability = std::clamp(1.0 - alpha - out.integral.value, 0.0, 1.0 - alpha);
  return out;
}

double reject_branch_prob(const AsymptoticParams& prm, double alpha, double beta,
                          const QuadratureSpec& quad) {
  return reject_branch(prm, alpha, beta, quad).probability;
}

double asymptotic_coverage(const StudyDesign& design, const CellProbs& p, double alpha,
                           double beta, const QuadratureSpec& quad) {
  const AsymptoticParams prm = asymptotic_params(design, p);
  const double total =
      accept_branch_prob(prm, alpha, beta) + reject_branch_prob(prm, alpha, beta, quad);
  return std::clamp(total, 0.0, 1.0);
}

double asymptotic_no_pretest_coverage(const StudyDesign& design, const CellProbs& p,
                                      double alpha) {
  validate(design);
  validate(p);
  const NormalQuantiles q = normal_quantiles_extended(alpha, 1.0);
  const double each = normal_interval_prob(-q.c_tilde_alpha, q.c_tilde_alpha);
  return each * each;
}

GridMinimum asymptotic_grid_min(const StudyDesign& design, double alpha, double beta,
                                double epsilon, double h, const QuadratureSpec& quad,
                                IntervalMode mode, unsigned workers, double tie_band) {
  validate(design);
  validate(quad);
  normal_quantiles_extended(alpha, beta);
  const auto axis = grid_axis(epsilon, h);
  const std::size_t m = axis.size();
  const std::size_t n_points = m * m * m * m;

  constexpr double kFailed = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> values(n_points, kFailed);
  std::vector<std::string> errors(n_points);
  parallel_for(n_points, workers, [&](std::size_t i) {
    const CellProbs p = grid_point(axis, i);
    try {
      values[i] = mode == IntervalMode::no_pretest
                      ? asymptotic_no_pretest_coverage(design, p, alpha)
                      : asymptotic_coverage(design, p, alpha, beta, quad);
    } catch (const NumericalError& e) {
      errors[i] = e.what();
    }
  });

  GridMinimum out;
  out.tie_band = tie_band;
  out.evaluated = n_points;
  for (std::size_t i = 0; i < n_points; ++i) {
    if (std::isnan(values[i])) {
      out.failures.push_back({i, grid_point(axis, i), errors[i]});
    } else {
      out.min_coverage = std::min(out.min_coverage, values[i]);
    }
  }
  for (std::size_t i = 0; i < n_points; ++i) {
    if (!std::isnan(values[i]) && values[i] <= out.min_coverage + tie_band) {
      out.argmins.push_back(grid_point(axis, i));
      out.argmin_indices.push_back(i);
    }
  }
  return out;
}

}  // namespace pretestcov
