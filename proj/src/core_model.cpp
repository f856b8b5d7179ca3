#include "core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "errors.hpp"
#include "normal.hpp"

namespace pretestcov {

namespace {

double log_odds_ratio(double p, double pp) noexcept {
  return std::log(p / (1.0 - p)) - std::log(pp / (1.0 - pp));
}

double margin_variance(double n, double p) noexcept {
  return (1.0 / n) * (1.0 / p + 1.0 / (1.0 - p));
}

void check_count(std::int64_t y, std::int64_t n, const char* name) {
  if (y < 0 || y > n) {
    throw DomainError(std::string("observed count ") + name + " = " +
                      std::to_string(y) + " outside [0, " + std::to_string(n) +
                      "]");
  }
}

void check_prob(double p, const char* name) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError(std::string("probability ") + name +
                      " must lie strictly inside (0,1)");
  }
}

}  // namespace

std::uint64_t StudyDesign::outcome_count() const noexcept {
  const auto m = [](std::int64_t n) {
    return static_cast<long double>(n) + 1.0L;
  };
  const long double total = m(n1) * m(n1p) * m(n2) * m(n2p);
  if (total > static_cast<long double>(std::numeric_limits<std::uint64_t>::max())) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(total);
}

StudyDesign StudyDesign::scaled(std::int64_t factor) const {
  if (factor < 1) throw DomainError("design scale factor must be >= 1");
  return {n1 * factor, n1p * factor, n2 * factor, n2p * factor};
}

double CellProbs::theta1() const noexcept { return log_odds_ratio(p1, p1p); }
double CellProbs::theta2() const noexcept { return log_odds_ratio(p2, p2p); }
double CellProbs::psi1() const noexcept { return std::exp(theta1()); }
double CellProbs::psi2() const noexcept { return std::exp(theta2()); }

Interval Interval::intersect(const Interval& other) const noexcept {
  if (empty || other.empty) return make_empty();
  const double a = std::max(lo, other.lo);
  const double b = std::min(hi, other.hi);
  if (a > b) return make_empty();
  return {a, b, false};
}

Interval Interval::to_odds_scale() const noexcept {
  if (empty) return make_empty();
  return {std::exp(lo), std::exp(hi), false};
}

void validate(const StudyDesign& d) {
  if (d.n1 < 1 || d.n1p < 1 || d.n2 < 1 || d.n2p < 1) {
    throw DomainError("study design counts must all be >= 1");
  }
}

void validate(const CellProbs& p) {
  check_prob(p.p1, "p1");
  check_prob(p.p1p, "p1'");
  check_prob(p.p2, "p2");
  check_prob(p.p2p, "p2'");
}

void validate(const CellProbs& p, double epsilon) {
  validate(p);
  for (double v : {p.p1, p.p1p, p.p2, p.p2p}) {
    if (v < epsilon || v > 1.0 - epsilon) {
      throw DomainError("probabilities must lie in [epsilon, 1 - epsilon]");
    }
  }
}

void validate(const StudyDesign& d, const ObservedTables& t) {
  validate(d);
  check_count(t.y1, d.n1, "y1");
  check_count(t.y1p, d.n1p, "y1'");
  check_count(t.y2, d.n2, "y2");
  check_count(t.y2p, d.n2p, "y2'");
}

void validate(const AnalysisConfig& c) {
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
  if (!(c.beta > 0.0 && c.beta <= 1.0)) throw DomainError("beta must lie in (0,1]");
  if (!(c.epsilon > 0.0 && c.epsilon < 0.5)) {
    throw DomainError("epsilon must lie in (0, 0.5)");
  }
  if (!(c.grid_step > 0.0) || !std::isfinite(c.grid_step)) {
    throw DomainError("grid step must be positive");
  }
  const auto& s = c.schedule;
  if (s.stage1_reps < 1 || s.stage2_reps < 1 || s.stage3_reps < 1) {
    throw DomainError("Monte Carlo repetitions must be >= 1");
  }
  if (s.keep < 1) throw DomainError("stage-2 keep count must be >= 1");
}

std::array<double, 4> adjusted_props(const StudyDesign& d,
                                     const ObservedTables& t) {
  validate(d, t);
  const auto adj = [](std::int64_t y, std::int64_t n) {
    return (static_cast<double>(y) + 0.5) / (static_cast<double>(n) + 1.0);
  };
  return {adj(t.y1, d.n1), adj(t.y1p, d.n1p), adj(t.y2, d.n2), adj(t.y2p, d.n2p)};
}

double adjusted_logit(std::int64_t y, std::int64_t n) noexcept {
  const double p = (static_cast<double>(y) + 0.5) / (static_cast<double>(n) + 1.0);
  return std::log(p / (1.0 - p));
}

double adjusted_margin_variance(std::int64_t y, std::int64_t n) noexcept {
  const double p = (static_cast<double>(y) + 0.5) / (static_cast<double>(n) + 1.0);
  return margin_variance(static_cast<double>(n), p);
}

WoolfSummary woolf_from_estimates(double theta_hat1, double sigma_hat_sq1,
                                  double theta_hat2, double sigma_hat_sq2) noexcept {
  WoolfSummary s;
  s.theta_hat1 = theta_hat1;
  s.theta_hat2 = theta_hat2;
  s.sigma_hat_sq1 = sigma_hat_sq1;
  s.sigma_hat_sq2 = sigma_hat_sq2;
  s.t_hat = (theta_hat1 - theta_hat2) / std::sqrt(sigma_hat_sq1 + sigma_hat_sq2);
  const double w1 = 1.0 / sigma_hat_sq1;
  const double w2 = 1.0 / sigma_hat_sq2;
  s.theta_hat_pooled = (w1 * theta_hat1 + w2 * theta_hat2) / (w1 + w2);
  return s;
}

WoolfSummary woolf_summary(const StudyDesign& d, const ObservedTables& t) {
  validate(d, t);
  return woolf_from_estimates(
      adjusted_logit(t.y1, d.n1) - adjusted_logit(t.y1p, d.n1p),
      adjusted_margin_variance(t.y1, d.n1) + adjusted_margin_variance(t.y1p, d.n1p),
      adjusted_logit(t.y2, d.n2) - adjusted_logit(t.y2p, d.n2p),
      adjusted_margin_variance(t.y2, d.n2) + adjusted_margin_variance(t.y2p, d.n2p));
}

NormalQuantiles normal_quantiles_extended(double alpha, double beta) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
  if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("beta must lie in [0,1]");
  NormalQuantiles q;
  q.c_alpha = two_sided_quantile(alpha);
  // 1 - sqrt(1 - alpha), written to avoid cancellation for small alpha.
  q.c_tilde_alpha = two_sided_quantile(alpha / (1.0 + std::sqrt(1.0 - alpha)));
  q.c_beta = two_sided_quantile(beta);
  return q;
}

NormalQuantiles normal_quantiles(double alpha, double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("beta must lie in (0,1]");
  return normal_quantiles_extended(alpha, beta);
}

TwoStageIntervals separate_intervals(const WoolfSummary& s,
                                     const NormalQuantiles& q) {
  return {Interval::centred(s.theta_hat1, q.c_tilde_alpha * std::sqrt(s.sigma_hat_sq1)),
          Interval::centred(s.theta_hat2, q.c_tilde_alpha * std::sqrt(s.sigma_hat_sq2)),
          true};
}

TwoStageIntervals select_intervals(const WoolfSummary& s,
                                   const NormalQuantiles& q) {
  // Ties |T| = c_beta accept homogeneity.
  if (std::abs(s.t_hat) > q.c_beta) return separate_intervals(s, q);
  const double precision = 1.0 / s.sigma_hat_sq1 + 1.0 / s.sigma_hat_sq2;
  const Interval pooled =
      Interval::centred(s.theta_hat_pooled, q.c_alpha / std::sqrt(precision));
  return {pooled, pooled, false};
}

TwoStageIntervals two_stage_intervals(const StudyDesign& d,
                                      const ObservedTables& t,
                                      const AnalysisConfig& c) {
  validate(c);
  return select_intervals(woolf_summary(d, t), normal_quantiles(c.alpha, c.beta));
}

}  // namespace pretestcov
