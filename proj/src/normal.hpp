#pragma once

namespace pretestcov {

/// Standard normal density.
double normal_pdf(double x) noexcept;

/// Standard normal distribution function, via erfc so both tails keep
/// full relative precision.
double normal_cdf(double x) noexcept;

/// Upper tail 1 - Phi(x), computed without cancellation.
double normal_sf(double x) noexcept;

/// P(lo <= Z <= hi) for Z ~ N(0,1). Infinite endpoints are allowed;
/// returns 0 when lo >= hi.
double normal_interval_prob(double lo, double hi) noexcept;

/// Inverse of normal_cdf on (0,1). Wichura's AS241 followed by one Halley
/// step against normal_cdf, giving |Phi(x) - p| at the level of rounding.
double normal_quantile(double p);

/// c such that P(-c <= Z <= c) = 1 - a. Defined for a in [0, 1]:
/// a = 0 gives +infinity, a = 1 gives 0.
double two_sided_quantile(double a);

}  // namespace pretestcov
