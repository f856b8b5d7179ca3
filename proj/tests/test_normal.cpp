#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "core_model.hpp"
#include "errors.hpp"
#include "normal.hpp"
#include "oracles.hpp"

using namespace pretestcov;

TEST_CASE("normal_cdf matches the erf series oracle") {
  for (double x = -6.0; x <= 6.0; x += 0.125) {
    const long double expected = 0.5L * (1.0L + oracle::erf_series(x / std::sqrt(2.0L)));
    CHECK(std::abs(normal_cdf(x) - static_cast<double>(expected)) < 1e-15);
  }
}

TEST_CASE("normal_interval_prob") {
  CHECK(normal_interval_prob(1.0, 1.0) == 0.0);
  CHECK(normal_interval_prob(2.0, 1.0) == 0.0);
  CHECK(normal_interval_prob(-INFINITY, INFINITY) == doctest::Approx(1.0).epsilon(1e-16));
  // upper tails keep relative precision
  const double far = normal_interval_prob(8.0, 9.0);
  CHECK(far > 0.0);
  CHECK(far == doctest::Approx(6.22096057427178e-16).epsilon(1e-9));
}

TEST_CASE("normal_quantile inverts normal_cdf") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-14.0, 0.0);
  for (int i = 0; i < 2000; ++i) {
    const double p = std::pow(10.0, u(rng));
    const double x = normal_quantile(p);
    CHECK(std::abs(normal_cdf(x) - p) <= 1e-12 * std::max(p, 1e-3));
    if (p >= 1e-4) CHECK(normal_quantile(1.0 - p) == doctest::Approx(-x).epsilon(1e-9));
  }
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK_THROWS_AS(normal_quantile(0.0), DomainError);
  CHECK_THROWS_AS(normal_quantile(1.0), DomainError);
}

TEST_CASE("two-sided quantiles against bisection on the erf series") {
  for (double a : {0.5, 0.2, 0.1, 0.05, 0.025, 0.01, 1e-3, 1e-6}) {
    CHECK(two_sided_quantile(a) ==
          doctest::Approx(oracle::two_sided_quantile_bisect(1.0L - a)).epsilon(1e-13));
  }
  CHECK(std::isinf(two_sided_quantile(0.0)));
  CHECK(two_sided_quantile(1.0) == 0.0);
}

TEST_CASE("normal_quantiles at alpha = beta = 0.05") {
  const NormalQuantiles q = normal_quantiles(0.05, 0.05);
  // bisection oracle, frozen
  CHECK(q.c_alpha == doctest::Approx(1.9599639845400542).epsilon(1e-14));
  CHECK(q.c_tilde_alpha == doctest::Approx(2.2364766445577923).epsilon(1e-14));
  CHECK(q.c_beta == q.c_alpha);
  CHECK(q.c_alpha == doctest::Approx(oracle::two_sided_quantile_bisect(0.95L)).epsilon(1e-14));
  CHECK(q.c_tilde_alpha ==
        doctest::Approx(oracle::two_sided_quantile_bisect(std::sqrt(0.95L))).epsilon(1e-14));
  // |Phi(c) - target| <= 1e-12
  CHECK(std::abs(normal_interval_prob(-q.c_tilde_alpha, q.c_tilde_alpha) - std::sqrt(0.95)) <
        1e-12);
}

TEST_CASE("normal_quantiles edge levels") {
  CHECK(normal_quantiles(0.05, 1.0).c_beta == 0.0);
  for (double a : {0.001, 0.05, 0.3, 0.9}) {
    const NormalQuantiles q = normal_quantiles(a, 0.5);
    CHECK(q.c_tilde_alpha > q.c_alpha);
  }
  CHECK_THROWS_AS(normal_quantiles(0.0, 0.05), DomainError);
  CHECK_THROWS_AS(normal_quantiles(1.0, 0.05), DomainError);
  CHECK_THROWS_AS(normal_quantiles(0.05, 0.0), DomainError);
  CHECK_THROWS_AS(normal_quantiles(0.05, 1.5), DomainError);
  CHECK(std::isinf(normal_quantiles_extended(0.05, 0.0).c_beta));
}
