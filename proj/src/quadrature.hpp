#pragma once

#include <functional>
#include <span>

namespace pretestcov {

struct QuadratureSpec {
  double abs_tol = 1e-9;
  double rel_tol = 1e-10;
  int max_subdivisions = 500;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int subdivisions = 0;
};

void validate(const QuadratureSpec& spec);

/// Globally adaptive 7/15-point Gauss-Kronrod integration of f over the
/// consecutive pieces [breaks[0], breaks[1]], [breaks[1], breaks[2]], ...
/// The integrand only needs to be smooth inside each piece. Throws
/// NumericalError carrying the achieved error estimate when the tolerance
/// max(abs_tol, rel_tol * |I|) is not met within max_subdivisions
/// bisections.
QuadratureResult integrate_piecewise(const std::function<double(double)>& f,
                                     std::span<const double> breaks,
                                     const QuadratureSpec& spec);

}  // namespace pretestcov
