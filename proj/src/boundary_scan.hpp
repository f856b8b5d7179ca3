#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core_model.hpp"
#include "quadrature.hpp"

namespace pretestcov {

struct ClosedRange {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

/// Perturbation geometry for the interior scan: p2 = p1 + delta and
/// p2' = p1' - r * delta with |delta| <= delta_cap.
struct ScanGeometry {
  double delta_cap = 0.0;        // sqrt(1/n1 + 1/n2)
  double r = 0.0;                // (1/n1' + 1/n2') / (1/n1 + 1/n2)
  double delta_cap_prime = 0.0;  // r * delta_cap
  ClosedRange p1_range;          // [eps + delta_cap, 1 - eps - delta_cap]
  ClosedRange p1p_range;         // [eps + delta_cap', 1 - eps - delta_cap']
};

ScanGeometry scan_geometry(const StudyDesign& design, double epsilon);

struct ScanSettings {
  double epsilon = 0.02;
  double alpha = 0.05;
  double beta = 0.05;
  std::size_t delta_steps = 80;  // delta grid has delta_steps + 1 points
  QuadratureSpec quad{};
  unsigned workers = 0;
};

struct PartialMinimum {
  double coverage = 1.0;
  double argmin_delta = 0.0;
};

/// Minimum of the large-sample coverage over the uniform delta grid on
/// [-delta_cap, delta_cap]; delta_steps = 0 evaluates delta = 0 only.
/// Ties keep the smallest delta.
PartialMinimum partial_min_coverage(const StudyDesign& design, double p1, double p1p,
                                    const ScanSettings& settings);

struct ContourGrid {
  std::vector<double> p1_values;
  std::vector<double> p1p_values;
  /// Row-major: values[i * p1p_values.size() + j] is at (p1_values[i], p1p_values[j]).
  std::vector<double> values;
  std::vector<double> argmin_delta;

  double at(std::size_t i, std::size_t j) const {
    return values[i * p1p_values.size() + j];
  }
  double delta_at(std::size_t i, std::size_t j) const {
    return argmin_delta[i * p1p_values.size() + j];
  }
};

/// partial_min_coverage on a (grid_steps + 1)^2 uniform grid spanning the
/// scan rectangle.
ContourGrid contour_grid(const StudyDesign& design, std::size_t grid_steps,
                         const ScanSettings& settings);

/// First-order expansion of lambda in delta around delta = 0, along the
/// direction p2' - p1' = -r * delta:
/// lambda ~ -(delta / delta_cap) * sqrt(1/(p1(1-p1)) + r/(p1'(1-p1'))).
double lambda_taylor(const StudyDesign& design, double p1, double p1p, double delta);

struct ScalingPoint {
  std::int64_t factor = 1;
  bool evaluated = false;
  PartialMinimum minimum;
  std::string notice;  // why the point was skipped
};

/// partial_min_coverage at a fixed (p1, p1') for the designs factor * design.
std::vector<ScalingPoint> scaling_study(const StudyDesign& design,
                                        std::span<const std::int64_t> factors,
                                        double p1, double p1p,
                                        const ScanSettings& settings);

}  // namespace pretestcov
