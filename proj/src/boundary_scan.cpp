#include "boundary_scan.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "asymptotic.hpp"
#include "errors.hpp"
#include "parallel.hpp"

namespace pretestcov {

namespace {

double inverse_sum(std::int64_t a, std::int64_t b) {
  return 1.0 / static_cast<double>(a) + 1.0 / static_cast<double>(b);
}

double uniform_node(const ClosedRange& range, std::size_t k, std::size_t steps) {
  if (steps == 0) return 0.5 * (range.lo + range.hi);
  if (k == steps) return range.hi;
  const double x = range.lo + (range.hi - range.lo) * static_cast<double>(k) /
                                  static_cast<double>(steps);
  return std::min(x, range.hi);
}

void check_in_range(const ScanGeometry& g, double p1, double p1p) {
  if (!g.p1_range.contains(p1) || !g.p1p_range.contains(p1p)) {
    std::ostringstream msg;
    msg << "(p1, p1') = (" << p1 << ", " << p1p << ") outside the scan rectangle ["
        << g.p1_range.lo << ", " << g.p1_range.hi << "] x [" << g.p1p_range.lo << ", "
        << g.p1p_range.hi << "]";
    throw DomainError(msg.str());
  }
}

}  // namespace

ScanGeometry scan_geometry(const StudyDesign& design, double epsilon) {
  validate(design);
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw DomainError("epsilon must lie in (0, 0.5)");
  ScanGeometry g;
  const double cases = inverse_sum(design.n1, design.n2);
  g.delta_cap = std::sqrt(cases);
  g.r = inverse_sum(design.n1p, design.n2p) / cases;
  g.delta_cap_prime = g.r * g.delta_cap;
  if (!(epsilon + g.delta_cap < 0.5)) {
    throw DomainError("empty scan range: epsilon + Delta >= 1/2");
  }
  if (!(epsilon + g.delta_cap_prime < 0.5)) {
    throw DomainError("empty scan range: epsilon + Delta' >= 1/2");
  }
  g.p1_range = {epsilon + g.delta_cap, 1.0 - epsilon - g.delta_cap};
  g.p1p_range = {epsilon + g.delta_cap_prime, 1.0 - epsilon - g.delta_cap_prime};
  return g;
}

PartialMinimum partial_min_coverage(const StudyDesign& design, double p1, double p1p,
                                    const ScanSettings& s) {
  const ScanGeometry g = scan_geometry(design, s.epsilon);
  check_in_range(g, p1, p1p);
  PartialMinimum best;
  bool first = true;
  const std::size_t n = s.delta_steps;
  for (std::size_t k = 0; k <= n; ++k) {
    // Integer numerator keeps the grids for n and 2n exactly nested.
    const double delta =
        n == 0 ? 0.0
               : g.delta_cap * (2.0 * static_cast<double>(k) - static_cast<double>(n)) /
                     static_cast<double>(n);
    const CellProbs p{p1, p1p, p1 + delta, p1p - g.r * delta};
    const double c = asymptotic_coverage(design, p, s.alpha, s.beta, s.quad);
    if (first || c < best.coverage) {
      best = {c, delta};
      first = false;
    }
  }
  return best;
}

ContourGrid contour_grid(const StudyDesign& design, std::size_t grid_steps,
                         const ScanSettings& s) {
  const ScanGeometry g = scan_geometry(design, s.epsilon);
  ContourGrid out;
  for (std::size_t k = 0; k <= grid_steps; ++k) {
    out.p1_values.push_back(uniform_node(g.p1_range, k, grid_steps));
    out.p1p_values.push_back(uniform_node(g.p1p_range, k, grid_steps));
  }
  const std::size_t cols = out.p1p_values.size();
  const std::size_t cells = out.p1_values.size() * cols;
  out.values.resize(cells);
  out.argmin_delta.resize(cells);
  ScanSettings inner = s;
  inner.workers = 1;
  parallel_for(cells, s.workers, [&](std::size_t idx) {
    const PartialMinimum pm = partial_min_coverage(
        design, out.p1_values[idx / cols], out.p1p_values[idx % cols], inner);
    out.values[idx] = pm.coverage;
    out.argmin_delta[idx] = pm.argmin_delta;
  });
  return out;
}

double lambda_taylor(const StudyDesign& design, double p1, double p1p, double delta) {
  validate(design);
  if (!(p1 > 0.0 && p1 < 1.0) || !(p1p > 0.0 && p1p < 1.0)) {
    throw DomainError("p1 and p1' must lie in (0,1)");
  }
  const double cases = inverse_sum(design.n1, design.n2);
  const double r = inverse_sum(design.n1p, design.n2p) / cases;
  const double curvature = 1.0 / (p1 * (1.0 - p1)) + r / (p1p * (1.0 - p1p));
  return -(delta / std::sqrt(cases)) * std::sqrt(curvature);
}

std::vector<ScalingPoint> scaling_study(const StudyDesign& design,
                                        std::span<const std::int64_t> factors,
                                        double p1, double p1p, const ScanSettings& s) {
  std::vector<ScalingPoint> out;
  for (std::int64_t n : factors) {
    ScalingPoint pt;
    pt.factor = n;
    const StudyDesign scaled = design.scaled(n);
    const ScanGeometry g = scan_geometry(scaled, s.epsilon);
    if (!g.p1_range.contains(p1) || !g.p1p_range.contains(p1p)) {
      pt.notice = "(p1, p1') outside the scan rectangle for N = " + std::to_string(n);
    } else {
      pt.minimum = partial_min_coverage(scaled, p1, p1p, s);
      pt.evaluated = true;
    }
    out.push_back(pt);
  }
  return out;
}

}  // namespace pretestcov
