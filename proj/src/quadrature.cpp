#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "errors.hpp"

namespace pretestcov {

namespace {

// Kronrod abscissae (descending, last is the centre) and weights; Gauss
// weights belong to the odd-indexed abscissae.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
  double a = 0.0;
  double b = 0.0;
  double value = 0.0;
  double error = 0.0;

  friend bool operator<(const Piece& x, const Piece& y) { return x.error < y.error; }
};

Piece gauss_kronrod15(const std::function<double(double)>& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(centre);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  double abs_sum = std::abs(kronrod);
  double fv[7][2];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(centre - dx);
    const double f2 = f(centre + dx);
    fv[j][0] = f1;
    fv[j][1] = f2;
    kronrod += kWgk[j] * (f1 + f2);
    abs_sum += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  const double mean = 0.5 * kronrod;
  double asc = kWgk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) {
    asc += kWgk[j] * (std::abs(fv[j][0] - mean) + std::abs(fv[j][1] - mean));
  }
  const double resasc = asc * std::abs(half);
  double err = std::abs((kronrod - gauss) * half);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  const double resabs = abs_sum * std::abs(half);
  const double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(50.0 * eps * resabs, err);
  }
  return {a, b, kronrod * half, err};
}

}  // namespace

void validate(const QuadratureSpec& spec) {
  if (!(spec.abs_tol > 0.0) || !(spec.rel_tol > 0.0)) {
    throw DomainError("quadrature tolerances must be positive");
  }
  if (spec.max_subdivisions < 1) {
    throw DomainError("quadrature max_subdivisions must be >= 1");
  }
}

QuadratureResult integrate_piecewise(const std::function<double(double)>& f,
                                     std::span<const double> breaks,
                                     const QuadratureSpec& spec) {
  validate(spec);
  if (breaks.size() < 2) return {};
  std::priority_queue<Piece> heap;
  double value = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i] < breaks[i + 1])) continue;
    Piece p = gauss_kronrod15(f, breaks[i], breaks[i + 1]);
    value += p.value;
    error += p.error;
    heap.push(p);
  }
  int subdivisions = 0;
  const auto done = [&] {
    return error <= std::max(spec.abs_tol, spec.rel_tol * std::abs(value));
  };
  while (!done()) {
    if (subdivisions >= spec.max_subdivisions || heap.empty()) {
      throw NumericalError("quadrature did not converge: error estimate " +
                               std::to_string(error) + " after " +
                               std::to_string(subdivisions) + " subdivisions",
                           error);
    }
    const Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Piece left = gauss_kronrod15(f, worst.a, mid);
    const Piece right = gauss_kronrod15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++subdivisions;
  }
  // Re-sum the final pieces to shed the drift of the running updates.
  value = 0.0;
  error = 0.0;
  std::vector<Piece> pieces;
  while (!heap.empty()) {
    pieces.push_back(heap.top());
    heap.pop();
  }
  std::sort(pieces.begin(), pieces.end(),
            [](const Piece& x, const Piece& y) { return x.a < y.a; });
  for (const Piece& p : pieces) {
    value += p.value;
    error += p.error;
  }
  return {value, error, subdivisions};
}

}  // namespace pretestcov
