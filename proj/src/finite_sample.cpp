#include "finite_sample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <boost/random/binomial_distribution.hpp>

#include "errors.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace pretestcov {

namespace {

// Per-margin lookup of the adjusted log odds and variance term for every
// possible count; the estimators depend on the design only.
struct MarginTable {
  std::int64_t n = 0;
  std::vector<double> logit;
  std::vector<double> var;

  explicit MarginTable(std::int64_t n_) : n(n_) {
    logit.resize(static_cast<std::size_t>(n) + 1);
    var.resize(static_cast<std::size_t>(n) + 1);
    for (std::int64_t y = 0; y <= n; ++y) {
      logit[static_cast<std::size_t>(y)] = adjusted_logit(y, n);
      var[static_cast<std::size_t>(y)] = adjusted_margin_variance(y, n);
    }
  }
};

struct DesignTables {
  MarginTable case1, control1, case2, control2;

  explicit DesignTables(const StudyDesign& d)
      : case1(d.n1), control1(d.n1p), case2(d.n2), control2(d.n2p) {}

  WoolfSummary summary(std::int64_t y1, std::int64_t y1p, std::int64_t y2,
                       std::int64_t y2p) const noexcept {
    const auto u = [](std::int64_t y) { return static_cast<std::size_t>(y); };
    return woolf_from_estimates(
        case1.logit[u(y1)] - control1.logit[u(y1p)],
        case1.var[u(y1)] + control1.var[u(y1p)],
        case2.logit[u(y2)] - control2.logit[u(y2p)],
        case2.var[u(y2)] + control2.var[u(y2p)]);
  }
};

bool covered(const WoolfSummary& s, const NormalQuantiles& q, IntervalMode mode,
             double theta1, double theta2) noexcept {
  const TwoStageIntervals iv = mode == IntervalMode::no_pretest
                                   ? separate_intervals(s, q)
                                   : select_intervals(s, q);
  return iv.theta1.contains(theta1) && iv.theta2.contains(theta2);
}

using Binomial = boost::random::binomial_distribution<std::int64_t, double>;

struct McPoint {
  const DesignTables& tables;
  NormalQuantiles q;
  IntervalMode mode;
  CellProbs p;
  double theta1, theta2;

  std::uint64_t run_block(const StreamKey& key, std::uint64_t reps) const {
    auto engine = make_engine(key);
    Binomial b1(tables.case1.n, p.p1), b1p(tables.control1.n, p.p1p);
    Binomial b2(tables.case2.n, p.p2), b2p(tables.control2.n, p.p2p);
    std::uint64_t hits = 0;
    for (std::uint64_t r = 0; r < reps; ++r) {
      const std::int64_t y1 = b1(engine);
      const std::int64_t y1p = b1p(engine);
      const std::int64_t y2 = b2(engine);
      const std::int64_t y2p = b2p(engine);
      if (covered(tables.summary(y1, y1p, y2, y2p), q, mode, theta1, theta2)) ++hits;
    }
    return hits;
  }

  std::uint64_t block_count(std::uint64_t reps) const {
    return (reps + kMcBlockSize - 1) / kMcBlockSize;
  }

  std::uint64_t block_reps(std::uint64_t reps, std::uint64_t block) const {
    return std::min(kMcBlockSize, reps - block * kMcBlockSize);
  }

  // Serial over blocks; used when the caller parallelises across points.
  std::uint64_t run(std::uint64_t seed, std::uint64_t stage, std::uint64_t point,
                    std::uint64_t reps) const {
    std::uint64_t hits = 0;
    for (std::uint64_t b = 0; b < block_count(reps); ++b) {
      hits += run_block({seed, stage, point, b}, block_reps(reps, b));
    }
    return hits;
  }

  std::uint64_t run_parallel(std::uint64_t seed, std::uint64_t stage,
                             std::uint64_t point, std::uint64_t reps,
                             unsigned workers) const {
    std::vector<std::uint64_t> hits(block_count(reps));
    parallel_for(hits.size(), workers, [&](std::size_t b) {
      hits[b] = run_block({seed, stage, point, b}, block_reps(reps, b));
    });
    return std::accumulate(hits.begin(), hits.end(), std::uint64_t{0});
  }
};

McEstimate make_estimate(std::uint64_t hits, std::uint64_t reps, std::uint64_t seed) {
  McEstimate e;
  e.reps = reps;
  e.seed = seed;
  e.coverage = static_cast<double>(hits) / static_cast<double>(reps);
  e.std_err = std::sqrt(e.coverage * (1.0 - e.coverage) / static_cast<double>(reps));
  return e;
}

// Neumaier's compensated summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

std::vector<double> binomial_log_pmf(std::int64_t n, double p) {
  std::vector<double> out(static_cast<std::size_t>(n) + 1);
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  const double lgn = std::lgamma(static_cast<double>(n) + 1.0);
  for (std::int64_t k = 0; k <= n; ++k) {
    const double kd = static_cast<double>(k);
    const double rest = static_cast<double>(n - k);
    out[static_cast<std::size_t>(k)] =
        lgn - std::lgamma(kd + 1.0) - std::lgamma(rest + 1.0) + kd * lp + rest * lq;
  }
  return out;
}

// Outcomes of one stratum with their joint log-probability.
struct StratumOutcome {
  std::int64_t y = 0;
  std::int64_t yp = 0;
  double log_prob = 0.0;
};

std::vector<StratumOutcome> stratum_outcomes(std::int64_t n, std::int64_t np,
                                             double p, double pp) {
  const auto lpmf = binomial_log_pmf(n, p);
  const auto lpmfp = binomial_log_pmf(np, pp);
  std::vector<StratumOutcome> out;
  out.reserve(lpmf.size() * lpmfp.size());
  for (std::int64_t y = 0; y <= n; ++y) {
    for (std::int64_t yp = 0; yp <= np; ++yp) {
      out.push_back({y, yp,
                     lpmf[static_cast<std::size_t>(y)] + lpmfp[static_cast<std::size_t>(yp)]});
    }
  }
  return out;
}

}  // namespace

McEstimate mc_coverage(const StudyDesign& design, const CellProbs& p,
                       const AnalysisConfig& config, IntervalMode mode,
                       std::uint64_t reps, std::uint64_t seed) {
  validate(design);
  validate(p);
  if (reps == 0) throw DomainError("Monte Carlo repetitions must be >= 1");
  const DesignTables tables(design);
  const McPoint point{tables, normal_quantiles(config.alpha, config.beta), mode, p,
                      p.theta1(), p.theta2()};
  const std::uint64_t hits = point.run_parallel(seed, 0, 0, reps, config.workers);
  return make_estimate(hits, reps, seed);
}

double enumerate_coverage(const StudyDesign& design, const CellProbs& p,
                          const AnalysisConfig& config, IntervalMode mode,
                          const EnumerationOptions& options) {
  validate(design);
  validate(p);
  const std::uint64_t total = design.outcome_count();
  if (total > options.max_outcomes) {
    throw BudgetExceeded("exact enumeration needs " + std::to_string(total) +
                         " outcomes, budget is " +
                         std::to_string(options.max_outcomes) +
                         "; use Monte Carlo instead");
  }
  const NormalQuantiles q = normal_quantiles(config.alpha, config.beta);
  const DesignTables tables(design);
  const double theta1 = p.theta1();
  const double theta2 = p.theta2();
  const auto first = stratum_outcomes(design.n1, design.n1p, p.p1, p.p1p);
  const auto second = stratum_outcomes(design.n2, design.n2p, p.p2, p.p2p);

  // One partial sum per stratum-1 outcome, combined in index order.
  std::vector<double> partial(first.size());
  parallel_for(first.size(), config.workers, [&](std::size_t i) {
    const StratumOutcome& a = first[i];
    CompensatedSum sum;
    for (const StratumOutcome& b : second) {
      if (options.always_covered ||
          covered(tables.summary(a.y, a.yp, b.y, b.yp), q, mode, theta1, theta2)) {
        sum.add(std::exp(a.log_prob + b.log_prob));
      }
    }
    partial[i] = sum.value();
  });
  CompensatedSum total_sum;
  for (double v : partial) total_sum.add(v);
  return total_sum.value();
}

std::vector<double> grid_axis(double epsilon, double h) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw DomainError("epsilon must lie in (0, 0.5)");
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("grid step must be positive");
  const double span = 1.0 - 2.0 * epsilon;
  const auto steps = static_cast<std::size_t>(std::floor(span / h + 1e-9));
  std::vector<double> axis(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    axis[k] = std::round((epsilon + static_cast<double>(k) * h) * 1e12) / 1e12;
  }
  return axis;
}

CellProbs grid_point(const std::vector<double>& axis, std::size_t index) {
  const std::size_t m = axis.size();
  CellProbs p;
  p.p2p = axis[index % m];
  index /= m;
  p.p2 = axis[index % m];
  index /= m;
  p.p1p = axis[index % m];
  index /= m;
  p.p1 = axis[index % m];
  return p;
}

SearchResult min_coverage_search(const StudyDesign& design,
                                 const AnalysisConfig& config, IntervalMode mode) {
  validate(design);
  validate(config);
  const auto axis = grid_axis(config.epsilon, config.grid_step);
  const std::size_t m = axis.size();
  const std::size_t n_points = m * m * m * m;
  const DesignTables tables(design);
  const NormalQuantiles q = normal_quantiles(config.alpha, config.beta);
  const McSchedule& sched = config.schedule;

  const auto make_point = [&](const CellProbs& p) {
    return McPoint{tables, q, mode, p, p.theta1(), p.theta2()};
  };
  const auto order = [](const StageCandidate& a, const StageCandidate& b) {
    if (a.estimate.coverage != b.estimate.coverage) {
      return a.estimate.coverage < b.estimate.coverage;
    }
    return a.grid_index < b.grid_index;
  };

  SearchResult result;

  // Stage 1: the whole grid, parallel across points.
  std::vector<StageCandidate> all(n_points);
  parallel_for(n_points, config.workers, [&](std::size_t i) {
    const CellProbs p = grid_point(axis, i);
    const std::uint64_t hits = make_point(p).run(config.seed, 1, i, sched.stage1_reps);
    all[i] = {i, p, make_estimate(hits, sched.stage1_reps, config.seed)};
  });
  const std::size_t keep = std::min(sched.keep, n_points);
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep),
                    all.end(), order);
  all.resize(keep);
  result.stages.push_back({sched.stage1_reps, n_points, all});

  // Stage 2 and 3 re-estimate with fresh streams, parallel within a point.
  const auto reestimate = [&](std::vector<StageCandidate> cands, std::uint64_t stage,
                              std::uint64_t reps) {
    for (auto& c : cands) {
      const std::uint64_t hits =
          make_point(c.p).run_parallel(config.seed, stage, c.grid_index, reps,
                                       config.workers);
      c.estimate = make_estimate(hits, reps, config.seed);
    }
    std::sort(cands.begin(), cands.end(), order);
    return cands;
  };

  auto second = reestimate(all, 2, sched.stage2_reps);
  result.stages.push_back({sched.stage2_reps, second.size(), second});

  auto third = reestimate({second.front()}, 3, sched.stage3_reps);
  result.stages.push_back({sched.stage3_reps, 1, third});

  result.min_coverage = third.front().estimate.coverage;
  result.argmin = third.front().p;
  result.argmin_index = third.front().grid_index;
  return result;
}

}  // namespace pretestcov
