#include "pretestcov/pretestcov.h"

#include <cmath>
#include <exception>
#include <limits>
#include <new>
#include <string>
#include <variant>
#include <vector>

#include "asymptotic.hpp"
#include "boundary_scan.hpp"
#include "core_model.hpp"
#include "errors.hpp"
#include "finite_sample.hpp"

#ifndef PRETESTCOV_VERSION
#define PRETESTCOV_VERSION "0.0.0"
#endif

using namespace pretestcov;

struct ptc_config {
  AnalysisConfig analysis;
  QuadratureSpec quad;
  std::uint64_t enumeration_budget = EnumerationOptions{}.max_outcomes;
  std::size_t delta_steps = ScanSettings{}.delta_steps;

  ScanSettings scan() const {
    return {analysis.epsilon, analysis.alpha, analysis.beta, delta_steps, quad,
            analysis.workers};
  }
};

struct ptc_search {
  std::variant<SearchResult, GridMinimum> result;
};

struct ptc_contour {
  ContourGrid grid;
};

namespace {

thread_local std::string last_error;

ptc_status fail(ptc_status status, const char* message) {
  last_error = message;
  return status;
}

// Runs body, translating exceptions into status codes.
template <class Body>
ptc_status guarded(Body&& body) {
  try {
    body();
    last_error.clear();
    return PTC_OK;
  } catch (const DomainError& e) {
    return fail(PTC_ERR_INVALID_ARGUMENT, e.what());
  } catch (const NumericalError& e) {
    return fail(PTC_ERR_NUMERICAL, e.what());
  } catch (const BudgetExceeded& e) {
    return fail(PTC_ERR_BUDGET_EXCEEDED, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PTC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PTC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PTC_ERR_INTERNAL, "unknown error");
  }
}

template <class... Ptrs>
bool any_null(const Ptrs*... ptrs) {
  return ((ptrs == nullptr) || ...);
}

ptc_status null_argument() { return fail(PTC_ERR_NULL_POINTER, "null pointer argument"); }

StudyDesign to_cpp(ptc_design d) { return {d.n1, d.n1p, d.n2, d.n2p}; }
CellProbs to_cpp(ptc_probs p) { return {p.p1, p.p1p, p.p2, p.p2p}; }
ObservedTables to_cpp(ptc_tables t) { return {t.y1, t.y1p, t.y2, t.y2p}; }
IntervalMode to_cpp(ptc_mode m) {
  switch (m) {
    case PTC_MODE_TWO_STAGE:
      return IntervalMode::two_stage;
    case PTC_MODE_NO_PRETEST:
      return IntervalMode::no_pretest;
  }
  throw DomainError("unknown interval mode");
}

ptc_probs to_c(const CellProbs& p) { return {p.p1, p.p1p, p.p2, p.p2p}; }
ptc_interval to_c(const Interval& i) { return {i.lo, i.hi, i.empty ? 1 : 0}; }
ptc_mc_estimate to_c(const McEstimate& e) { return {e.coverage, e.std_err, e.reps, e.seed}; }

const SearchStage* stage_of(const ptc_search* s, size_t stage) {
  if (s == nullptr) return nullptr;
  const auto* mc = std::get_if<SearchResult>(&s->result);
  if (mc == nullptr || stage >= mc->stages.size()) return nullptr;
  return &mc->stages[stage];
}

}  // namespace

extern "C" {

const char* ptc_version(void) { return PRETESTCOV_VERSION; }

const char* ptc_status_string(ptc_status status) {
  switch (status) {
    case PTC_OK:
      return "ok";
    case PTC_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case PTC_ERR_NUMERICAL:
      return "numerical failure";
    case PTC_ERR_BUDGET_EXCEEDED:
      return "enumeration budget exceeded";
    case PTC_ERR_NULL_POINTER:
      return "null pointer";
    case PTC_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

const char* ptc_last_error(void) { return last_error.c_str(); }

ptc_status ptc_config_create(ptc_config** out) {
  if (out == nullptr) return null_argument();
  return guarded([&] { *out = new ptc_config(); });
}

void ptc_config_destroy(ptc_config* config) { delete config; }

ptc_status ptc_config_get(const ptc_config* c, ptc_config_values* out) {
  if (any_null(c, out)) return null_argument();
  const auto& a = c->analysis;
  *out = {a.alpha,
          a.beta,
          a.epsilon,
          a.grid_step,
          a.schedule.stage1_reps,
          a.schedule.stage2_reps,
          a.schedule.stage3_reps,
          a.schedule.keep,
          a.seed,
          a.workers,
          c->quad.abs_tol,
          c->quad.rel_tol,
          c->quad.max_subdivisions,
          c->enumeration_budget,
          c->delta_steps};
  last_error.clear();
  return PTC_OK;
}

ptc_status ptc_config_set_alpha(ptc_config* c, double alpha) {
  if (c == nullptr) return null_argument();
  if (!(alpha > 0.0 && alpha < 1.0)) {
    return fail(PTC_ERR_INVALID_ARGUMENT, "alpha must lie in (0,1)");
  }
  c->analysis.alpha = alpha;
  return PTC_OK;
}

ptc_status ptc_config_set_beta(ptc_config* c, double beta) {
  if (c == nullptr) return null_argument();
  if (!(beta >= 0.0 && beta <= 1.0)) {
    return fail(PTC_ERR_INVALID_ARGUMENT, "beta must lie in [0,1]");
  }
  c->analysis.beta = beta;
  return PTC_OK;
}

ptc_status ptc_config_set_epsilon(ptc_config* c, double epsilon) {
  if (c == nullptr) return null_argument();
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    return fail(PTC_ERR_INVALID_ARGUMENT, "epsilon must lie in (0, 0.5)");
  }
  c->analysis.epsilon = epsilon;
  return PTC_OK;
}

ptc_status ptc_config_set_grid_step(ptc_config* c, double h) {
  if (c == nullptr) return null_argument();
  if (!(h > 0.0) || !std::isfinite(h)) {
    return fail(PTC_ERR_INVALID_ARGUMENT, "grid step must be positive");
  }
  c->analysis.grid_step = h;
  return PTC_OK;
}

ptc_status ptc_config_set_schedule(ptc_config* c, uint64_t m1, uint64_t m2, uint64_t m3,
                                   uint64_t keep) {
  if (c == nullptr) return null_argument();
  if (m1 < 1 || m2 < 1 || m3 < 1 || keep < 1) {
    return fail(PTC_ERR_INVALID_ARGUMENT,
                "schedule repetitions and keep count must be >= 1");
  }
  c->analysis.schedule = {m1, m2, m3, static_cast<std::size_t>(keep)};
  return PTC_OK;
}

ptc_status ptc_config_set_seed(ptc_config* c, uint64_t seed) {
  if (c == nullptr) return null_argument();
  c->analysis.seed = seed;
  return PTC_OK;
}

ptc_status ptc_config_set_workers(ptc_config* c, unsigned workers) {
  if (c == nullptr) return null_argument();
  c->analysis.workers = workers;
  return PTC_OK;
}

ptc_status ptc_config_set_quadrature(ptc_config* c, double abs_tol, double rel_tol,
                                     int max_subdivisions) {
  if (c == nullptr) return null_argument();
  return guarded([&] {
    const QuadratureSpec spec{abs_tol, rel_tol, max_subdivisions};
    validate(spec);
    c->quad = spec;
  });
}

ptc_status ptc_config_set_enumeration_budget(ptc_config* c, uint64_t max_outcomes) {
  if (c == nullptr) return null_argument();
  c->enumeration_budget = max_outcomes;
  return PTC_OK;
}

ptc_status ptc_config_set_delta_steps(ptc_config* c, uint64_t steps) {
  if (c == nullptr) return null_argument();
  c->delta_steps = static_cast<std::size_t>(steps);
  return PTC_OK;
}

ptc_status ptc_adjusted_props(ptc_design design, ptc_tables tables, double out[4]) {
  if (out == nullptr) return null_argument();
  return guarded([&] {
    const auto p = adjusted_props(to_cpp(design), to_cpp(tables));
    for (int i = 0; i < 4; ++i) out[i] = p[static_cast<std::size_t>(i)];
  });
}

ptc_status ptc_woolf_summary(ptc_design design, ptc_tables tables, ptc_woolf* out) {
  if (out == nullptr) return null_argument();
  return guarded([&] {
    const WoolfSummary s = woolf_summary(to_cpp(design), to_cpp(tables));
    *out = {s.theta_hat1, s.theta_hat2, s.sigma_hat_sq1,
            s.sigma_hat_sq2, s.t_hat,   s.theta_hat_pooled};
  });
}

ptc_status ptc_normal_quantiles(double alpha, double beta, double* c_alpha,
                                double* c_tilde_alpha, double* c_beta) {
  if (any_null(c_alpha, c_tilde_alpha, c_beta)) return null_argument();
  return guarded([&] {
    const NormalQuantiles q = normal_quantiles(alpha, beta);
    *c_alpha = q.c_alpha;
    *c_tilde_alpha = q.c_tilde_alpha;
    *c_beta = q.c_beta;
  });
}

ptc_status ptc_two_stage_intervals(const ptc_config* c, ptc_design design,
                                   ptc_tables tables, ptc_intervals* out) {
  if (any_null(c, out)) return null_argument();
  return guarded([&] {
    const TwoStageIntervals iv =
        two_stage_intervals(to_cpp(design), to_cpp(tables), c->analysis);
    *out = {to_c(iv.theta1), to_c(iv.theta2), iv.rejected ? 1 : 0};
  });
}

ptc_status ptc_mc_coverage(const ptc_config* c, ptc_design design, ptc_probs p,
                           ptc_mode mode, uint64_t reps, uint64_t seed,
                           ptc_mc_estimate* out) {
  if (any_null(c, out)) return null_argument();
  return guarded([&] {
    *out = to_c(mc_coverage(to_cpp(design), to_cpp(p), c->analysis, to_cpp(mode), reps,
                            seed));
  });
}

ptc_status ptc_enumerate_coverage(const ptc_config* c, ptc_design design, ptc_probs p,
                                  ptc_mode mode, double* out) {
  if (any_null(c, out)) return null_argument();
  return guarded([&] {
    EnumerationOptions opts;
    opts.max_outcomes = c->enumeration_budget;
    *out = enumerate_coverage(to_cpp(design), to_cpp(p), c->analysis, to_cpp(mode), opts);
  });
}

ptc_status ptc_asymptotic_coverage(const ptc_config* c, ptc_design design, ptc_probs p,
                                   ptc_mode mode, double* out, double* abs_error) {
  if (any_null(c, out)) return null_argument();
  return guarded([&] {
    const StudyDesign d = to_cpp(design);
    const CellProbs cp = to_cpp(p);
    const auto& a = c->analysis;
    double err = 0.0;
    if (to_cpp(mode) == IntervalMode::no_pretest) {
      *out = asymptotic_no_pretest_coverage(d, cp, a.alpha);
    } else {
      const AsymptoticParams prm = asymptotic_params(d, cp);
      const RejectBranch rb = reject_branch(prm, a.alpha, a.beta, c->quad);
      err = rb.integral.abs_error;
      *out = std::min(1.0, accept_branch_prob(prm, a.alpha, a.beta) + rb.probability);
    }
    if (abs_error != nullptr) *abs_error = err;
  });
}

ptc_status ptc_search_min_mc(const ptc_config* c, ptc_design design, ptc_mode mode,
                             ptc_search** out) {
  if (any_null(c, out)) return null_argument();
  return guarded([&] {
    *out = new ptc_search{min_coverage_search(to_cpp(design), c->analysis, to_cpp(mode))};
  });
}

ptc_status ptc_search_min_asymptotic(const ptc_config* c, ptc_design design,
                                     ptc_mode mode, ptc_search** out) {
  if (any_null(c, out)) return null_argument();
  return guarded([&] {
    const auto& a = c->analysis;
    *out = new ptc_search{asymptotic_grid_min(to_cpp(design), a.alpha, a.beta, a.epsilon,
                                              a.grid_step, c->quad, to_cpp(mode),
                                              a.workers)};
  });
}

void ptc_search_destroy(ptc_search* s) { delete s; }

double ptc_search_min_value(const ptc_search* s) {
  if (s == nullptr) return std::numeric_limits<double>::quiet_NaN();
  if (const auto* mc = std::get_if<SearchResult>(&s->result)) return mc->min_coverage;
  return std::get<GridMinimum>(s->result).min_coverage;
}

size_t ptc_search_argmin_count(const ptc_search* s) {
  if (s == nullptr) return 0;
  if (std::holds_alternative<SearchResult>(s->result)) return 1;
  return std::get<GridMinimum>(s->result).argmins.size();
}

ptc_status ptc_search_argmin(const ptc_search* s, size_t index, ptc_probs* out) {
  if (any_null(s, out)) return null_argument();
  if (const auto* mc = std::get_if<SearchResult>(&s->result)) {
    if (index != 0) return fail(PTC_ERR_INVALID_ARGUMENT, "argmin index out of range");
    *out = to_c(mc->argmin);
    return PTC_OK;
  }
  const auto& g = std::get<GridMinimum>(s->result);
  if (index >= g.argmins.size()) {
    return fail(PTC_ERR_INVALID_ARGUMENT, "argmin index out of range");
  }
  *out = to_c(g.argmins[index]);
  return PTC_OK;
}

double ptc_search_tie_band(const ptc_search* s) {
  if (s == nullptr) return std::numeric_limits<double>::quiet_NaN();
  if (const auto* g = std::get_if<GridMinimum>(&s->result)) return g->tie_band;
  return 0.0;
}

uint64_t ptc_search_points_evaluated(const ptc_search* s) {
  if (s == nullptr) return 0;
  if (const auto* g = std::get_if<GridMinimum>(&s->result)) return g->evaluated;
  const auto& mc = std::get<SearchResult>(s->result);
  return mc.stages.empty() ? 0 : mc.stages.front().evaluated;
}

size_t ptc_search_stage_count(const ptc_search* s) {
  if (s == nullptr) return 0;
  if (const auto* mc = std::get_if<SearchResult>(&s->result)) return mc->stages.size();
  return 0;
}

uint64_t ptc_search_stage_reps(const ptc_search* s, size_t stage) {
  const SearchStage* st = stage_of(s, stage);
  return st == nullptr ? 0 : st->reps;
}

uint64_t ptc_search_stage_evaluated(const ptc_search* s, size_t stage) {
  const SearchStage* st = stage_of(s, stage);
  return st == nullptr ? 0 : st->evaluated;
}

size_t ptc_search_stage_candidate_count(const ptc_search* s, size_t stage) {
  const SearchStage* st = stage_of(s, stage);
  return st == nullptr ? 0 : st->candidates.size();
}

ptc_status ptc_search_stage_candidate(const ptc_search* s, size_t stage, size_t index,
                                      ptc_probs* p, ptc_mc_estimate* estimate) {
  if (any_null(s, p, estimate)) return null_argument();
  const SearchStage* st = stage_of(s, stage);
  if (st == nullptr || index >= st->candidates.size()) {
    return fail(PTC_ERR_INVALID_ARGUMENT, "stage or candidate index out of range");
  }
  *p = to_c(st->candidates[index].p);
  *estimate = to_c(st->candidates[index].estimate);
  return PTC_OK;
}

size_t ptc_search_failure_count(const ptc_search* s) {
  if (s == nullptr) return 0;
  if (const auto* g = std::get_if<GridMinimum>(&s->result)) return g->failures.size();
  return 0;
}

ptc_status ptc_search_failure(const ptc_search* s, size_t index, ptc_probs* p,
                              const char** message) {
  if (any_null(s, p, message)) return null_argument();
  const auto* g = std::get_if<GridMinimum>(&s->result);
  if (g == nullptr || index >= g->failures.size()) {
    return fail(PTC_ERR_INVALID_ARGUMENT, "failure index out of range");
  }
  *p = to_c(g->failures[index].p);
  *message = g->failures[index].message.c_str();
  return PTC_OK;
}

ptc_status ptc_scan_geometry(ptc_design design, double epsilon, ptc_geometry* out) {
  if (out == nullptr) return null_argument();
  return guarded([&] {
    const ScanGeometry g = scan_geometry(to_cpp(design), epsilon);
    *out = {g.delta_cap,    g.r,           g.delta_cap_prime, g.p1_range.lo,
            g.p1_range.hi, g.p1p_range.lo, g.p1p_range.hi};
  });
}

ptc_status ptc_partial_min_coverage(const ptc_config* c, ptc_design design, double p1,
                                    double p1p, ptc_partial_min* out) {
  if (any_null(c, out)) return null_argument();
  return guarded([&] {
    const PartialMinimum pm = partial_min_coverage(to_cpp(design), p1, p1p, c->scan());
    *out = {pm.coverage, pm.argmin_delta};
  });
}

ptc_status ptc_lambda_taylor(ptc_design design, double p1, double p1p, double delta,
                             double* out) {
  if (out == nullptr) return null_argument();
  return guarded([&] { *out = lambda_taylor(to_cpp(design), p1, p1p, delta); });
}

ptc_status ptc_contour_grid(const ptc_config* c, ptc_design design, size_t grid_steps,
                            ptc_contour** out) {
  if (any_null(c, out)) return null_argument();
  return guarded(
      [&] { *out = new ptc_contour{contour_grid(to_cpp(design), grid_steps, c->scan())}; });
}

void ptc_contour_destroy(ptc_contour* contour) { delete contour; }

size_t ptc_contour_rows(const ptc_contour* c) {
  return c == nullptr ? 0 : c->grid.p1_values.size();
}

size_t ptc_contour_cols(const ptc_contour* c) {
  return c == nullptr ? 0 : c->grid.p1p_values.size();
}

double ptc_contour_p1(const ptc_contour* c, size_t row) {
  if (c == nullptr || row >= c->grid.p1_values.size()) return std::nan("");
  return c->grid.p1_values[row];
}

double ptc_contour_p1p(const ptc_contour* c, size_t col) {
  if (c == nullptr || col >= c->grid.p1p_values.size()) return std::nan("");
  return c->grid.p1p_values[col];
}

double ptc_contour_value(const ptc_contour* c, size_t row, size_t col) {
  if (c == nullptr || row >= ptc_contour_rows(c) || col >= ptc_contour_cols(c)) {
    return std::nan("");
  }
  return c->grid.at(row, col);
}

double ptc_contour_argmin_delta(const ptc_contour* c, size_t row, size_t col) {
  if (c == nullptr || row >= ptc_contour_rows(c) || col >= ptc_contour_cols(c)) {
    return std::nan("");
  }
  return c->grid.delta_at(row, col);
}

ptc_status ptc_scaling_study(const ptc_config* c, ptc_design design,
                             const int64_t* factors, size_t count, double p1,
                             double p1p, double* coverage, double* argmin_delta,
                             int* evaluated) {
  if (any_null(c, factors, coverage, argmin_delta, evaluated)) return null_argument();
  return guarded([&] {
    const std::vector<std::int64_t> ns(factors, factors + count);
    const auto points = scaling_study(to_cpp(design), ns, p1, p1p, c->scan());
    for (size_t i = 0; i < count; ++i) {
      evaluated[i] = points[i].evaluated ? 1 : 0;
      coverage[i] = points[i].evaluated ? points[i].minimum.coverage : std::nan("");
      argmin_delta[i] = points[i].evaluated ? points[i].minimum.argmin_delta : std::nan("");
    }
  });
}

}  // extern "C"
