// pretestcov: command-line front end over the C API.
//
//   pretestcov coverage   --method asymptotic --p 0.692,0.596,0.02,0.02
//   pretestcov search-min --method mc --mode two_stage --out min.json
//   pretestcov contour    --out contour.csv
//   pretestcov scaling    --p1 0.5 --p1p 0.5
//   pretestcov geometry
//
// Exit codes: 0 success, 2 invalid arguments, 3 numerical failure, 1 other.

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pretestcov/pretestcov.h"

using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct CliError : std::runtime_error {
  CliError(int code_, const std::string& what) : std::runtime_error(what), code(code_) {}
  int code;
};

void check(ptc_status status) {
  if (status == PTC_OK) return;
  const std::string msg = std::string(ptc_status_string(status)) + ": " + ptc_last_error();
  switch (status) {
    case PTC_ERR_INVALID_ARGUMENT:
    case PTC_ERR_BUDGET_EXCEEDED:
      throw CliError(kExitUsage, msg);
    case PTC_ERR_NUMERICAL:
      throw CliError(kExitNumerical, msg);
    default:
      throw CliError(kExitOther, msg);
  }
}

using ConfigPtr = std::unique_ptr<ptc_config, decltype(&ptc_config_destroy)>;
using SearchPtr = std::unique_ptr<ptc_search, decltype(&ptc_search_destroy)>;
using ContourPtr = std::unique_ptr<ptc_contour, decltype(&ptc_contour_destroy)>;

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

json probs_json(const ptc_probs& p) { return json::array({p.p1, p.p1p, p.p2, p.p2p}); }

json design_json(const ptc_design& d) { return json::array({d.n1, d.n1p, d.n2, d.n2p}); }

// Options shared by every subcommand; defaults reproduce the reference
// analysis.
struct Common {
  std::vector<std::int64_t> design{1092, 467, 449, 488};
  double alpha = 0.05;
  double beta = 0.05;
  double epsilon = 0.02;
  double grid_step = 0.096;
  std::uint64_t seed = 20140101;
  unsigned workers = 0;
  double abs_tol = 1e-9;
  std::string out;
  std::string manifest;

  ptc_design to_design() const {
    if (design.size() != 4) throw CliError(kExitUsage, "--design needs four counts");
    return {design[0], design[1], design[2], design[3]};
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--design", c.design, "Sample sizes n1,n1',n2,n2'")
      ->delimiter(',')
      ->expected(4)
      ->capture_default_str();
  cmd->add_option("--alpha", c.alpha, "Nominal non-coverage")->capture_default_str();
  cmd->add_option("--beta", c.beta, "Pretest level")->capture_default_str();
  cmd->add_option("--epsilon", c.epsilon, "Parameter space margin")->capture_default_str();
  cmd->add_option("--grid-step", c.grid_step, "Grid step h")->capture_default_str();
  cmd->add_option("--seed", c.seed, "Random seed")
      ->envname("PRETEST_COVERAGE_SEED")
      ->capture_default_str();
  cmd->add_option("--workers", c.workers, "Worker threads (0: all cores)")
      ->capture_default_str();
  cmd->add_option("--abs-tol", c.abs_tol, "Quadrature absolute tolerance")
      ->capture_default_str();
  cmd->add_option("--out", c.out, "Output file (default: stdout)");
  cmd->add_option("--manifest", c.manifest,
                  "Run manifest path (default: <out>.manifest.json when --out is set)");
}

ConfigPtr make_config(const Common& c) {
  ptc_config* raw = nullptr;
  check(ptc_config_create(&raw));
  ConfigPtr cfg(raw, &ptc_config_destroy);
  check(ptc_config_set_alpha(cfg.get(), c.alpha));
  check(ptc_config_set_beta(cfg.get(), c.beta));
  check(ptc_config_set_epsilon(cfg.get(), c.epsilon));
  check(ptc_config_set_grid_step(cfg.get(), c.grid_step));
  check(ptc_config_set_seed(cfg.get(), c.seed));
  check(ptc_config_set_workers(cfg.get(), c.workers));
  ptc_config_values v{};
  check(ptc_config_get(cfg.get(), &v));
  check(ptc_config_set_quadrature(cfg.get(), c.abs_tol, v.quad_rel_tol,
                                  v.quad_max_subdivisions));
  return cfg;
}

json config_json(const ptc_config* cfg, const ptc_design& design) {
  ptc_config_values v{};
  check(ptc_config_get(cfg, &v));
  return json{{"design", design_json(design)},
              {"alpha", v.alpha},
              {"beta", v.beta},
              {"epsilon", v.epsilon},
              {"grid_step", v.grid_step},
              {"schedule",
               {{"stage1_reps", v.stage1_reps},
                {"stage2_reps", v.stage2_reps},
                {"stage3_reps", v.stage3_reps},
                {"keep", v.keep}}},
              {"seed", v.seed},
              {"quadrature",
               {{"abs_tol", v.quad_abs_tol},
                {"rel_tol", v.quad_rel_tol},
                {"max_subdivisions", v.quad_max_subdivisions}}},
              {"enumeration_budget", v.enumeration_budget},
              {"delta_steps", v.delta_steps}};
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw CliError(kExitOther, "cannot open " + path + " for writing");
  f << text;
  if (!f) throw CliError(kExitOther, "failed writing " + path);
}

class Run {
 public:
  Run(std::string command, const Common& common)
      : command_(std::move(command)),
        common_(common),
        start_(std::chrono::steady_clock::now()) {}

  // Writes the deterministic report (to --out or stdout) and the manifest.
  void finish(const json& config, const json& result, const std::string& summary,
              const std::optional<std::string>& body = std::nullopt) const {
    json report{{"command", command_},
                {"version", ptc_version()},
                {"config", config},
                {"seed", common_.seed},
                {"result", result}};
    if (body) {
      write_text(common_.out, *body);
    } else {
      write_text(common_.out, report.dump(2) + "\n");
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::string manifest_path = common_.manifest;
    if (manifest_path.empty() && !common_.out.empty()) {
      manifest_path = common_.out + ".manifest.json";
    }
    if (!manifest_path.empty()) {
      json manifest = report;
      manifest["output"] = common_.out;
      manifest["workers"] = common_.workers;
      manifest["duration_seconds"] = seconds;
      write_text(manifest_path, manifest.dump(2) + "\n");
    }
    if (!common_.out.empty()) std::cerr << summary << "\n";
  }

 private:
  std::string command_;
  const Common& common_;
  std::chrono::steady_clock::time_point start_;
};

ptc_mode parse_mode(const std::string& mode) {
  return mode == "no_pretest" ? PTC_MODE_NO_PRETEST : PTC_MODE_TWO_STAGE;
}

// ---- coverage ---------------------------------------------------------------

struct CoverageArgs {
  Common common;
  std::vector<double> p;
  std::string method = "asymptotic";
  std::string mode = "two_stage";
  std::uint64_t reps = 1000000;
  std::uint64_t budget = 10000000;
};

void run_coverage(const CoverageArgs& a) {
  Run run("coverage", a.common);
  if (a.p.size() != 4) throw CliError(kExitUsage, "--p needs four probabilities");
  const ptc_design design = a.common.to_design();
  const ptc_probs p{a.p[0], a.p[1], a.p[2], a.p[3]};
  const ptc_mode mode = parse_mode(a.mode);
  ConfigPtr cfg = make_config(a.common);
  check(ptc_config_set_enumeration_budget(cfg.get(), a.budget));

  json inputs{{"design", design_json(design)},
              {"p", probs_json(p)},
              {"alpha", a.common.alpha},
              {"beta", a.common.beta},
              {"mode", a.mode}};
  json result{{"method", a.method}, {"inputs", inputs}};
  double coverage = 0.0;
  if (a.method == "mc") {
    ptc_mc_estimate est{};
    check(ptc_mc_coverage(cfg.get(), design, p, mode, a.reps, a.common.seed, &est));
    coverage = est.coverage;
    result["coverage"] = est.coverage;
    result["std_err"] = est.std_err;
    result["reps"] = est.reps;
    result["seed"] = est.seed;
  } else if (a.method == "enumerate") {
    check(ptc_enumerate_coverage(cfg.get(), design, p, mode, &coverage));
    result["coverage"] = coverage;
  } else {
    double err = 0.0;
    check(ptc_asymptotic_coverage(cfg.get(), design, p, mode, &coverage, &err));
    result["coverage"] = coverage;
    result["quadrature_error"] = err;
  }
  result["coverage_6dp"] = fixed6(coverage);
  run.finish(config_json(cfg.get(), design), result, "coverage " + fixed6(coverage));
}

// ---- search-min ---------------------------------------------------------------

struct SearchArgs {
  Common common;
  std::string method = "asymptotic";
  std::string mode = "two_stage";
  std::uint64_t m1 = 10000, m2 = 200000, m3 = 1000000, keep = 10;
};

void run_search(const SearchArgs& a) {
  Run run("search-min", a.common);
  const ptc_design design = a.common.to_design();
  const ptc_mode mode = parse_mode(a.mode);
  ConfigPtr cfg = make_config(a.common);
  check(ptc_config_set_schedule(cfg.get(), a.m1, a.m2, a.m3, a.keep));

  ptc_search* raw = nullptr;
  if (a.method == "mc") {
    check(ptc_search_min_mc(cfg.get(), design, mode, &raw));
  } else {
    check(ptc_search_min_asymptotic(cfg.get(), design, mode, &raw));
  }
  SearchPtr search(raw, &ptc_search_destroy);

  const double min_value = ptc_search_min_value(search.get());
  json result{{"method", a.method},
              {"mode", a.mode},
              {"min_coverage", min_value},
              {"min_coverage_6dp", fixed6(min_value)},
              {"points_evaluated", ptc_search_points_evaluated(search.get())}};
  json argmins = json::array();
  for (size_t i = 0; i < ptc_search_argmin_count(search.get()); ++i) {
    ptc_probs p{};
    check(ptc_search_argmin(search.get(), i, &p));
    argmins.push_back(probs_json(p));
  }
  if (a.method == "mc") {
    result["argmin"] = argmins.at(0);
    json stages = json::array();
    for (size_t s = 0; s < ptc_search_stage_count(search.get()); ++s) {
      json cands = json::array();
      for (size_t i = 0; i < ptc_search_stage_candidate_count(search.get(), s); ++i) {
        ptc_probs p{};
        ptc_mc_estimate e{};
        check(ptc_search_stage_candidate(search.get(), s, i, &p, &e));
        cands.push_back({{"p", probs_json(p)},
                         {"coverage", e.coverage},
                         {"std_err", e.std_err}});
      }
      stages.push_back({{"stage", s + 1},
                        {"reps", ptc_search_stage_reps(search.get(), s)},
                        {"evaluated", ptc_search_stage_evaluated(search.get(), s)},
                        {"candidates", cands}});
    }
    result["stages"] = stages;
  } else {
    result["tie_band"] = ptc_search_tie_band(search.get());
    result["argmins"] = argmins;
    json failures = json::array();
    for (size_t i = 0; i < ptc_search_failure_count(search.get()); ++i) {
      ptc_probs p{};
      const char* msg = nullptr;
      check(ptc_search_failure(search.get(), i, &p, &msg));
      failures.push_back({{"p", probs_json(p)}, {"message", msg}});
    }
    result["failures"] = failures;
  }
  run.finish(config_json(cfg.get(), design), result, "min coverage " + fixed6(min_value));
}

// ---- contour ------------------------------------------------------------------

struct ContourArgs {
  Common common;
  std::size_t grid_steps = 32;
  std::uint64_t delta_steps = 80;
  std::int64_t scale = 1;
};

void run_contour(const ContourArgs& a) {
  Run run("contour", a.common);
  if (a.scale < 1) throw CliError(kExitUsage, "--scale must be >= 1");
  ptc_design design = a.common.to_design();
  design = {design.n1 * a.scale, design.n1p * a.scale, design.n2 * a.scale,
            design.n2p * a.scale};
  ConfigPtr cfg = make_config(a.common);
  check(ptc_config_set_delta_steps(cfg.get(), a.delta_steps));

  ptc_contour* raw = nullptr;
  check(ptc_contour_grid(cfg.get(), design, a.grid_steps, &raw));
  ContourPtr grid(raw, &ptc_contour_destroy);

  std::ostringstream csv;
  csv << "p1,p1p,min_coverage,argmin_delta\r\n";
  double max_value = 0.0;
  const size_t rows = ptc_contour_rows(grid.get());
  const size_t cols = ptc_contour_cols(grid.get());
  for (size_t i = 0; i < rows; ++i) {
    for (size_t j = 0; j < cols; ++j) {
      const double v = ptc_contour_value(grid.get(), i, j);
      max_value = std::max(max_value, v);
      csv << fixed6(ptc_contour_p1(grid.get(), i)) << ','
          << fixed6(ptc_contour_p1p(grid.get(), j)) << ',' << fixed6(v) << ','
          << fixed6(ptc_contour_argmin_delta(grid.get(), i, j)) << "\r\n";
    }
  }
  json config = config_json(cfg.get(), design);
  config["grid_steps"] = a.grid_steps;
  config["scale"] = a.scale;
  const json result{{"rows", rows}, {"cols", cols}, {"max_min_coverage", max_value}};
  run.finish(config, result, "contour " + std::to_string(rows) + "x" +
                                 std::to_string(cols) + ", max " + fixed6(max_value),
             csv.str());
}

// ---- scaling ------------------------------------------------------------------

struct ScalingArgs {
  Common common;
  double p1 = 0.5;
  double p1p = 0.5;
  std::vector<std::int64_t> factors{1, 2, 4, 8, 16};
  std::uint64_t delta_steps = 80;
};

void run_scaling(const ScalingArgs& a) {
  Run run("scaling", a.common);
  const ptc_design design = a.common.to_design();
  ConfigPtr cfg = make_config(a.common);
  check(ptc_config_set_delta_steps(cfg.get(), a.delta_steps));
  const size_t n = a.factors.size();
  std::vector<double> cov(n), delta(n);
  std::vector<int> evaluated(n);
  check(ptc_scaling_study(cfg.get(), design, a.factors.data(), n, a.p1, a.p1p, cov.data(),
                          delta.data(), evaluated.data()));
  json points = json::array();
  for (size_t i = 0; i < n; ++i) {
    if (evaluated[i]) {
      points.push_back({{"N", a.factors[i]},
                        {"evaluated", true},
                        {"min_coverage", cov[i]},
                        {"min_coverage_6dp", fixed6(cov[i])},
                        {"argmin_delta", delta[i]}});
    } else {
      const std::string notice =
          "(p1, p1') outside the scan rectangle for N = " + std::to_string(a.factors[i]);
      std::cerr << "notice: " << notice << "; skipped\n";
      points.push_back({{"N", a.factors[i]}, {"evaluated", false}, {"notice", notice}});
    }
  }
  json config = config_json(cfg.get(), design);
  config["p1"] = a.p1;
  config["p1p"] = a.p1p;
  const json result{{"points", points}};
  run.finish(config, result, "scaling study: " + std::to_string(n) + " designs");
}

// ---- geometry -----------------------------------------------------------------

void run_geometry(const Common& c) {
  Run run("geometry", c);
  const ptc_design design = c.to_design();
  ptc_geometry g{};
  check(ptc_scan_geometry(design, c.epsilon, &g));
  const json result{{"delta_cap", g.delta_cap},
                    {"r", g.r},
                    {"delta_cap_prime", g.delta_cap_prime},
                    {"delta_cap_6dp", fixed6(g.delta_cap)},
                    {"r_6dp", fixed6(g.r)},
                    {"delta_cap_prime_6dp", fixed6(g.delta_cap_prime)},
                    {"p1_range", {g.p1_lo, g.p1_hi}},
                    {"p1p_range", {g.p1p_lo, g.p1p_hi}}};
  const json config{{"design", design_json(design)}, {"epsilon", c.epsilon}};
  run.finish(config, result, "Delta " + fixed6(g.delta_cap) + ", r " + fixed6(g.r));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coverage of odds-ratio confidence intervals after a homogeneity pretest"};
  app.set_config("--config", "", "TOML/INI file with option defaults");
  app.set_version_flag("--version", std::string(ptc_version()));
  app.require_subcommand(1);

  const std::vector<std::string> modes{"two_stage", "no_pretest"};

  CoverageArgs cov;
  auto* cmd_cov = app.add_subcommand("coverage", "Coverage at one parameter point");
  add_common(cmd_cov, cov.common);
  cmd_cov->add_option("--p", cov.p, "Probabilities p1,p1',p2,p2'")
      ->delimiter(',')
      ->expected(4)
      ->required();
  cmd_cov->add_option("--method", cov.method)
      ->check(CLI::IsMember({"mc", "enumerate", "asymptotic"}))
      ->capture_default_str();
  cmd_cov->add_option("--mode", cov.mode)->check(CLI::IsMember(modes))->capture_default_str();
  cmd_cov->add_option("--reps", cov.reps, "Monte Carlo repetitions")->capture_default_str();
  cmd_cov->add_option("--budget", cov.budget, "Enumeration outcome budget")
      ->capture_default_str();

  SearchArgs srch;
  auto* cmd_search = app.add_subcommand("search-min", "Minimum coverage over the grid");
  add_common(cmd_search, srch.common);
  cmd_search->add_option("--method", srch.method)
      ->check(CLI::IsMember({"mc", "asymptotic"}))
      ->capture_default_str();
  cmd_search->add_option("--mode", srch.mode)->check(CLI::IsMember(modes))->capture_default_str();
  cmd_search->add_option("--m1,--reps", srch.m1, "Stage 1 repetitions per point")
      ->capture_default_str();
  cmd_search->add_option("--m2", srch.m2, "Stage 2 repetitions")->capture_default_str();
  cmd_search->add_option("--m3", srch.m3, "Stage 3 repetitions")->capture_default_str();
  cmd_search->add_option("--keep", srch.keep, "Points kept after stage 1")
      ->capture_default_str();

  ContourArgs cnt;
  auto* cmd_contour =
      app.add_subcommand("contour", "Partially-minimized coverage over the scan rectangle (CSV)");
  add_common(cmd_contour, cnt.common);
  cmd_contour->add_option("--grid-steps", cnt.grid_steps, "Cells per axis minus one")->capture_default_str();
  cmd_contour->add_option("--delta-steps", cnt.delta_steps, "Delta grid intervals")->capture_default_str();
  cmd_contour->add_option("--scale", cnt.scale, "Multiply every sample size by N")
      ->capture_default_str();

  ScalingArgs scl;
  auto* cmd_scaling =
      app.add_subcommand("scaling", "Partial minimum at fixed (p1, p1') for scaled designs");
  add_common(cmd_scaling, scl.common);
  cmd_scaling->add_option("--p1", scl.p1, "Case exposure probability, stratum 1")->capture_default_str();
  cmd_scaling->add_option("--p1p", scl.p1p, "Control exposure probability, stratum 1")->capture_default_str();
  cmd_scaling->add_option("--scale", scl.factors, "Scale factors N")
      ->delimiter(',')
      ->capture_default_str();
  cmd_scaling->add_option("--delta-steps", scl.delta_steps, "Delta grid intervals")->capture_default_str();

  Common geo;
  auto* cmd_geometry = app.add_subcommand("geometry", "Scan geometry Delta, r, Delta'");
  add_common(cmd_geometry, geo);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (cmd_cov->parsed()) run_coverage(cov);
    if (cmd_search->parsed()) run_search(srch);
    if (cmd_contour->parsed()) run_contour(cnt);
    if (cmd_scaling->parsed()) run_scaling(scl);
    if (cmd_geometry->parsed()) run_geometry(geo);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
  return kExitOk;
}
