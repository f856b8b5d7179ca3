// Acceptance suite: one PASS/FAIL line per criterion. Exit status is 0 only
// when every criterion passes.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <pretestcov/pretestcov.h>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// ---- pinned tolerances -------------------------------------------------------

constexpr double kGridMinTarget = 0.134847;
constexpr double kGridMinTol = 2e-4;
constexpr double kMcTwoStageLo = 0.121, kMcTwoStageHi = 0.141;
constexpr double kMcReducedLo = 0.11, kMcReducedHi = 0.16;
constexpr double kMcNoPretestLo = 0.944, kMcNoPretestHi = 0.958;
constexpr double kPointAgreement = 0.01;
constexpr double kIdentityTol = 1e-9;
constexpr double kSeBound = 3.0;
constexpr double kMirrorTol = 1e-6;
constexpr double kScalingTail = 0.005;
constexpr double kHarmfulCeiling = 0.5;

const ptc_design kRef{1092, 467, 449, 488};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int digits = 6) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << x;
  return s.str();
}

std::string sci(double x) {
  std::ostringstream s;
  s.precision(2);
  s << std::scientific << x;
  return s.str();
}

void check(ptc_status st) {
  if (st != PTC_OK) {
    throw std::runtime_error(std::string(ptc_status_string(st)) + ": " + ptc_last_error());
  }
}

struct Config {
  ptc_config* ptr = nullptr;
  Config() { check(ptc_config_create(&ptr)); }
  ~Config() { ptc_config_destroy(ptr); }
  Config(const Config&) = delete;
  Config& operator=(const Config&) = delete;
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PRETESTCOV_CLI) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir(TEST_SCRATCH_DIR);
  fs::create_directories(dir);
  return dir / name;
}

json cli_json(const std::string& args, const std::string& name) {
  const fs::path out = scratch(name);
  fs::remove(out);
  const int code = run_cli(args + " --out " + out.string());
  if (code != 0) throw std::runtime_error("pretestcov " + args + " exited with " +
                                          std::to_string(code));
  return json::parse(slurp(out));
}

// Large-sample model simulated directly: independent normal estimates with
// known variances, then the two-stage rule. Quantiles by bisection on erfc.
struct NormalModel {
  double coverage;
  double std_err;
};

double central_quantile(double level) {
  double lo = 0.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (1.0 - std::erfc(mid / std::sqrt(2.0)) < level ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

NormalModel normal_model_mc(const ptc_design& d, const ptc_probs& p, double alpha, double beta,
                            std::uint64_t reps, std::uint64_t seed) {
  const auto var = [](double n, double q, double np, double qp) {
    return 1.0 / (n * q * (1 - q)) + 1.0 / (np * qp * (1 - qp));
  };
  const auto logit = [](double q) { return std::log(q / (1 - q)); };
  const double v1 = var(static_cast<double>(d.n1), p.p1, static_cast<double>(d.n1p), p.p1p);
  const double v2 = var(static_cast<double>(d.n2), p.p2, static_cast<double>(d.n2p), p.p2p);
  const double th1 = logit(p.p1) - logit(p.p1p);
  const double th2 = logit(p.p2) - logit(p.p2p);
  const double c_a = central_quantile(1.0 - alpha);
  const double c_t = central_quantile(std::sqrt(1.0 - alpha));
  const double c_b = central_quantile(1.0 - beta);
  const double w = 1.0 / (1.0 / v1 + 1.0 / v2);
  const double s1 = std::sqrt(v1), s2 = std::sqrt(v2), st = std::sqrt(v1 + v2);
  const double half = c_a * std::sqrt(w);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::uint64_t hits = 0;
  for (std::uint64_t r = 0; r < reps; ++r) {
    const double e1 = th1 + s1 * z(rng);
    const double e2 = th2 + s2 * z(rng);
    bool ok;
    if (std::abs(e1 - e2) / st <= c_b) {
      const double pooled = w * (e1 / v1 + e2 / v2);
      ok = std::abs(th1 - pooled) <= half && std::abs(th2 - pooled) <= half;
    } else {
      ok = std::abs(th1 - e1) <= c_t * s1 && std::abs(th2 - e2) <= c_t * s2;
    }
    hits += ok ? 1 : 0;
  }
  const double c = static_cast<double>(hits) / static_cast<double>(reps);
  return {c, std::sqrt(c * (1 - c) / static_cast<double>(reps))};
}

// |estimate - exact| in units of the binomial standard error at the exact
// value; the plug-in error is 0 when every replicate is covered.
double z_score(double exact, double estimate, std::uint64_t reps) {
  const double diff = std::abs(estimate - exact);
  const double se = std::sqrt(exact * (1.0 - exact) / static_cast<double>(reps));
  if (se == 0.0) return diff == 0.0 ? 0.0 : INFINITY;
  return diff / se;
}

bool same_point(const json& a, const std::array<double, 4>& b) {
  for (std::size_t i = 0; i < 4; ++i) {
    if (std::abs(a.at(i).get<double>() - b[i]) > 1e-12) return false;
  }
  return true;
}

// ---- criteria -------------------------------------------------------------------

Outcome grid_minimum() {
  const json j = cli_json("search-min --method asymptotic", "c1_search.json");
  const double v = j["result"]["min_coverage"];
  const json& argmins = j["result"]["argmins"];
  const std::array<std::array<double, 4>, 4> expected{{{0.692, 0.596, 0.02, 0.02},
                                                       {0.308, 0.404, 0.02, 0.02},
                                                       {0.692, 0.596, 0.98, 0.98},
                                                       {0.308, 0.404, 0.98, 0.98}}};
  bool points_ok = argmins.size() == expected.size();
  for (const auto& e : expected) {
    points_ok = points_ok && std::any_of(argmins.begin(), argmins.end(),
                                         [&](const json& a) { return same_point(a, e); });
  }
  const bool value_ok = std::abs(v - kGridMinTarget) <= kGridMinTol;
  return {value_ok && points_ok,
          "min " + fmt(v) + " (target " + fmt(kGridMinTarget) + " +- " + sci(kGridMinTol) +
              ", off by " + sci(std::abs(v - kGridMinTarget)) + "), " +
              std::to_string(argmins.size()) + " argmins" +
              (points_ok ? " = the four expected points" : " != the expected four")};
}

bool boundary_argmin(const json& argmin) {
  const double p2 = argmin.at(2), p2p = argmin.at(3);
  return p2 == p2p && (p2 == 0.02 || p2 == 0.98);
}

Outcome mc_two_stage() {
  const json full = cli_json("search-min --method mc --mode two_stage", "c2_full.json");
  const json reduced =
      cli_json("search-min --method mc --mode two_stage --m1 2000", "c2_reduced.json");
  const double v = full["result"]["min_coverage"];
  const double r = reduced["result"]["min_coverage"];
  const bool ok_full = v >= kMcTwoStageLo && v <= kMcTwoStageHi;
  const bool ok_arg = boundary_argmin(full["result"]["argmin"]);
  const bool ok_red = r >= kMcReducedLo && r <= kMcReducedHi;
  return {ok_full && ok_arg && ok_red,
          "full schedule " + fmt(v) + " at " + full["result"]["argmin"].dump() +
              ", M1=2000 " + fmt(r)};
}

Outcome mc_no_pretest() {
  const json j = cli_json("search-min --method mc --mode no_pretest", "c3.json");
  const double v = j["result"]["min_coverage"];
  return {v >= kMcNoPretestLo && v <= kMcNoPretestHi,
          "min " + fmt(v) + " in [" + fmt(kMcNoPretestLo, 3) + ", " +
              fmt(kMcNoPretestHi, 3) + "]"};
}

Outcome point_agreement() {
  Config cfg;
  const ptc_probs p{0.692, 0.596, 0.02, 0.02};
  double asym = 0.0;
  check(ptc_asymptotic_coverage(cfg.ptr, kRef, p, PTC_MODE_TWO_STAGE, &asym, nullptr));
  ptc_mc_estimate mc{};
  check(ptc_mc_coverage(cfg.ptr, kRef, p, PTC_MODE_TWO_STAGE, 1'000'000, 20140101, &mc));
  const double diff = std::abs(asym - mc.coverage);
  return {diff < kPointAgreement,
          "large-sample " + fmt(asym) + ", MC " + fmt(mc.coverage) + ", |diff| " + sci(diff)};
}

Outcome geometry() {
  ptc_geometry g{};
  check(ptc_scan_geometry(kRef, 0.02, &g));
  const bool ok = fmt(g.delta_cap) == "0.056062" && fmt(g.r) == "1.333316" &&
                  fmt(g.delta_cap_prime) == "0.074748";
  return {ok, "Delta " + fmt(g.delta_cap) + ", r " + fmt(g.r) + ", Delta' " +
                  fmt(g.delta_cap_prime)};
}

ptc_design random_design(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  std::uniform_int_distribution<std::int64_t> n(lo, hi);
  return {n(rng), n(rng), n(rng), n(rng)};
}

ptc_probs random_probs(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng), u(rng)};
}

Outcome exact_identities() {
  std::mt19937_64 rng(601);
  std::uniform_real_distribution<double> level(0.01, 0.3);
  double worst_beta1 = 0.0, worst_equal = 0.0;
  for (int i = 0; i < 100; ++i) {
    Config cfg;
    const double alpha = level(rng);
    check(ptc_config_set_alpha(cfg.ptr, alpha));
    check(ptc_config_set_beta(cfg.ptr, 1.0));
    const ptc_design d = random_design(rng, 10, 5000);
    ptc_probs p = random_probs(rng, 0.02, 0.98);
    double v = 0.0;
    check(ptc_asymptotic_coverage(cfg.ptr, d, p, PTC_MODE_TWO_STAGE, &v, nullptr));
    worst_beta1 = std::max(worst_beta1, std::abs(v - (1 - alpha)));

    check(ptc_config_set_beta(cfg.ptr, 0.0));
    p.p2 = p.p1;
    p.p2p = p.p1p;
    check(ptc_asymptotic_coverage(cfg.ptr, d, p, PTC_MODE_TWO_STAGE, &v, nullptr));
    worst_equal = std::max(worst_equal, std::abs(v - (1 - alpha)));
  }
  return {worst_beta1 <= kIdentityTol && worst_equal <= kIdentityTol,
          "max |c - (1-alpha)|: beta=1 " + sci(worst_beta1) + ", theta1=theta2 & beta=0 " +
              sci(worst_equal) + " over 100 points each"};
}

Outcome quadrature_oracle() {
  std::mt19937_64 rng(701);
  std::uniform_real_distribution<double> alpha_d(0.01, 0.2), beta_d(0.01, 0.5);
  double worst = 0.0;
  int passed = 0;
  for (int i = 0; i < 20; ++i) {
    const ptc_design d = random_design(rng, 50, 3000);
    const ptc_probs p = random_probs(rng, 0.02, 0.98);
    const double alpha = alpha_d(rng), beta = beta_d(rng);
    Config cfg;
    check(ptc_config_set_alpha(cfg.ptr, alpha));
    check(ptc_config_set_beta(cfg.ptr, beta));
    double exact = 0.0;
    check(ptc_asymptotic_coverage(cfg.ptr, d, p, PTC_MODE_TWO_STAGE, &exact, nullptr));
    const NormalModel mc = normal_model_mc(d, p, alpha, beta, 10'000'000, 7000 + i);
    const double z = z_score(exact, mc.coverage, 10'000'000);
    worst = std::max(worst, z);
    if (z <= kSeBound) ++passed;
  }
  return {passed == 20, std::to_string(passed) + "/20 within 3 SE, worst " + fmt(worst, 2) +
                            " SE (10^7 normal-model reps each)"};
}

Outcome finite_sample_oracle() {
  std::mt19937_64 rng(801);
  int passed = 0, total = 0;
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    const ptc_design d = random_design(rng, 1, 10);
    const ptc_probs p = random_probs(rng, 0.05, 0.95);
    Config cfg;
    for (ptc_mode mode : {PTC_MODE_TWO_STAGE, PTC_MODE_NO_PRETEST}) {
      double exact = 0.0;
      check(ptc_enumerate_coverage(cfg.ptr, d, p, mode, &exact));
      ptc_mc_estimate mc{};
      check(ptc_mc_coverage(cfg.ptr, d, p, mode, 1'000'000, 8000 + i, &mc));
      const double z = z_score(exact, mc.coverage, 1'000'000);
      worst = std::max(worst, z);
      ++total;
      if (z <= kSeBound) ++passed;
    }
  }
  return {passed == total, std::to_string(passed) + "/" + std::to_string(total) +
                               " within 3 SE, worst " + fmt(worst, 2) + " SE"};
}

Outcome contour_property() {
  Config cfg;
  ptc_contour* raw = nullptr;
  check(ptc_contour_grid(cfg.ptr, kRef, 32, &raw));
  std::unique_ptr<ptc_contour, void (*)(ptc_contour*)> grid(raw, &ptc_contour_destroy);
  const std::size_t rows = ptc_contour_rows(raw), cols = ptc_contour_cols(raw);
  double max_value = 0.0, asym = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = ptc_contour_value(raw, i, j);
      max_value = std::max(max_value, v);
      asym = std::max(asym, std::abs(v - ptc_contour_value(raw, rows - 1 - i, cols - 1 - j)));
    }
  }
  return {max_value < 0.95 && asym <= kMirrorTol,
          std::to_string(rows) + "x" + std::to_string(cols) + " grid, max " + fmt(max_value) +
              ", mirror asymmetry " + sci(asym)};
}

Outcome n_scaling() {
  Config cfg;
  const std::array<std::int64_t, 5> factors{1, 2, 4, 8, 16};
  std::array<double, 5> cov{}, delta{};
  std::array<int, 5> evaluated{};
  check(ptc_scaling_study(cfg.ptr, kRef, factors.data(), factors.size(), 0.5, 0.5, cov.data(),
                          delta.data(), evaluated.data()));
  bool ok = std::all_of(evaluated.begin(), evaluated.end(), [](int e) { return e != 0; });
  for (std::size_t k = 2; k < cov.size(); ++k) {
    ok = ok && std::abs(cov[k] - cov[k - 1]) < std::abs(cov[k - 1] - cov[k - 2]);
  }
  const double tail = std::abs(cov[4] - cov[3]);
  ok = ok && tail < kScalingTail && cov[4] < kHarmfulCeiling;
  std::string values;
  for (std::size_t k = 0; k < cov.size(); ++k) {
    values += (k ? ", " : "") + fmt(cov[k]);
  }
  return {ok, "c(N) = " + values + "; |c16 - c8| " + sci(tail)};
}

Outcome taylor_bound() {
  ptc_geometry g{};
  check(ptc_scan_geometry(kRef, 0.02, &g));
  std::mt19937_64 rng(1101);
  std::uniform_real_distribution<double> u1(g.p1_lo, g.p1_hi), u2(g.p1p_lo, g.p1p_hi);
  bool ok = true;
  double min_ratio = INFINITY, min_end = INFINITY;
  for (int i = 0; i < 50; ++i) {
    const double p1 = u1(rng), p1p = u2(rng);
    for (int k = 0; k < 100; ++k) {
      const double delta = g.delta_cap * (-1.0 + 2.0 * k / 99.0);
      double lam = 0.0;
      check(ptc_lambda_taylor(kRef, p1, p1p, delta, &lam));
      const double bound = 2.0 * std::abs(delta) / g.delta_cap;
      if (delta != 0.0) min_ratio = std::min(min_ratio, std::abs(lam) / bound);
      ok = ok && std::abs(lam) >= bound * (1 - 1e-12);
    }
    double lo = 0.0, hi = 0.0;
    check(ptc_lambda_taylor(kRef, p1, p1p, -g.delta_cap, &lo));
    check(ptc_lambda_taylor(kRef, p1, p1p, g.delta_cap, &hi));
    ok = ok && hi <= -2.0 && lo >= 2.0;
    min_end = std::min({min_end, lo, -hi});
  }
  return {ok, "min |lambda| / (2|delta|/Delta) = " + fmt(min_ratio, 4) +
                  ", min |lambda(+-Delta)| = " + fmt(min_end, 4)};
}

Outcome determinism() {
  const std::vector<std::string> commands{
      "coverage --method mc --p 0.692,0.596,0.02,0.02 --reps 200000",
      "search-min --method mc --grid-step 0.192 --m1 2000 --m2 20000 --m3 100000"};
  int identical = 0;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    std::string first;
    bool same = true;
    for (unsigned workers : {1u, 2u, 4u}) {
      const fs::path out = scratch("c12_" + std::to_string(c) + "_" + std::to_string(workers) +
                                   ".json");
      fs::remove(out);
      if (run_cli(commands[c] + " --workers " + std::to_string(workers) + " --out " +
                  out.string()) != 0) {
        same = false;
        continue;
      }
      const std::string text = slurp(out);
      if (first.empty()) {
        first = text;
      } else {
        same = same && text == first;
      }
    }
    if (same && !first.empty()) ++identical;
  }
  return {identical == static_cast<int>(commands.size()),
          std::to_string(identical) + "/" + std::to_string(commands.size()) +
              " MC commands byte-identical across 1, 2, 4 workers"};
}

}  // namespace

int main(int argc, char** argv) {
  // optional arguments: criterion numbers to run (default all)
  std::vector<std::size_t> selected;
  for (int a = 1; a < argc; ++a) selected.push_back(std::stoul(argv[a]));
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"asymptotic grid minimum", grid_minimum},
      {"MC two-stage minimum", mc_two_stage},
      {"MC no-pretest minimum", mc_no_pretest},
      {"point agreement", point_agreement},
      {"geometry constants", geometry},
      {"exact-branch identities", exact_identities},
      {"quadrature vs normal-model simulation", quadrature_oracle},
      {"enumeration vs Monte Carlo", finite_sample_oracle},
      {"contour property", contour_property},
      {"N-scaling", n_scaling},
      {"first-order lambda bound", taylor_bound},
      {"determinism", determinism},
  };
  int failures = 0, ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), i + 1) == selected.end()) {
      continue;
    }
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << (i + 1) << "] " << criteria[i].first
              << ": " << o.detail << " (" << fmt(secs, 1) << " s)" << std::endl;
  }
  std::cout << (ran - failures) << "/" << ran << " criteria passed"
            << std::endl;
  return failures == 0 ? 0 : 1;
}
