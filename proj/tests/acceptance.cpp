// Acceptance run: one PASS/FAIL line per criterion with pinned tolerances.
//
// Exit status is 0 when the set of failing criteria equals the set given by
// --expect-fail (empty by default), so a known shortfall stays visible in
// the output without masking new regressions or unexpected passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "barrier_samples.hpp"
#include "checks.hpp"
#include "cli.hpp"
#include "dualpath/oracle.hpp"
#include "dualpath/pathfollow.hpp"
#include "dualpath/rpc.hpp"
#include "fixtures.hpp"

using namespace dualpath;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

// ---------------------------------------------------------------------------
// 1. Constants

Outcome constants() {
  const auto start = Clock::now();
  const CubicRoots r = beta_roots(0.01);
  const PathParams P = derive_params(0.01, r.beta_hi / 4.0, 2.0, Mode::kInexact);
  const PathParams E = derive_params(0.0, 0.095492, 2.0, Mode::kExact);
  double lo = 0.03;
  double hi = 0.05;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (cubic_discriminant(mid) > 0.0 ? lo : hi) = mid;
  }
  const double secs = seconds_since(start);
  const double tol = 5e-5;
  Outcome o;
  o.pass = std::abs(r.beta_lo - 0.021371) <= tol && std::abs(r.beta_hi - 0.356037) <= tol &&
           std::abs(P.Delta_bar - 0.089012) <= tol && std::abs(P.Delta_bar_star - 0.067399) <= tol &&
           std::abs(E.Delta_bar_star - 0.113729) <= tol && std::abs(lo - kDeltaBarMax) <= 1e-7 &&
           secs < 1.0;
  o.detail = "beta_lo " + num(r.beta_lo) + " beta_hi " + num(r.beta_hi) + " Delta_bar " +
             num(P.Delta_bar) + " Delta_bar* " + num(P.Delta_bar_star) + " exact Delta_bar* " +
             num(E.Delta_bar_star) + " delta_bar_max " + num(lo) + " (" + num(secs) + " s)";
  return o;
}

// ---------------------------------------------------------------------------
// 2-5. The seeded routing suite

struct SuiteRun {
  fixtures::RpcSize size;
  SeparableProblem problem;
  PreparedProblem prepared;
  SolveReport inexact;
  SolveReport exact;
  double phi_star = 0.0;
  double d_star_final = 0.0;
  double d_star_t0 = 0.0;
};

struct Suite {
  std::vector<SuiteRun> runs;
  double seconds = 0.0;
};

Suite run_suite() {
  const auto start = Clock::now();
  Suite s;
  for (const auto& size : fixtures::rpc_suite()) {
    const auto inst = rpc::generate(size.seed, size.nodes, size.links, size.commodities);
    SuiteRun r{size, rpc::to_problem(inst), {}, {}, {}, 0.0, 0.0, 0.0};
    r.prepared = prepare(r.problem);
    SolverConfig cfg;
    r.inexact = solve(r.prepared, cfg);
    cfg.mode = Mode::kExact;
    r.exact = solve(r.prepared, cfg);
    r.phi_star = oracle::rpc_optimum(inst).phi_star;
    const auto feasible = oracle::rpc_feasible_point(inst);
    r.d_star_final = oracle::smoothed_optimum(r.problem, r.inexact.t_final, feasible).value;
    r.d_star_t0 = oracle::smoothed_optimum(r.problem, cfg.t0, feasible).value;
    s.runs.push_back(std::move(r));
  }
  s.seconds = seconds_since(start);
  return s;
}

Outcome convergence(const Suite& s, std::string& info) {
  const double eps = SolverConfig{}.eps_d;
  int converged = 0;
  int inexact_ok = 0;
  int exact_ok = 0;
  int feas_ok = 0;
  int path_ok = 0;
  double worst_inexact = 0.0;
  double worst_exact = 0.0;
  double worst_path = 0.0;
  double inexact_bound = 0.0;
  double path_bound = 0.0;
  for (const auto& r : s.runs) {
    const PathParams& P = r.inexact.params;
    inexact_bound = 2.0 * (1.0 + omega_star(P.delta_bar) / omega_star(P.beta)) * eps;
    path_bound = (1.0 + omega_star(P.delta_bar) / omega_star(P.vartheta)) * eps;
    const bool both = r.inexact.status == Status::kConverged && r.exact.status == Status::kConverged;
    converged += both;
    const double gi = std::abs(r.inexact.d_delta - r.phi_star);
    const double ge = std::abs(r.exact.d_delta - r.phi_star);
    const double gp = std::abs(r.inexact.d_delta - r.d_star_final);
    worst_inexact = std::max(worst_inexact, gi);
    worst_exact = std::max(worst_exact, ge);
    worst_path = std::max(worst_path, gp);
    inexact_ok += gi <= inexact_bound;
    exact_ok += ge <= 2.0 * eps;
    feas_ok += r.inexact.feas_gap <= P.beta * r.inexact.t_final;
    path_ok += gp <= path_bound;
  }
  const int n = static_cast<int>(s.runs.size());
  Outcome o;
  o.pass = converged == n && inexact_ok == n && exact_ok == n && feas_ok == n && s.seconds < 60.0;
  o.detail = "converged " + std::to_string(converged) + "/" + std::to_string(n) +
             ", |d_delta - phi*| <= " + num(inexact_bound) + " on " + std::to_string(inexact_ok) +
             "/" + std::to_string(n) + " (worst " + num(worst_inexact) + "), exact |d - phi*| <= " +
             num(2.0 * eps) + " on " + std::to_string(exact_ok) + "/" + std::to_string(n) +
             " (worst " + num(worst_exact) + "), feas_gap <= beta t on " + std::to_string(feas_ok) +
             "/" + std::to_string(n) + " (" + num(s.seconds) + " s)";
  info = std::string(path_ok == n ? "PASS" : "FAIL") + " |d_delta - d*(t_final)| <= " +
         num(path_bound) + " on " + std::to_string(path_ok) + "/" + std::to_string(n) +
         " (worst " + num(worst_path) + ")";
  return o;
}

Outcome iteration_counts(const Suite& s) {
  int violations = 0;
  int checked = 0;
  long worst_slack_k = 1L << 40;
  double worst_ratio_j = 0.0;
  for (const auto& r : s.runs) {
    for (const SolveReport* rep : {&r.inexact, &r.exact}) {
      if (rep->status != Status::kConverged) continue;
      ++checked;
      violations += rep->phase2_iters > rep->k_max;
      worst_slack_k = std::min(worst_slack_k, rep->k_max - rep->phase2_iters);
    }
    if (r.exact.status == Status::kConverged) {
      const auto b = iteration_bounds(r.exact.params, SolverConfig{}.t0, SolverConfig{}.eps_d,
                                      r.exact.d_start, r.d_star_t0);
      ++checked;
      violations += r.exact.phase1_iters > *b.j_max;
      worst_ratio_j = std::max(worst_ratio_j, static_cast<double>(r.exact.phase1_iters) /
                                                  static_cast<double>(*b.j_max));
    }
  }
  Outcome o;
  o.pass = violations == 0 && checked > 0;
  o.detail = std::to_string(violations) + " violations over " + std::to_string(checked) +
             " checks, smallest k_max - k " + std::to_string(worst_slack_k) +
             ", largest J/J_max " + num(worst_ratio_j);
  return o;
}

Outcome centrality(const Suite& s) {
  int rows = 0;
  int violations = 0;
  double worst = -1e300;
  for (const auto& r : s.runs) {
    for (const SolveReport* rep : {&r.inexact, &r.exact}) {
      for (const LogRow& row : rep->rows) {
        if (row.phase != "2" || !row.certified) continue;
        ++rows;
        violations += row.lambda_bar > rep->params.beta + 1e-6;
        worst = std::max(worst, row.lambda_bar - rep->params.beta);
      }
    }
  }
  Outcome o;
  o.pass = violations == 0 && rows > 0;
  o.detail = std::to_string(violations) + " of " + std::to_string(rows) +
             " certified Phase-2 rows above beta + 1e-6, max lambda_bar - beta " + num(worst);
  return o;
}

Outcome calculus(const Suite& s) {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double worst_g = 0.0;
  double worst_h = 0.0;
  int points = 0;
  for (const auto& r : s.runs) {
    const Vec& y_ref = r.inexact.y;
    const double scale = 0.1 * (1.0 + y_ref.cwiseAbs().maxCoeff());
    for (int k = 0; k < 10; ++k) {
      Vec y = y_ref;
      for (Index j = 0; j < y.size(); ++j) y(j) += scale * U(rng);
      const double t = std::exp(std::log(0.05) * (0.5 + 0.5 * U(rng)));
      const auto e = checks::finite_differences(r.prepared, y, t);
      worst_g = std::max(worst_g, e.grad_rel);
      worst_h = std::max(worst_h, e.hess_rel);
      ++points;
    }
  }
  double worst_id = 0.0;
  for (const auto& r : s.runs) {
    for (const SolveReport* rep : {&r.inexact, &r.exact}) {
      for (const LogRow& row : rep->rows) {
        const double want = row.t * row.lambda_bar;
        worst_id = std::max(worst_id, std::abs(row.feas_gap - want) / std::max(want, 1e-300));
      }
    }
  }
  Outcome o;
  o.pass = worst_g <= 1e-5 && worst_h <= 1e-3 && worst_id <= 1e-10;
  o.detail = std::to_string(points) + " points, worst gradient rel err " + num(worst_g) +
             ", Hessian " + num(worst_h) + ", feas_gap vs t lambda_bar " + num(worst_id);
  return o;
}

// ---------------------------------------------------------------------------
// 6. Sandwich inequalities

Outcome sandwich() {
  std::mt19937_64 rng(66);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  auto log_t = [&](double lo, double hi) {
    return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * 0.5 * (1.0 + U(rng)));
  };

  // d0 - d on polytope blocks, with d0 by vertex enumeration.
  double min_smoothing = 1e300;
  for (int inst = 0; inst < 5; ++inst) {
    const SeparableProblem sp = fixtures::boxes(600 + inst, 3, 2, 2, true);
    const PreparedProblem p = prepare(sp);
    for (int k = 0; k < 20; ++k) {
      const Vec y = 2.0 * Vec::NullaryExpr(2, [&] { return U(rng); });
      min_smoothing = std::min(min_smoothing, checks::smoothing_gap_slack(sp, p, y, log_t(1e-3, 1.0)));
    }
  }

  // d - d_delta on curved and polyhedral blocks.
  double min_inexact = 1e300;
  double min_inexact_cert = 1e300;
  double max_inexact_delta = 0.0;
  for (int inst = 0; inst < 5; ++inst) {
    const SeparableProblem sp = inst % 2 ? fixtures::boxes(700 + inst, 3, 2, 2, true)
                                         : fixtures::quadratic_blocks(700 + inst, 3, 2, 2);
    const PreparedProblem p = prepare(sp);
    for (int k = 0; k < 20; ++k) {
      const Vec y = Vec::NullaryExpr(2, [&] { return U(rng); });
      const auto e = checks::inexact_gap_slack(p, y, log_t(1e-2, 1.0), 0.01);
      min_inexact = std::min(min_inexact, e.slack);
      min_inexact_cert = std::min(min_inexact_cert, e.cert_slack);
      max_inexact_delta = std::max(max_inexact_delta, e.delta);
    }
  }

  // d - d*(t) around the minimizer of d(., t).
  double min_path = 1e300;
  int used_path = 0;
  for (int inst = 0; inst < 5 && used_path < 100; ++inst) {
    const SeparableProblem sp = fixtures::quadratic_blocks(800 + inst, 3, 2, 2);
    const PreparedProblem p = prepare(sp);
    const double t = log_t(1e-2, 1.0);
    const DualIterate star = checks::dual_minimum(p, t, Vec::Zero(2));
    for (int k = 0; k < 200 && used_path < (inst + 1) * 20; ++k) {
      const Vec y = star.y + 0.5 * Vec::NullaryExpr(2, [&] { return U(rng); });
      const auto slack = checks::path_gap_slack(p, y, t, star.d_val);
      if (!slack) continue;
      ++used_path;
      min_path = std::min(min_path, *slack);
    }
  }

  Outcome o;
  o.pass = min_smoothing >= -1e-8 && min_inexact >= -1e-8 && min_inexact_cert >= -1e-8 && min_path >= -1e-8 &&
           used_path >= 100;
  o.detail = "min slack over 100 points: d0 - d " + num(min_smoothing) + ", d - d_delta " + num(min_inexact) +
             " (certificate " + num(min_inexact_cert) + ", delta up to " + num(max_inexact_delta) + "), d - d*(t) " + num(min_path) + " over " +
             std::to_string(used_path) + " points";
  return o;
}

// ---------------------------------------------------------------------------
// 7. Barrier suite

Outcome barriers() {
  std::mt19937_64 rng(77);
  double worst_g = 0.0;
  double worst_h = 0.0;
  double worst_sc = 0.0;
  int n_shipped = 0;
  for (const auto& s : samples::shipped()) {
    ++n_shipped;
    for (int k = 0; k < 8; ++k) {
      const BarrierCheck c = check_barrier(*s.F, s.x, samples::random_unit(rng, s.F->dim()));
      worst_g = std::max(worst_g, c.gradient_rel_err);
      worst_h = std::max(worst_h, c.hessian_rel_err);
      worst_sc = std::max(worst_sc, c.sc_ratio);
    }
  }
  double min_center = 1e300;
  int n_bounded = 0;
  for (const auto& b : samples::bounded()) {
    ++n_bounded;
    const auto c = analytic_center(*b.F, b.x);
    const Mat Hc = b.F->hessian(c.x);
    for (int k = 0; k < 100; ++k) {
      const Vec x = samples::interior_point(b, rng);
      min_center = std::min(min_center, b.F->value(x) - c.value - omega(local_norm(Hc, x - c.x)));
    }
  }
  Outcome o;
  o.pass = worst_g <= 1e-6 && worst_h <= 1e-4 && worst_sc <= 1.0 + 1e-3 && min_center >= -1e-10;
  o.detail = std::to_string(n_shipped) + " barriers: gradient rel err " + num(worst_g) +
             ", Hessian " + num(worst_h) + ", self-concordance ratio " + num(worst_sc) + "; " +
             std::to_string(n_bounded) + " centers, min F(x) - F(xc) - omega " + num(min_center);
  return o;
}

// ---------------------------------------------------------------------------
// 8. Determinism through the command line tool

int run_tool(std::vector<std::string> args, std::string& out) {
  args.insert(args.begin(), "dualpath");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o;
  std::ostringstream e;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), o, e);
  out = o.str() + e.str();
  return code;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "dualpath_acceptance";
  fs::create_directories(dir);
  const auto size = fixtures::rpc_suite().back();
  const std::string inst = (dir / "instance.json").string();
  std::string text;
  int codes = run_tool({"gen-rpc", "--seed", std::to_string(size.seed), "--nodes",
                        std::to_string(size.nodes), "--links", std::to_string(size.links),
                        "--commodities", std::to_string(size.commodities), "--out", inst},
                       text);
  auto solve = [&](int threads, const std::string& tag) {
    const std::string log = (dir / (tag + ".csv")).string();
    const std::string res = (dir / (tag + ".json")).string();
    codes += run_tool({"solve", "--instance", inst, "--threads", std::to_string(threads),
                       "--reproducible", "--log", log, "--out", res},
                      text);
    return std::make_pair(slurp(log), nlohmann::json::parse(slurp(res)));
  };
  const auto a = solve(1, "a");
  const auto b = solve(1, "b");
  const auto c = solve(4, "c");
  fs::remove_all(dir);

  const bool same_log = !a.first.empty() && a.first == b.first;
  double dy = 0.0;
  const auto& ya = a.second.at("y");
  const auto& yc = c.second.at("y");
  for (std::size_t i = 0; i < ya.size(); ++i) {
    dy = std::max(dy, std::abs(ya[i].get<double>() - yc[i].get<double>()));
  }
  const double dd =
      std::abs(a.second.at("phi_estimate").get<double>() - c.second.at("phi_estimate").get<double>());
  Outcome o;
  o.pass = codes == 0 && same_log && ya.size() == yc.size() && dy <= 1e-12 && dd <= 1e-12;
  o.detail = std::string("threads=1 logs ") + (same_log ? "byte-identical" : "differ") + " (" +
             std::to_string(a.first.size()) + " bytes), threads=4 max |dy| " + num(dy) +
             ", |d_delta diff| " + num(dd);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> expect_fail;
  app.add_option("--expect-fail", expect_fail, "Criteria known to fail")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  std::set<int> failed;
  auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("%s  %d  %-12s %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) failed.insert(id);
  };

  report(1, "constants", constants());
  const Suite suite = run_suite();
  std::string info;
  report(2, "convergence", convergence(suite, info));
  std::printf("info     path bound %s\n", info.c_str());
  report(3, "iterations", iteration_counts(suite));
  report(4, "centrality", centrality(suite));
  report(5, "calculus", calculus(suite));
  report(6, "sandwich", sandwich());
  report(7, "barriers", barriers());
  report(8, "determinism", determinism());

  const std::set<int> expected(expect_fail.begin(), expect_fail.end());
  std::printf("%zu of 8 criteria pass", 8 - failed.size());
  if (!expected.empty()) {
    std::printf("; expected failures:");
    for (int id : expected) std::printf(" %d", id);
  }
  std::printf("\n");
  if (failed != expected) {
    std::printf("unexpected outcome: failing set differs from --expect-fail\n");
    return 1;
  }
  return 0;
}
