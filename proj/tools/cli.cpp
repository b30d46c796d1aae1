#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dualpath/instance_io.hpp"
#include "dualpath/oracle.hpp"
#include "dualpath/pathfollow.hpp"
#include "dualpath/rpc.hpp"

namespace dualpath::cli {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int exit_code(Status s) {
  switch (s) {
    case Status::kConverged:
      return kExitConverged;
    case Status::kPhase1Cap:
    case Status::kPhase2Cap:
      return kExitIterationCap;
    case Status::kBlockFailure:
    case Status::kNumericalFailure:
      return kExitNumerical;
  }
  return kExitNumerical;
}

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kInvalidInstance:
      return kExitInvalidInstance;
    case ErrorKind::kIterationCap:
      return kExitIterationCap;
    case ErrorKind::kNumerical:
    case ErrorKind::kDomain:
      return kExitNumerical;
  }
  return kExitNumerical;
}

json params_json(const PathParams& p) {
  return {{"mode", to_string(p.mode)},
          {"delta_bar", p.delta_bar},
          {"beta_lo", p.beta_lo},
          {"beta_hi", p.beta_hi},
          {"beta", p.beta},
          {"p", p.p},
          {"q", p.q},
          {"theta", p.theta},
          {"Delta_bar", p.Delta_bar},
          {"Delta_bar_star", p.Delta_bar_star},
          {"sigma", p.sigma},
          {"gamma", p.gamma},
          {"vartheta", p.vartheta},
          {"delta_hat_star", p.delta_hat_star},
          {"delta_hat_bar", p.delta_hat_bar},
          {"eta_lower", p.eta_lower},
          {"nu", p.nu}};
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

struct SolveFlags {
  std::string instance;
  std::string mode = "inexact";
  double delta_bar = 0.01;
  double beta_frac = 0.25;
  double t0 = 0.25;
  double eps_d = 1e-4;
  bool adaptive_t = false;
  int threads = 1;
  std::string log;
  std::string out;
  bool reproducible = false;
};

const char* kCsvHeader = "phase,k,t,lambda_bar,d_delta,feas_gap,inner_iters_total,elapsed_ms\n";

class CsvLog {
 public:
  CsvLog(const std::string& path, bool reproducible) : reproducible_(reproducible) {
    if (path.empty()) return;
    file_.open(path);
    if (!file_) throw Error(ErrorKind::kInvalidInstance, "cannot write log '" + path + "'");
    file_ << kCsvHeader;
  }

  void operator()(const LogRow& r) {
    if (!file_.is_open()) return;
    file_ << r.phase << ',' << r.k << ',' << fmt(r.t) << ',' << fmt(r.lambda_bar) << ','
          << fmt(r.d_delta) << ',' << fmt(r.feas_gap) << ',' << r.inner_iters_total << ','
          << fmt(reproducible_ ? 0.0 : r.elapsed_ms) << '\n';
  }

 private:
  std::ofstream file_;
  bool reproducible_;
};

int cmd_solve(const SolveFlags& f, std::ostream& out) {
  const SeparableProblem problem = io::load_problem(f.instance);
  SolverConfig config;
  config.mode = f.mode == "exact" ? Mode::kExact : Mode::kInexact;
  config.delta_bar = f.delta_bar;
  config.beta_frac = f.beta_frac;
  config.t0 = f.t0;
  config.eps_d = f.eps_d;
  config.adaptive_t = f.adaptive_t;
  config.master.threads = f.threads;
  const PreparedProblem prepared = prepare(problem, f.threads);
  CsvLog log(f.log, f.reproducible);
  const SolveReport rep = solve(prepared, config, std::nullopt, std::ref(log));

  json doc = {{"status", to_string(rep.status)},
              {"message", rep.message},
              {"phi_estimate", rep.d_delta},
              {"feas_gap", rep.feas_gap},
              {"lambda_bar", rep.lambda_bar},
              {"t_final", rep.t_final},
              {"k", rep.phase2_iters},
              {"phase1_iters", rep.phase1_iters},
              {"k_max", rep.k_max},
              {"wall_ms", f.reproducible ? 0.0 : rep.wall_ms},
              {"threads", f.threads},
              {"params", params_json(rep.params)},
              {"y", vec_json(rep.y)}};
  json xs = json::array();
  for (const auto& x : rep.x) xs.push_back(vec_json(x));
  doc["x"] = xs;
  if (!f.out.empty()) io::write_json(f.out, doc);

  out << "status " << to_string(rep.status) << "\n";
  if (!rep.message.empty()) out << "message " << rep.message << "\n";
  out << "phi_estimate " << fmt(rep.d_delta) << "\n"
      << "feas_gap " << fmt(rep.feas_gap) << "\n"
      << "phase1_iters " << rep.phase1_iters << "\n"
      << "phase2_iters " << rep.phase2_iters << " (k_max " << rep.k_max << ")\n";
  return exit_code(rep.status);
}

int cmd_params(double delta_bar, double beta_frac, std::ostream& out) {
  const PathParams p = default_params(delta_bar, beta_frac, 1.0, Mode::kInexact);
  char line[128];
  auto row = [&](const char* name, double v) {
    std::snprintf(line, sizeof line, "%-16s %.7f\n", name, v);
    out << line;
  };
  row("delta_bar", p.delta_bar);
  row("beta_lo", p.beta_lo);
  row("beta_hi", p.beta_hi);
  row("beta", p.beta);
  row("Delta_bar", p.Delta_bar);
  row("Delta_bar_star", p.Delta_bar_star);
  row("vartheta", p.vartheta);
  row("delta_hat_star", p.delta_hat_star);
  row("eta_lower", p.eta_lower);
  out << "nu       sigma\n";
  for (double nu : {1.0, 2.0, 10.0, 100.0, 1000.0}) {
    const PathParams q = default_params(delta_bar, beta_frac, nu, Mode::kInexact);
    std::snprintf(line, sizeof line, "%-8g %.7f\n", nu, q.sigma);
    out << line;
  }
  return kExitConverged;
}

struct GenFlags {
  std::uint64_t seed = 1;
  int nodes = 5;
  int links = 8;
  int commodities = 2;
  std::string out;
};

int cmd_gen(const GenFlags& g, std::ostream& out) {
  const rpc::Instance inst = rpc::generate(g.seed, g.nodes, g.links, g.commodities);
  const json doc = rpc::to_json(inst);
  if (g.out.empty()) {
    out << doc.dump(2) << '\n';
  } else {
    io::write_json(g.out, doc);
  }
  return kExitConverged;
}

// Solves one small instance both ways and compares against the dense oracle.
int cmd_verify(const std::string& instance, const GenFlags& g, std::ostream& out) {
  std::optional<rpc::Instance> network;
  std::optional<SeparableProblem> generic;
  if (instance.empty()) {
    network = rpc::generate(g.seed, g.nodes, g.links, g.commodities);
  } else {
    const json doc = io::read_json(instance);
    if (doc.contains("links") || (doc.contains("format") && doc.at("format") == "rpc")) {
      network = rpc::from_json(doc);
    } else {
      generic = io::problem_from_json(doc);
    }
  }
  const SeparableProblem problem = network ? rpc::to_problem(*network) : *generic;
  const PreparedProblem prepared = prepare(problem);
  SolverConfig config;
  const SolveReport rep = solve(prepared, config);
  // The generic oracle needs a coupling-feasible start; routing instances
  // get one from the network structure.
  const std::vector<Vec> start = network ? oracle::rpc_feasible_point(*network) : std::vector<Vec>{};
  const oracle::CoupledResult ref = network ? oracle::rpc_optimum(*network) : oracle::solve_coupled(problem);
  const double d_star_t = oracle::smoothed_optimum(problem, rep.t_final, start).value;
  const PathParams& P = rep.params;
  const double path_bound = (1.0 + omega_star(P.delta_bar) / omega_star(P.vartheta)) * config.eps_d;
  const double phi_bound = 2.0 * (1.0 + omega_star(P.delta_bar) / omega_star(P.beta)) * config.eps_d;

  const bool converged = rep.status == Status::kConverged;
  const bool feas_ok = rep.feas_gap <= P.beta * rep.t_final;
  const bool path_ok = std::abs(rep.d_delta - d_star_t) <= path_bound;
  const bool order_ok = d_star_t <= ref.phi_star + ref.gap_bound;
  auto mark = [](bool ok) { return ok ? "ok  " : "FAIL"; };
  out << mark(converged) << " status " << to_string(rep.status) << "\n"
      << mark(feas_ok) << " feas_gap " << fmt(rep.feas_gap) << " <= beta t = " << fmt(P.beta * rep.t_final)
      << "\n"
      << mark(path_ok) << " |d_delta - d*(t)| " << fmt(std::abs(rep.d_delta - d_star_t)) << " <= "
      << fmt(path_bound) << "\n"
      << mark(order_ok) << " d*(t) <= phi* " << fmt(d_star_t) << " <= " << fmt(ref.phi_star) << "\n"
      << "info phi* " << fmt(ref.phi_star) << " d_delta " << fmt(rep.d_delta) << " gap "
      << fmt(std::abs(rep.d_delta - ref.phi_star)) << " (2-eps bound " << fmt(phi_bound) << ")\n";
  return converged && feas_ok && path_ok && order_ok ? kExitConverged : kExitNumerical;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dual decomposition path-following solver"};
  app.require_subcommand(1);

  SolveFlags sf;
  auto* solve_cmd = app.add_subcommand("solve", "Solve a problem instance");
  solve_cmd->add_option("--instance", sf.instance, "Problem or RPC document")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--mode", sf.mode, "inexact or exact")->check(CLI::IsMember({"inexact", "exact"}));
  solve_cmd->add_option("--delta-bar", sf.delta_bar, "Phase-2 subproblem accuracy")
      ->check(CLI::Range(0.0, kDeltaBarMax));
  solve_cmd->add_option("--beta-frac", sf.beta_frac, "beta as a fraction of its upper bound")
      ->check(CLI::Range(1e-6, 1.0));
  solve_cmd->add_option("--t0", sf.t0, "Initial barrier parameter")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--eps-d", sf.eps_d, "Target accuracy")->check(CLI::PositiveNumber);
  solve_cmd->add_flag("--adaptive-t", sf.adaptive_t, "Measured t decrease");
  solve_cmd->add_option("--threads", sf.threads, "Worker count")->check(CLI::Range(1, 256));
  solve_cmd->add_option("--log", sf.log, "Iteration CSV");
  solve_cmd->add_option("--out", sf.out, "Result document");
  solve_cmd->add_flag("--reproducible", sf.reproducible, "Write zero timings so logs compare byte for byte");

  GenFlags gf;
  auto* gen_cmd = app.add_subcommand("gen-rpc", "Generate a routing instance");
  gen_cmd->add_option("--seed", gf.seed, "RNG seed");
  gen_cmd->add_option("--nodes", gf.nodes, "Node count")->check(CLI::Range(2, 10000));
  gen_cmd->add_option("--links", gf.links, "Link count (>= nodes)")->check(CLI::Range(2, 100000));
  gen_cmd->add_option("--commodities", gf.commodities, "Commodity count")->check(CLI::Range(1, 1000));
  gen_cmd->add_option("--out", gf.out, "Output path (stdout if empty)");

  double pd_delta = 0.01;
  double pd_beta = 0.25;
  auto* params_cmd = app.add_subcommand("params", "Print the derived constants");
  params_cmd->add_option("--delta-bar", pd_delta, "Phase-2 subproblem accuracy")->check(CLI::Range(0.0, kDeltaBarMax));
  params_cmd->add_option("--beta-frac", pd_beta, "beta as a fraction of its upper bound")->check(CLI::Range(1e-6, 1.0));

  std::string verify_instance;
  GenFlags vf;
  auto* verify_cmd = app.add_subcommand("verify", "Cross-check a small solve against the dense oracle");
  verify_cmd->add_option("--instance", verify_instance, "Problem document (default: generated RPC)");
  verify_cmd->add_option("--seed", vf.seed, "RNG seed");
  verify_cmd->add_option("--nodes", vf.nodes, "Node count");
  verify_cmd->add_option("--links", vf.links, "Link count");
  verify_cmd->add_option("--commodities", vf.commodities, "Commodity count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*solve_cmd) return cmd_solve(sf, out);
    if (*gen_cmd) return cmd_gen(gf, out);
    if (*params_cmd) return cmd_params(pd_delta, pd_beta, out);
    if (*verify_cmd) return cmd_verify(verify_instance, vf, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e);
  }
  return kExitUsage;
}

}  // namespace dualpath::cli
