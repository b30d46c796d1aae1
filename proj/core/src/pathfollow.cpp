#include "dualpath/pathfollow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace dualpath {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

LogRow make_row(const char* phase, long k, const DualIterate& it, long inner,
                Clock::time_point start) {
  LogRow r;
  r.phase = phase;
  r.k = k;
  r.t = it.t;
  r.lambda_bar = it.lambda_bar;
  r.d_delta = it.d_val;
  r.feas_gap = it.feas_gap;
  r.inner_iters_total = inner;
  r.elapsed_ms = ms_since(start);
  r.delta_cert = it.delta_cert_total;
  return r;
}

// Distance between consecutive subproblem solutions in the local norm of
// the earlier one, accumulated over blocks.
double solution_shift(const DualIterate& from, const DualIterate& to) {
  double sq = 0.0;
  for (std::size_t i = 0; i < from.blocks.size(); ++i) {
    const Vec dz = to.blocks[i].z_bar - from.blocks[i].z_bar;
    sq += (from.blocks[i].hessian_llt.matrixU() * dz).squaredNorm();
  }
  return std::sqrt(sq);
}

// ||grad F(x_bar)||*_{x_bar} over all blocks.
double barrier_gradient_norm(const DualIterate& it) {
  double sq = 0.0;
  for (const auto& r : it.blocks) {
    const double v = dual_local_norm(r.hessian_llt, r.F_gradient);
    sq += v * v;
  }
  return std::sqrt(sq);
}

DualAccuracy phase2_accuracy(const PathParams& params, const SolverConfig& config, double t_k) {
  if (params.mode == Mode::kExact) return DualAccuracy::exact_floor();
  DualAccuracy a;
  // eps_k = gamma t_k for the center residual; the local rule uses the
  // matching local threshold at the same t_k.
  a.eps_total = config.master.sub.rule == StopRule::kCenter
                    ? params.gamma * t_k
                    : local_accuracy(params.delta_bar, t_k);
  a.delta_total = params.delta_bar;
  return a;
}

}  // namespace

std::string to_string(Mode mode) { return mode == Mode::kExact ? "exact" : "inexact"; }

std::string to_string(Status status) {
  switch (status) {
    case Status::kConverged: return "converged";
    case Status::kPhase1Cap: return "phase1_cap";
    case Status::kPhase2Cap: return "phase2_cap";
    case Status::kBlockFailure: return "block_failure";
    case Status::kNumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

std::array<double, 4> cubic_coefficients(double d, double* p_out) {
  const double p = d * (1.0 / ((1.0 - d) * (1.0 - d)) + 2.0 / (1.0 - d));
  if (p_out) *p_out = p;
  return {-2.0 * d * (1.0 - d) * (1.0 - d), (1.0 - d) * ((1.0 + d) * (1.0 + d) - p),
          p - 3.0 - 2.0 * d * d + 2.0 * d, 1.0 - d};
}

double cubic_discriminant(double delta_bar) {
  const auto c = cubic_coefficients(delta_bar);
  const double c0 = c[0], c1 = c[1], c2 = c[2], c3 = c[3];
  return 18.0 * c0 * c1 * c2 * c3 - 4.0 * c2 * c2 * c2 * c0 + c2 * c2 * c1 * c1 -
         4.0 * c3 * c1 * c1 * c1 - 27.0 * c3 * c3 * c0 * c0;
}

CubicRoots beta_roots(double delta_bar) {
  // The published threshold is rounded to ten digits, so allow the
  // discriminant to be negative at rounding level right at the endpoint.
  if (!(delta_bar >= 0.0) || delta_bar > kDeltaBarMax) {
    throw Error(ErrorKind::kDomain, "beta_roots: delta_bar must lie in [0, 0.0432863855]");
  }
  CubicRoots out;
  out.coeffs = cubic_coefficients(delta_bar, &out.p);
  out.discriminant = cubic_discriminant(delta_bar);
  if (out.discriminant < -1e-12) {
    throw Error(ErrorKind::kDomain, "beta_roots: cubic has complex roots");
  }
  const auto& c = out.coeffs;
  Eigen::Matrix3d companion = Eigen::Matrix3d::Zero();
  companion(1, 0) = 1.0;
  companion(2, 1) = 1.0;
  companion(0, 2) = -c[0] / c[3];
  companion(1, 2) = -c[1] / c[3];
  companion(2, 2) = -c[2] / c[3];
  Eigen::EigenSolver<Eigen::Matrix3d> es(companion, false);
  std::array<double, 3> r{};
  for (int i = 0; i < 3; ++i) r[static_cast<std::size_t>(i)] = es.eigenvalues()(i).real();
  std::sort(r.begin(), r.end());
  out.beta_lo = r[0];
  out.beta_hi = r[1];
  out.beta_3 = r[2];
  return out;
}

PathParams derive_params(double delta_bar, double beta, double nu, Mode mode,
                         double delta_hat_fraction) {
  if (!(nu > 0.0)) {
    throw Error(ErrorKind::kDomain, "derive_params: nu must be positive");
  }
  PathParams P;
  P.mode = mode;
  P.nu = nu;
  P.beta = beta;
  const double sq_nu = std::sqrt(nu);

  if (mode == Mode::kExact) {
    if (!(beta > 0.0) || !(beta < kExactBetaMax)) {
      throw Error(ErrorKind::kDomain, "derive_params: exact mode needs 0 < beta < (3-sqrt5)/2");
    }
    const double sb = std::sqrt(beta);
    P.delta_bar = 0.0;
    P.beta_lo = 0.0;
    P.beta_hi = kExactBetaMax;
    P.p = 0.0;
    P.q = beta;
    P.theta = sb;
    P.Delta_bar_star = sb * (1.0 - sb - beta) / (1.0 + 2.0 * sb);
    P.Delta_bar = P.Delta_bar_star;
    P.sigma = P.Delta_bar_star / (sq_nu + (sq_nu + 1.0) * P.Delta_bar_star);
    P.gamma = 0.0;
    P.vartheta = beta;
    P.delta_hat_star = 0.0;
    P.delta_hat_bar = 0.0;
    P.eta_lower = beta;
    return P;
  }

  const CubicRoots roots = beta_roots(delta_bar);
  if (!(beta > roots.beta_lo) || !(beta < roots.beta_hi)) {
    std::ostringstream msg;
    msg << "derive_params: beta = " << beta << " outside (" << roots.beta_lo << ", "
        << roots.beta_hi << ")";
    throw Error(ErrorKind::kDomain, msg.str());
  }
  const double d = delta_bar;
  P.delta_bar = d;
  P.beta_lo = roots.beta_lo;
  P.beta_hi = roots.beta_hi;
  P.p = roots.p;
  P.q = (1.0 - d) * beta - 2.0 * d;
  P.theta = (std::sqrt(P.p * P.p + 4.0 * P.q) - P.p) / 2.0;
  P.Delta_bar = (P.theta * (1.0 - d - beta) - beta) / (1.0 + 2.0 * P.theta);
  if (!(P.Delta_bar > 0.0)) {
    throw Error(ErrorKind::kDomain, "derive_params: Delta_bar is not positive");
  }
  if (d > P.Delta_bar / (1.0 + P.Delta_bar)) {
    throw Error(ErrorKind::kDomain, "derive_params: delta_bar exceeds Delta_bar/(1+Delta_bar)");
  }
  const double a = (1.0 - d) * P.Delta_bar - d;
  P.Delta_bar_star = 0.5 * (a + 1.0 - std::sqrt((a - 1.0) * (a - 1.0) + 4.0 * d));
  // Positive exactly when Delta_bar > 2 delta_bar / (1 - delta_bar).
  if (!(P.Delta_bar_star > 0.0)) {
    std::ostringstream msg;
    msg << "derive_params: beta = " << beta << " leaves no room for a t decrease at delta_bar = "
        << d;
    throw Error(ErrorKind::kDomain, msg.str());
  }
  P.sigma = P.Delta_bar_star / (sq_nu + (sq_nu + 1.0) * P.Delta_bar_star);
  P.gamma = d / ((nu + 2.0 * sq_nu) * (1.0 + d));
  P.vartheta = (beta + d) / (1.0 - d);
  P.delta_hat_star = beta / (2.0 + beta + 2.0 * std::sqrt(1.0 + beta));
  P.delta_hat_bar = delta_hat_fraction * P.delta_hat_star;
  const double dh = P.delta_hat_bar;
  const double D = (1.0 - dh) * (1.0 - dh) * beta * beta - 4.0 * dh * beta;
  if (D < 0.0) {
    throw Error(ErrorKind::kDomain, "derive_params: delta_hat_bar too large for beta");
  }
  const double sD = std::sqrt(D);
  P.eta_lower = beta * ((1.0 - dh) * beta - 2.0 * dh + sD) / ((1.0 + dh) * beta + sD);
  return P;
}

PathParams default_params(double delta_bar, double beta_frac, double nu, Mode mode) {
  if (!(beta_frac > 0.0) || !(beta_frac < 1.0)) {
    throw Error(ErrorKind::kDomain, "default_params: beta_frac must lie in (0, 1)");
  }
  if (mode == Mode::kExact) return derive_params(0.0, beta_frac * kExactBetaMax, nu, mode);
  const CubicRoots r = beta_roots(delta_bar);
  return derive_params(delta_bar, beta_frac * r.beta_hi, nu, mode);
}

std::optional<double> phase1_step(double lambda, double dh) {
  if (!(lambda > 0.0)) return 1.0;
  if (dh == 0.0) return 1.0 / (1.0 + lambda);
  const double disc = (1.0 - dh) * (1.0 - dh) * lambda * lambda - 4.0 * dh * lambda;
  if (disc < 0.0) return std::nullopt;
  return ((1.0 - dh) * lambda - 2.0 * dh + std::sqrt(disc)) / (2.0 * lambda * (1.0 + lambda));
}

IterationBounds iteration_bounds(const PathParams& P, double t0, double eps_d,
                                 std::optional<double> d_start, std::optional<double> d_star_t0) {
  if (!(t0 > 0.0) || !(eps_d > 0.0)) {
    throw Error(ErrorKind::kDomain, "iteration_bounds: t0 and eps_d must be positive");
  }
  IterationBounds out;
  if (P.mode == Mode::kExact) {
    const double sq_nu = std::sqrt(P.nu);
    const double rate = std::log1p(P.Delta_bar_star / (sq_nu * (P.Delta_bar_star + 1.0)));
    out.k_max = static_cast<long>(std::floor(std::log(t0 * omega_star(P.beta) / eps_d) / rate)) + 1;
  } else {
    out.k_max = static_cast<long>(std::floor(std::log(eps_d / (t0 * omega_star(P.vartheta))) /
                                             std::log1p(-P.sigma))) +
                1;
  }
  // A start that already meets the stop test gives a nonpositive ratio.
  out.k_max = std::max(out.k_max, 1L);
  if (d_start && d_star_t0) {
    const double gap = *d_start - *d_star_t0;
    double j = 0.0;
    if (P.mode == Mode::kExact) {
      j = std::floor(gap / (t0 * omega(P.beta))) + 1.0;
    } else {
      j = std::floor((gap + omega_star(P.delta_hat_bar)) / (t0 * omega(P.eta_lower))) + 1.0;
    }
    out.j_max = std::max(0L, static_cast<long>(j));
  }
  return out;
}

Phase1Result phase1(const PreparedProblem& problem, const PathParams& P, const SolverConfig& config,
                    const Vec& y00, std::vector<LogRow>* rows, const RowCallback& callback,
                    Clock::time_point start) {
  const bool exact = P.mode == Mode::kExact;
  const DualAccuracy acc =
      exact ? DualAccuracy::exact_floor()
            : DualAccuracy::phase1(P.delta_hat_bar, config.t0, problem.nu, config.master.sub.rule);

  Phase1Result out;
  out.y = y00;
  out.last = eval_dual(problem, out.y, config.t0, acc, nullptr, config.master);
  out.d_start = out.last.d_val;
  long inner = out.last.inner_iters_total;

  for (int j = 0;; ++j) {
    LogRow row = make_row("1", j, out.last, inner, start);
    const bool done = out.last.lambda_bar <= P.beta;
    if (!done && j < config.phase1_cap) {
      std::optional<double> alpha = exact ? std::optional<double>(1.0 / (1.0 + out.last.lambda_bar))
                                          : phase1_step(out.last.lambda_bar, P.delta_hat_bar);
      if (!alpha) {
        ++out.alpha_fallbacks;
        alpha = 1.0 / (1.0 + out.last.lambda_bar);
      }
      row.alpha = *alpha;
    }
    if (rows) rows->push_back(row);
    if (callback) callback(row);
    if (done) {
      out.converged = true;
      out.iterations = j;
      return out;
    }
    if (j >= config.phase1_cap) {
      out.iterations = j;
      return out;
    }
    out.y += row.alpha * newton_direction(out.last, config.master.use_cg);
    const auto warm = out.last.warm();
    out.last = eval_dual(problem, out.y, config.t0, acc, &warm, config.master);
    inner = out.last.inner_iters_total;
  }
}

SolveReport phase2(const PreparedProblem& problem, const PathParams& P, const SolverConfig& config,
                   DualIterate first, const RowCallback& callback, Clock::time_point start) {
  SolveReport rep;
  rep.params = P;
  rep.k_max = iteration_bounds(P, config.t0, config.eps_d).k_max;
  const long cap = static_cast<long>(config.phase2_cap_factor) * rep.k_max;
  const double stop_t = config.eps_d / omega_star(P.vartheta);

  DualIterate cur = std::move(first);
  long k = 0;
  for (;;) {
    bool stop = false;
    if (config.measured_stop) {
      const double vk = (cur.lambda_bar + P.delta_bar) / (1.0 - P.delta_bar);
      stop = vk < 1.0 && omega_star(vk) * cur.t <= config.eps_d;
    } else {
      stop = cur.t <= stop_t;
    }
    if (stop) {
      rep.status = Status::kConverged;
      break;
    }
    if (k >= cap) {
      rep.status = Status::kPhase2Cap;
      rep.message = "phase 2 iteration cap reached";
      break;
    }

    const DualAccuracy acc = phase2_accuracy(P, config, cur.t);
    double t_next = cur.t * (1.0 - P.sigma);
    if (config.adaptive_t) {
      const double d = P.delta_bar;
      const double R = (d / (1.0 - d) + barrier_gradient_norm(cur)) / (1.0 - d);
      t_next = cur.t - P.Delta_bar_star * cur.t / (R + (R + 1.0) * P.Delta_bar_star);
    }

    auto step = [&](const DualAccuracy& a, DualIterate& mid, DualIterate& nxt) {
      const auto warm = cur.warm();
      mid = eval_dual(problem, cur.y, t_next, a, &warm, config.master);
      const Vec y_next = cur.y + newton_direction(mid, config.master.use_cg);
      const auto warm_mid = mid.warm();
      nxt = eval_dual(problem, y_next, t_next, a, &warm_mid, config.master);
    };

    DualIterate mid, nxt;
    step(acc, mid, nxt);
    bool guard = false;
    if (nxt.lambda_bar > P.beta) {
      guard = true;
      ++rep.guard_events;
      step(acc.tightened(10.0), mid, nxt);
      if (nxt.lambda_bar > 1.1 * P.beta) {
        std::ostringstream msg;
        msg << "centrality lost at k = " << k + 1 << ": lambda_bar = " << nxt.lambda_bar
            << " > beta = " << P.beta << " after a tightened retry";
        rep.status = Status::kNumericalFailure;
        rep.message = msg.str();
        cur = std::move(nxt);
        ++k;
        break;
      }
    }

    ++k;
    LogRow row = make_row("2", k, nxt, mid.inner_iters_total + nxt.inner_iters_total, start);
    row.delta_cert = std::max(mid.delta_cert_total, nxt.delta_cert_total);
    row.certified = P.mode == Mode::kExact ||
                    (mid.delta_cert_total <= P.delta_bar && nxt.delta_cert_total <= P.delta_bar);
    row.Delta = solution_shift(cur, mid);
    row.guard = guard;
    rep.rows.push_back(row);
    if (callback) callback(row);
    cur = std::move(nxt);
  }

  rep.phase2_iters = static_cast<int>(k);
  rep.y = cur.y;
  rep.t_final = cur.t;
  rep.d_delta = cur.d_val;
  rep.lambda_bar = cur.lambda_bar;
  rep.feas_gap = cur.feas_gap;
  rep.x.clear();
  for (const auto& r : cur.blocks) rep.x.push_back(r.x_bar);
  rep.wall_ms = ms_since(start);
  return rep;
}

SolveReport solve(const PreparedProblem& problem, const SolverConfig& config,
                  const std::optional<Vec>& y00, const RowCallback& callback) {
  const auto start = Clock::now();
  PathParams P;
  if (config.mode == Mode::kExact) {
    P = derive_params(0.0, config.beta_frac * kExactBetaMax, problem.nu, Mode::kExact);
  } else {
    const CubicRoots r = beta_roots(config.delta_bar);
    P = derive_params(config.delta_bar, config.beta_frac * r.beta_hi, problem.nu, Mode::kInexact,
                      config.delta_hat_fraction);
  }
  const Vec y0 = y00.value_or(Vec::Zero(problem.m()));

  SolveReport rep;
  rep.params = P;
  rep.k_max = iteration_bounds(P, config.t0, config.eps_d).k_max;
  std::vector<LogRow> rows;
  try {
    Phase1Result p1 = phase1(problem, P, config, y0, &rows, callback, start);
    if (!p1.converged) {
      rep.status = Status::kPhase1Cap;
      rep.message = "phase 1 iteration cap reached";
      rep.rows = std::move(rows);
      rep.y = p1.y;
      rep.t_final = config.t0;
      rep.d_delta = p1.last.d_val;
      rep.lambda_bar = p1.last.lambda_bar;
      rep.feas_gap = p1.last.feas_gap;
      rep.phase1_iters = p1.iterations;
      rep.d_start = p1.d_start;
      rep.alpha_fallbacks = p1.alpha_fallbacks;
      for (const auto& r : p1.last.blocks) rep.x.push_back(r.x_bar);
      rep.wall_ms = ms_since(start);
      return rep;
    }
    SolveReport p2 = phase2(problem, P, config, std::move(p1.last), callback, start);
    rows.insert(rows.end(), p2.rows.begin(), p2.rows.end());
    p2.rows = std::move(rows);
    p2.phase1_iters = p1.iterations;
    p2.d_start = p1.d_start;
    p2.alpha_fallbacks = p1.alpha_fallbacks;
    return p2;
  } catch (const Error& e) {
    rep.status = e.kind() == ErrorKind::kNumerical ? Status::kNumericalFailure
                                                   : Status::kBlockFailure;
    rep.message = e.what();
    rep.rows = std::move(rows);
    rep.wall_ms = ms_since(start);
    return rep;
  }
}

SolveReport solve_exact(const PreparedProblem& problem, double beta, double t0, double eps_d,
                        const std::optional<Vec>& y00, const MasterOptions& master,
                        const RowCallback& callback) {
  SolverConfig config;
  config.mode = Mode::kExact;
  config.beta_frac = beta / kExactBetaMax;
  config.t0 = t0;
  config.eps_d = eps_d;
  config.master = master;
  return solve(problem, config, y00, callback);
}

}  // namespace dualpath
