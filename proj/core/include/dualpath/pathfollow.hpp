#pragma once

#include <array>
#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dualpath/master.hpp"

namespace dualpath {

/// Largest delta_bar for which the centrality cubic has three real roots.
inline constexpr double kDeltaBarMax = 0.0432863855;

/// Upper end (3 - sqrt 5) / 2 of the admissible beta range in exact mode.
inline constexpr double kExactBetaMax = 0.3819660112501051;

enum class Mode { kInexact, kExact };

std::string to_string(Mode mode);

/// Real roots of P(beta) = c0 + c1 beta + c2 beta^2 + c3 beta^3, ascending.
struct CubicRoots {
  double beta_lo = 0.0;
  double beta_hi = 0.0;
  double beta_3 = 0.0;
  std::array<double, 4> coeffs{};
  double p = 0.0;
  double discriminant = 0.0;
};

/// Coefficients of the cubic for a given delta_bar.
std::array<double, 4> cubic_coefficients(double delta_bar, double* p_out = nullptr);

/// Discriminant of the cubic; nonnegative exactly when it has three real roots.
double cubic_discriminant(double delta_bar);

/// Roots by companion-matrix eigenvalues. Throws Error(kDomain) when
/// delta_bar is outside [0, kDeltaBarMax] or the discriminant is negative.
CubicRoots beta_roots(double delta_bar);

/// All constants of the path-following scheme.
struct PathParams {
  Mode mode = Mode::kInexact;
  double delta_bar = 0.0;
  double beta_lo = 0.0;
  double beta_hi = 0.0;
  double beta = 0.0;
  double p = 0.0;
  double q = 0.0;
  double theta = 0.0;
  double Delta_bar = 0.0;
  double Delta_bar_star = 0.0;
  double sigma = 0.0;
  double gamma = 0.0;
  double vartheta = 0.0;
  double delta_hat_star = 0.0;
  double delta_hat_bar = 0.0;
  double eta_lower = 0.0;
  double nu = 0.0;
};

/// Derives every constant from (delta_bar, beta, nu). In exact mode
/// delta_bar is ignored (treated as zero) and beta must lie in
/// (0, (3 - sqrt 5)/2).
///
/// @param delta_hat_fraction Phase-1 accuracy as a fraction of delta_hat_star.
PathParams derive_params(double delta_bar, double beta, double nu, Mode mode,
                         double delta_hat_fraction = 0.5);

/// derive_params with beta = beta_frac times the upper root (or times
/// (3 - sqrt 5)/2 in exact mode).
PathParams default_params(double delta_bar, double beta_frac, double nu, Mode mode);

/// Damped step size of the inexact Phase 1,
/// [(1-d) l - 2d + sqrt((1-d)^2 l^2 - 4 d l)] / (2 l (1 + l)).
/// Returns nullopt when the discriminant is negative.
std::optional<double> phase1_step(double lambda_bar, double delta_hat);

struct IterationBounds {
  long k_max = 0;
  std::optional<long> j_max;
};

/// k_max for Phase 2 and, when d*(t0) is supplied, J_max for Phase 1.
///
/// @param d_start d_delta(y00, t0) (inexact) or d(y00, t0) (exact).
/// @param d_star_t0 d*(t0) from an oracle.
IterationBounds iteration_bounds(const PathParams& params, double t0, double eps_d,
                                 std::optional<double> d_start = std::nullopt,
                                 std::optional<double> d_star_t0 = std::nullopt);

enum class Status { kConverged, kPhase1Cap, kPhase2Cap, kBlockFailure, kNumericalFailure };

std::string to_string(Status status);

/// One logged iterate.
struct LogRow {
  std::string phase;
  long k = 0;
  double t = 0.0;
  double lambda_bar = 0.0;
  double d_delta = 0.0;
  double feas_gap = 0.0;
  long inner_iters_total = 0;
  double elapsed_ms = 0.0;
  /// Aggregated block certificate at this iterate.
  double delta_cert = 0.0;
  /// Every block met its certificate target.
  bool certified = true;
  /// ||x_bar(y_k, t_{k+1}) - x_bar(y_k, t_k)|| in the local norm, Phase 2 only.
  double Delta = 0.0;
  /// Step size taken from this iterate (Phase 1).
  double alpha = 0.0;
  /// The centrality guard fired on this step.
  bool guard = false;
};

struct SolverConfig {
  Mode mode = Mode::kInexact;
  double delta_bar = 0.01;
  double beta_frac = 0.25;
  double t0 = 0.25;
  double eps_d = 1e-4;
  /// Adaptive t decrease using ||grad F(x_bar)||* instead of sqrt(nu).
  bool adaptive_t = false;
  /// Stop when omega*(vartheta_k) t_k <= eps_d with the measured decrement.
  bool measured_stop = false;
  int phase1_cap = 5000;
  /// Phase-2 cap as a multiple of k_max.
  int phase2_cap_factor = 10;
  /// Phase-1 accuracy as a fraction of delta_hat_star.
  double delta_hat_fraction = 0.5;
  MasterOptions master;
};

struct SolveReport {
  Status status = Status::kConverged;
  std::string message;
  PathParams params;
  std::vector<LogRow> rows;
  Vec y;
  std::vector<Vec> x;
  double t_final = 0.0;
  double d_delta = 0.0;
  double lambda_bar = 0.0;
  double feas_gap = 0.0;
  int phase1_iters = 0;
  int phase2_iters = 0;
  long k_max = 0;
  /// d_delta(y00, t0), kept so J_max can be evaluated once d*(t0) is known.
  double d_start = 0.0;
  /// Number of Phase-1 steps where the step-size discriminant was negative.
  int alpha_fallbacks = 0;
  int guard_events = 0;
  double wall_ms = 0.0;
};

using RowCallback = std::function<void(const LogRow&)>;

/// Damped Newton at fixed t0 until lambda_bar <= beta.
struct Phase1Result {
  Vec y;
  DualIterate last;
  int iterations = 0;
  int alpha_fallbacks = 0;
  double d_start = 0.0;
  bool converged = false;
};

Phase1Result phase1(const PreparedProblem& problem, const PathParams& params,
                    const SolverConfig& config, const Vec& y00, std::vector<LogRow>* rows,
                    const RowCallback& callback = {},
                    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now());

/// Full-step path following from a Phase-1 point. `first` must be the
/// evaluation at (y0, t0) returned by Phase 1.
SolveReport phase2(const PreparedProblem& problem, const PathParams& params,
                   const SolverConfig& config, DualIterate first, const RowCallback& callback = {},
                   std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now());

/// Phase 1 followed by Phase 2 in the mode selected by the config. The
/// exact mode runs damped steps 1/(1 + lambda) and full steps with
/// subproblems at the numerical floor.
SolveReport solve(const PreparedProblem& problem, const SolverConfig& config,
                  const std::optional<Vec>& y00 = std::nullopt, const RowCallback& callback = {});

/// Exact-mode solve with an explicit beta in (0, (3 - sqrt 5)/2).
SolveReport solve_exact(const PreparedProblem& problem, double beta, double t0, double eps_d,
                        const std::optional<Vec>& y00 = std::nullopt,
                        const MasterOptions& master = {}, const RowCallback& callback = {});

}  // namespace dualpath
