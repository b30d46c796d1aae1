#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "dualpath/subproblem.hpp"

namespace dualpath {

/// Problem with every block reduced and centered, ready for dual evaluations.
struct PreparedProblem {
  std::vector<PreparedBlock> blocks;
  Vec b;
  double nu = 0.0;

  Index m() const { return b.size(); }
  std::size_t M() const { return blocks.size(); }
};

/// Validates the problem and prepares every block (analytic centers are
/// computed on up to `threads` workers).
PreparedProblem prepare(const SeparableProblem& problem, int threads = 1);

/// Accuracy policy for one evaluation of the smoothed dual.
struct DualAccuracy {
  /// Residual threshold for the whole problem, split evenly across blocks.
  double eps_total = 0.0;
  /// Bound demanded of the aggregated certificate sqrt(sum delta_i^2); each
  /// block is asked for delta_total / sqrt(M).
  double delta_total = std::numeric_limits<double>::infinity();
  bool exact = false;

  /// Phase-2 accuracy for delta_bar at the given t. The residual threshold
  /// is local_accuracy for StopRule::kLocal and primal_accuracy otherwise.
  static DualAccuracy inexact(double delta_bar, double t, double nu, StopRule rule);
  /// Phase-1 accuracy, with the extra factor 1/2 on the threshold.
  static DualAccuracy phase1(double delta_hat, double t0, double nu, StopRule rule);
  /// Residual driven to the numerical floor of every block.
  static DualAccuracy exact_floor();

  /// Same request with the residual threshold divided by `factor`.
  DualAccuracy tightened(double factor) const;
};

struct MasterOptions {
  int threads = 1;
  SubproblemOptions sub;
  /// Solve Newton systems by Jacobi-preconditioned CG instead of Cholesky.
  bool use_cg = false;
};

/// Inexact smoothed dual and its derivatives at (y, t).
struct DualIterate {
  Vec y;
  double t = 0.0;
  double d_val = 0.0;
  /// A x_bar - b.
  Vec grad;
  /// (1/t) sum_i A_i (grad^2 F_i(x_bar_i))^{-1} A_i' in reduced coordinates.
  Mat hess;
  Eigen::LLT<Mat> hess_llt;
  double lambda_bar = 0.0;
  double feas_gap = 0.0;
  /// sqrt(sum_i delta_cert_i^2), a bound on ||x_bar - x*||_{x*}.
  double delta_cert_total = 0.0;
  long inner_iters_total = 0;
  std::vector<SubproblemResult> blocks;

  std::vector<Vec> warm() const;
};

/// Solves every block and assembles the dual quantities. A block failure
/// is rethrown with the block index prefixed to the message.
DualIterate eval_dual(const PreparedProblem& problem, const Vec& y, double t,
                      const DualAccuracy& accuracy, const std::vector<Vec>* warm = nullptr,
                      const MasterOptions& options = {});

/// Solves hess * dy = -grad.
Vec newton_direction(const Mat& hess, const Vec& grad, bool use_cg = false);
Vec newton_direction(const DualIterate& it, bool use_cg = false);

/// Brackets on d0(y) - d(y, t) from a near-exact iterate.
struct DualBounds {
  /// t sum_i omega(||x*_i - x^c_i||_{x^c_i}).
  double lower = 0.0;
  /// t sum_i (omega*(lambda_i) + nu_i), present when every lambda_i < 1.
  std::optional<double> local_upper;
  /// t sum_i nu_i (1 + max(0, ln(K_i / (nu_i t)))), present when K is given.
  std::optional<double> global_upper;
  /// lambda_i = ||grad F_i(x*_i)||*_{x*_i}.
  std::vector<double> lambda_F;
};

DualBounds exact_dual_bounds(const PreparedProblem& problem, const DualIterate& it,
                             const std::vector<double>* K = nullptr);

/// K_i = (nu_i + 2 sqrt(nu_i)) max_y ||c_i + A_i'y||*_{x^c_i} over the
/// caller's sample of Y.
std::vector<double> estimate_K(const PreparedProblem& problem, const std::vector<Vec>& y_samples);

/// Largest t for which d(y, t) <= d0(y) <= d(y, t) + eps_d is guaranteed:
/// min over i of (K_i / nu_i) kappa^{1/kappa} and
/// eps_d^{1/(1-kappa)} (sum_i nu_i + (K_i/nu_i)^kappa)^{-1/(1-kappa)}.
double choose_t_bar(const std::vector<double>& K, const std::vector<double>& nu, double eps_d,
                    double kappa);

}  // namespace dualpath
