#pragma once

#include <limits>
#include <span>
#include <vector>

#include "dualpath/problem.hpp"

namespace dualpath {

/// Which residual terminates the inner Newton method.
enum class StopRule {
  /// E = ||c + A'y - t grad F(x)||*_x at the iterate (default).
  kLocal,
  /// E^c = the same residual measured at the analytic center.
  kCenter,
};

struct SubproblemOptions {
  StopRule rule = StopRule::kLocal;
  /// Full Newton steps are taken once the decrement drops below this value.
  double beta_full = 0.3819660112501051;
  int max_iter = 200;
  /// Try longer steps than (1 + lambda)^{-1} when they give at least the
  /// guaranteed decrease omega(lambda).
  bool line_search = true;
};

/// A block ready for repeated solves, in reduced coordinates z with
/// x = Z z + x_part. Blocks without local equalities use Z = I.
struct PreparedBlock {
  Block original;
  NullSpaceReduction reduction;
  Block reduced;
  /// c'x_part and A x_part, the constant parts of c'x and A x.
  double c_offset = 0.0;
  Vec A_offset;
  double nu = 0.0;
  Vec z_center;
  double F_center = 0.0;
  /// Factorization of the reduced barrier Hessian at the analytic center.
  Eigen::LLT<Mat> center_llt;

  Index reduced_dim() const { return reduced.dim(); }
};

/// Reduces the block and computes its analytic center.
PreparedBlock prepare_block(const Block& block, double center_tol = 1e-10);

/// Accuracy request for one block solve.
struct BlockTarget {
  /// Threshold on the residual selected by the stop rule.
  double eps = 0.0;
  /// Upper bound demanded of delta_cert; infinity disables the gate.
  double delta = std::numeric_limits<double>::infinity();
  /// Drive the residual to the numerical floor instead of eps.
  bool exact = false;
};

struct SubproblemResult {
  Vec z_bar;
  Vec x_bar;
  /// E^c: residual in the dual norm at the analytic center.
  double residual_c = 0.0;
  /// E: residual in the dual norm at z_bar.
  double residual_local = 0.0;
  int newton_iters = 0;
  /// Certified bound on ||x_bar - x*||_{x*}; infinite when not available.
  double delta_cert = std::numeric_limits<double>::infinity();
  /// Residual floor in force for this solve.
  double floor = 0.0;
  /// Reduced barrier value, gradient and Hessian factorization at z_bar.
  double F_value = 0.0;
  Vec F_gradient;
  Eigen::LLT<Mat> hessian_llt;
};

/// eps_p = delta t / ((nu + 2 sqrt(nu)) (1 + delta)).
double primal_accuracy(double delta_bar, double t, double nu);

/// Phase-1 variant with the extra factor 1/2:
/// eps_p = t0 delta / (2 (nu + 2 sqrt(nu)) (1 + delta)).
double primal_accuracy_phase1(double delta_hat, double t0, double nu);

/// Threshold for the local residual, delta (1 - delta) t / (1 + delta).
double local_accuracy(double delta_bar, double t);

/// (nu + 2 sqrt(nu)) E^c / (t - (nu + 2 sqrt(nu)) E^c), or infinity when the
/// denominator is not positive.
double certificate(double residual_c, double t, double nu);

/// Bound lambda / (1 - 2 lambda) on ||x - x*||_{x*} from the Newton
/// decrement lambda of the block objective at x; infinity for lambda >= 1/2.
double certificate_local(double lambda);

/// Splits eps over M blocks, evenly or by caller weights summing to one.
std::vector<double> split_tolerance(double eps, std::size_t M,
                                    std::span<const double> weights = {});

/// Newton's method on psi(z) = F~(z) - (c~ + A~'y)'z / t from warm_z.
///
/// Throws Error(kIterationCap) when the iteration cap is reached and
/// Error(kNumerical) on factorization failure.
SubproblemResult solve_block(const PreparedBlock& block, const Vec& y, double t,
                             const BlockTarget& target, const Vec& warm_z,
                             const SubproblemOptions& options = {});

}  // namespace dualpath
