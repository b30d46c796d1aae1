#pragma once

#include <memory>
#include <optional>
#include <string>

#include <Eigen/Cholesky>

#include "dualpath/types.hpp"

namespace dualpath {

/// omega(t) = t - ln(1 + t), defined for t >= 0.
double omega(double t);

/// omega_star(t) = -t - ln(1 - t), defined for 0 <= t < 1.
double omega_star(double t);

/// Local norm sqrt(u' H u). Throws if H is not positive definite.
double local_norm(const Mat& H, const Vec& u);

/// Dual local norm sqrt(u' H^{-1} u). Throws if H is not positive definite.
double dual_local_norm(const Mat& H, const Vec& u);

/// Dual local norm against an existing Cholesky factorization.
double dual_local_norm(const Eigen::LLT<Mat>& H, const Vec& u);

/// Linear description G x <= h of a polyhedral barrier domain.
struct Polytope {
  Mat G;
  Vec h;
};

/// A self-concordant barrier on an open convex set in R^n.
///
/// Implementations are immutable after construction and safe to share
/// between threads.
class Barrier {
 public:
  virtual ~Barrier() = default;

  virtual Index dim() const = 0;

  /// Barrier parameter nu.
  virtual double nu() const = 0;

  /// True when x lies in the open domain.
  virtual bool contains(const Vec& x) const = 0;

  virtual double value(const Vec& x) const = 0;
  virtual Vec gradient(const Vec& x) const = 0;
  virtual Mat hessian(const Vec& x) const = 0;

  /// Short tag used by the instance format.
  virtual std::string kind() const = 0;

  /// Closure of the domain as G x <= h when it is polyhedral.
  virtual std::optional<Polytope> polytope() const { return std::nullopt; }

  /// A point in the domain, when one is known without further data.
  virtual std::optional<Vec> interior_point() const { return std::nullopt; }
};

using BarrierPtr = std::shared_ptr<const Barrier>;

/// Result of analytic centering.
struct AnalyticCenter {
  Vec x;
  double value = 0.0;
  /// Newton decrement lambda_F(x) at the returned point.
  double decrement = 0.0;
  int iterations = 0;
};

/// Minimizes F by damped Newton from an interior point.
///
/// Steps are (1 + lambda)^{-1} H^{-1} g while lambda >= (3 - sqrt 5) / 2 and
/// full Newton steps afterwards, halved whenever a trial point leaves the
/// domain. Stops when lambda_F <= tol.
AnalyticCenter analytic_center(const Barrier& F, const Vec& x0,
                               double tol = 1e-10, int max_iter = 500);

/// Finite-difference and self-concordance diagnostics at one point.
struct BarrierCheck {
  /// Max relative error of the analytic gradient against central differences.
  double gradient_rel_err = 0.0;
  /// Max relative error of the analytic Hessian against differenced gradients.
  double hessian_rel_err = 0.0;
  /// |D^3F[u,u,u]| / (2 ||u||_x^3) along the probe direction, <= 1 for a
  /// self-concordant function.
  double sc_ratio = 0.0;
};

/// Runs the derivative checks at x along the unit direction u.
BarrierCheck check_barrier(const Barrier& F, const Vec& x, const Vec& u);

}  // namespace dualpath
