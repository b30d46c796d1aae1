#include "dualpath/scfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dualpath {

double omega(double t) {
  if (!(t >= 0.0)) {
    throw Error(ErrorKind::kDomain, "omega: argument must be nonnegative");
  }
  return t - std::log1p(t);
}

double omega_star(double t) {
  if (!(t >= 0.0) || !(t < 1.0)) {
    throw Error(ErrorKind::kDomain, "omega_star: argument must lie in [0, 1)");
  }
  return -t - std::log1p(-t);
}

double local_norm(const Mat& H, const Vec& u) {
  Eigen::LLT<Mat> llt(H);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::kNumerical, "local_norm: matrix is not positive definite");
  }
  // ||L' u||_2 with H = L L'.
  Vec w = llt.matrixU() * u;
  return w.norm();
}

double dual_local_norm(const Mat& H, const Vec& u) {
  Eigen::LLT<Mat> llt(H);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::kNumerical,
                "dual_local_norm: matrix is not positive definite");
  }
  return dual_local_norm(llt, u);
}

double dual_local_norm(const Eigen::LLT<Mat>& H, const Vec& u) {
  Vec w = H.matrixL().solve(u);
  return w.norm();
}

AnalyticCenter analytic_center(const Barrier& F, const Vec& x0, double tol,
                               int max_iter) {
  if (x0.size() != F.dim()) {
    throw Error(ErrorKind::kInvalidInstance, "analytic_center: dimension mismatch");
  }
  if (!F.contains(x0)) {
    throw Error(ErrorKind::kDomain, "analytic_center: start point is not interior");
  }
  const double full_step = (3.0 - std::sqrt(5.0)) / 2.0;

  AnalyticCenter out;
  Vec x = x0;
  for (int it = 0; it <= max_iter; ++it) {
    Vec g = F.gradient(x);
    Eigen::LLT<Mat> llt(F.hessian(x));
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorKind::kNumerical,
                  "analytic_center: barrier Hessian is not positive definite");
    }
    Vec dx = -llt.solve(g);
    double lambda = std::sqrt(std::max(0.0, -g.dot(dx)));
    if (lambda <= tol) {
      out.x = x;
      out.value = F.value(x);
      out.decrement = lambda;
      out.iterations = it;
      return out;
    }
    if (it == max_iter) {
      break;
    }
    double alpha = lambda < full_step ? 1.0 : 1.0 / (1.0 + lambda);
    Vec trial = x + alpha * dx;
    int halvings = 0;
    while (!F.contains(trial)) {
      alpha *= 0.5;
      trial = x + alpha * dx;
      if (++halvings > 60) {
        throw Error(ErrorKind::kNumerical,
                    "analytic_center: could not keep the iterate interior");
      }
    }
    x = std::move(trial);
  }
  throw Error(ErrorKind::kIterationCap,
              "analytic_center: iteration cap reached before tolerance");
}

BarrierCheck check_barrier(const Barrier& F, const Vec& x, const Vec& u_raw) {
  // The probe direction is rescaled to unit local norm so the step h is
  // measured in the Dikin metric and errors are comparable across barriers.
  const Mat H = F.hessian(x);
  const double un = local_norm(H, u_raw);
  const Vec u = u_raw / un;
  const Vec Hu = H * u;
  const Vec g = F.gradient(x);

  BarrierCheck out;

  const double h1 = 1e-5;
  const double fd_dir = (F.value(x + h1 * u) - F.value(x - h1 * u)) / (2.0 * h1);
  const double gu = g.dot(u);
  out.gradient_rel_err = std::abs(fd_dir - gu) / std::max(1.0, std::abs(gu));

  const double h2 = 1e-5;
  const Vec fd_hu = (F.gradient(x + h2 * u) - F.gradient(x - h2 * u)) / (2.0 * h2);
  // ||Hu||*_x = ||u||_x = 1, so the dual norm of the error is already relative.
  out.hessian_rel_err = dual_local_norm(H, fd_hu - Hu);

  const double h3 = 1e-4;
  const double qp = u.dot(F.hessian(x + h3 * u) * u);
  const double qm = u.dot(F.hessian(x - h3 * u) * u);
  out.sc_ratio = std::abs((qp - qm) / (2.0 * h3)) / 2.0;
  return out;
}

}  // namespace dualpath
