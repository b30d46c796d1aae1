#include "dualpath/master.hpp"

#include <cmath>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include "dualpath/parallel.hpp"

namespace dualpath {

PreparedProblem prepare(const SeparableProblem& problem, int threads) {
  require_valid(problem);
  PreparedProblem out;
  out.b = problem.b;
  out.blocks.resize(problem.blocks.size());
  parallel_for(problem.blocks.size(), threads, [&](std::size_t i) {
    try {
      out.blocks[i] = prepare_block(problem.blocks[i]);
    } catch (const Error& e) {
      throw Error(e.kind(), "block " + std::to_string(i) + ": " + e.what());
    }
  });
  for (const auto& pb : out.blocks) out.nu += pb.nu;
  return out;
}

DualAccuracy DualAccuracy::inexact(double delta_bar, double t, double nu, StopRule rule) {
  DualAccuracy a;
  a.eps_total = rule == StopRule::kLocal ? local_accuracy(delta_bar, t)
                                         : primal_accuracy(delta_bar, t, nu);
  a.delta_total = delta_bar;
  return a;
}

DualAccuracy DualAccuracy::phase1(double delta_hat, double t0, double nu, StopRule rule) {
  DualAccuracy a;
  a.eps_total = rule == StopRule::kLocal ? 0.5 * local_accuracy(delta_hat, t0)
                                         : primal_accuracy_phase1(delta_hat, t0, nu);
  a.delta_total = delta_hat;
  return a;
}

DualAccuracy DualAccuracy::exact_floor() {
  DualAccuracy a;
  a.exact = true;
  return a;
}

DualAccuracy DualAccuracy::tightened(double factor) const {
  DualAccuracy a = *this;
  a.eps_total /= factor;
  if (std::isfinite(a.delta_total)) a.delta_total /= factor;
  return a;
}

std::vector<Vec> DualIterate::warm() const {
  std::vector<Vec> out;
  out.reserve(blocks.size());
  for (const auto& r : blocks) out.push_back(r.z_bar);
  return out;
}

DualIterate eval_dual(const PreparedProblem& problem, const Vec& y, double t,
                      const DualAccuracy& accuracy, const std::vector<Vec>* warm,
                      const MasterOptions& options) {
  if (!(t > 0.0)) {
    throw Error(ErrorKind::kDomain, "eval_dual: t must be positive");
  }
  if (y.size() != problem.m()) {
    throw Error(ErrorKind::kInvalidInstance, "eval_dual: y has the wrong length");
  }
  const std::size_t M = problem.M();
  const auto eps = split_tolerance(accuracy.eps_total, M);
  const double delta_block = accuracy.delta_total / std::sqrt(static_cast<double>(M));

  struct Partial {
    double d = 0.0;
    Vec Ax;
    Mat H;
  };
  std::vector<SubproblemResult> results(M);
  std::vector<Partial> parts(M);

  parallel_for(M, options.threads, [&](std::size_t i) {
    const PreparedBlock& pb = problem.blocks[i];
    BlockTarget target{eps[i], delta_block, accuracy.exact};
    static const Vec kNoWarm;
    const Vec& w = warm && i < warm->size() ? (*warm)[i] : kNoWarm;
    try {
      results[i] = solve_block(pb, y, t, target, w, options.sub);
    } catch (const Error& e) {
      throw Error(e.kind(), "block " + std::to_string(i) + ": " + e.what());
    }
    const SubproblemResult& r = results[i];
    Partial& p = parts[i];
    p.Ax = pb.reduced.A * r.z_bar + pb.A_offset;
    p.d = pb.reduced.c.dot(r.z_bar) + pb.c_offset + y.dot(p.Ax) -
          t * (r.F_value - pb.F_center);
    // W = L^{-1} A~' so that A~ H^{-1} A~' = W'W.
    const Mat W = r.hessian_llt.matrixL().solve(pb.reduced.A.transpose());
    p.H = Mat::Zero(problem.m(), problem.m());
    p.H.selfadjointView<Eigen::Lower>().rankUpdate(W.transpose());
  });

  DualIterate it;
  it.y = y;
  it.t = t;
  it.grad = -problem.b;
  it.d_val = 0.0;
  Mat Hsum = Mat::Zero(problem.m(), problem.m());
  double delta_sq = 0.0;
  for (std::size_t i = 0; i < M; ++i) {
    it.d_val += parts[i].d;
    it.grad += parts[i].Ax;
    Hsum += parts[i].H;
    delta_sq += results[i].delta_cert * results[i].delta_cert;
    it.inner_iters_total += results[i].newton_iters;
  }
  it.d_val -= problem.b.dot(y);
  Hsum.triangularView<Eigen::StrictlyUpper>() = Hsum.transpose();
  it.hess = Hsum / t;
  it.hess_llt.compute(it.hess);
  if (it.hess_llt.info() != Eigen::Success) {
    throw Error(ErrorKind::kNumerical, "eval_dual: dual Hessian is not positive definite");
  }
  const double q = it.grad.dot(it.hess_llt.solve(it.grad));
  it.lambda_bar = std::sqrt(std::max(0.0, q) / t);
  it.feas_gap = std::sqrt(std::max(0.0, q) * t);
  it.delta_cert_total = std::sqrt(delta_sq);
  it.blocks = std::move(results);
  return it;
}

Vec newton_direction(const Mat& hess, const Vec& grad, bool use_cg) {
  if (hess.rows() != hess.cols() || hess.rows() != grad.size()) {
    throw Error(ErrorKind::kInvalidInstance, "newton_direction: dimension mismatch");
  }
  if (!use_cg) {
    Eigen::LLT<Mat> llt(hess);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorKind::kNumerical, "newton_direction: Hessian is not positive definite");
    }
    return -llt.solve(grad);
  }
  const Eigen::SparseMatrix<double> S = hess.sparseView();
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-12);
  cg.setMaxIterations(std::max<Index>(10 * hess.rows(), 100));
  cg.compute(S);
  Vec dy = cg.solve(-grad);
  if (cg.info() != Eigen::Success) {
    throw Error(ErrorKind::kNumerical, "newton_direction: CG did not converge");
  }
  return dy;
}

Vec newton_direction(const DualIterate& it, bool use_cg) {
  if (!use_cg) return -it.hess_llt.solve(it.grad);
  return newton_direction(it.hess, it.grad, true);
}

DualBounds exact_dual_bounds(const PreparedProblem& problem, const DualIterate& it,
                             const std::vector<double>* K) {
  const double t = it.t;
  DualBounds out;
  double lower = 0.0;
  double local = 0.0;
  bool local_ok = true;
  for (std::size_t i = 0; i < problem.M(); ++i) {
    const PreparedBlock& pb = problem.blocks[i];
    const SubproblemResult& r = it.blocks[i];
    const Vec dz = r.z_bar - pb.z_center;
    const double dist = (pb.center_llt.matrixU() * dz).norm();
    lower += omega(dist);
    const double lam = dual_local_norm(r.hessian_llt, r.F_gradient);
    out.lambda_F.push_back(lam);
    if (lam < 1.0) {
      local += omega_star(lam) + pb.nu;
    } else {
      local_ok = false;
    }
  }
  out.lower = t * lower;
  if (local_ok) out.local_upper = t * local;
  if (K) {
    if (K->size() != problem.M()) {
      throw Error(ErrorKind::kInvalidInstance, "exact_dual_bounds: one K per block required");
    }
    double g = 0.0;
    for (std::size_t i = 0; i < problem.M(); ++i) {
      const double nu = problem.blocks[i].nu;
      g += nu * (1.0 + std::max(0.0, std::log((*K)[i] / (nu * t))));
    }
    out.global_upper = t * g;
  }
  return out;
}

std::vector<double> estimate_K(const PreparedProblem& problem, const std::vector<Vec>& y_samples) {
  std::vector<double> K(problem.M(), 0.0);
  for (std::size_t i = 0; i < problem.M(); ++i) {
    const PreparedBlock& pb = problem.blocks[i];
    double best = 0.0;
    for (const Vec& y : y_samples) {
      const Vec g = pb.reduced.c + pb.reduced.A.transpose() * y;
      best = std::max(best, dual_local_norm(pb.center_llt, g));
    }
    K[i] = (pb.nu + 2.0 * std::sqrt(pb.nu)) * best;
  }
  return K;
}

double choose_t_bar(const std::vector<double>& K, const std::vector<double>& nu, double eps_d,
                    double kappa) {
  if (K.empty() || K.size() != nu.size() || !(eps_d > 0.0) || !(kappa > 0.0) ||
      !(kappa < 1.0)) {
    throw Error(ErrorKind::kDomain, "choose_t_bar: invalid arguments");
  }
  double t_bar = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  const double kk = std::pow(kappa, 1.0 / kappa);
  for (std::size_t i = 0; i < K.size(); ++i) {
    if (!(K[i] > 0.0) || !(nu[i] > 0.0)) {
      throw Error(ErrorKind::kDomain, "choose_t_bar: K and nu must be positive");
    }
    t_bar = std::min(t_bar, K[i] / nu[i] * kk);
    sum += nu[i] + std::pow(K[i] / nu[i], kappa);
  }
  const double e = 1.0 / (1.0 - kappa);
  return std::min(t_bar, std::pow(eps_d, e) * std::pow(sum, -e));
}

}  // namespace dualpath
