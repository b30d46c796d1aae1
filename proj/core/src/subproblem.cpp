#include "dualpath/subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dualpath {

namespace {

double nu_factor(double nu) { return nu + 2.0 * std::sqrt(nu); }

void check_accuracy_args(double delta, double t) {
  if (!(t > 0.0) || !(delta >= 0.0) || !(delta < 1.0)) {
    throw Error(ErrorKind::kDomain, "accuracy: need t > 0 and 0 <= delta < 1");
  }
}

}  // namespace

double primal_accuracy(double delta_bar, double t, double nu) {
  check_accuracy_args(delta_bar, t);
  return delta_bar * t / (nu_factor(nu) * (1.0 + delta_bar));
}

double primal_accuracy_phase1(double delta_hat, double t0, double nu) {
  check_accuracy_args(delta_hat, t0);
  return t0 * delta_hat / (2.0 * nu_factor(nu) * (1.0 + delta_hat));
}

double local_accuracy(double delta_bar, double t) {
  check_accuracy_args(delta_bar, t);
  return delta_bar * (1.0 - delta_bar) * t / (1.0 + delta_bar);
}

double certificate(double residual_c, double t, double nu) {
  const double k = nu_factor(nu) * residual_c;
  if (!(t - k > 0.0)) return std::numeric_limits<double>::infinity();
  return k / (t - k);
}

double certificate_local(double lambda) {
  if (!(lambda >= 0.0) || !(lambda < 0.5)) return std::numeric_limits<double>::infinity();
  return lambda / (1.0 - 2.0 * lambda);
}

std::vector<double> split_tolerance(double eps, std::size_t M,
                                    std::span<const double> weights) {
  if (!(eps >= 0.0)) {
    throw Error(ErrorKind::kDomain, "split_tolerance: eps must be nonnegative");
  }
  if (M == 0) {
    throw Error(ErrorKind::kDomain, "split_tolerance: no blocks");
  }
  if (weights.empty()) {
    return std::vector<double>(M, eps / static_cast<double>(M));
  }
  if (weights.size() != M) {
    throw Error(ErrorKind::kDomain, "split_tolerance: one weight per block required");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) {
      throw Error(ErrorKind::kDomain, "split_tolerance: negative weight");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw Error(ErrorKind::kDomain, "split_tolerance: weights must sum to one");
  }
  std::vector<double> out(M);
  for (std::size_t i = 0; i < M; ++i) out[i] = eps * weights[i];
  return out;
}

PreparedBlock prepare_block(const Block& block, double center_tol) {
  PreparedBlock pb;
  pb.original = block;
  auto [red, rblk] = reduce_block(block);
  pb.reduction = std::move(red);
  pb.reduced = std::move(rblk);
  pb.c_offset = block.c.dot(pb.reduction.x_part);
  pb.A_offset = block.A * pb.reduction.x_part;
  pb.nu = block.barrier->nu();

  const AnalyticCenter ac =
      analytic_center(*pb.reduced.barrier, pb.reduced.x_start, center_tol);
  pb.z_center = ac.x;
  pb.F_center = ac.value;
  pb.center_llt.compute(pb.reduced.barrier->hessian(ac.x));
  if (pb.center_llt.info() != Eigen::Success) {
    throw Error(ErrorKind::kNumerical, "prepare_block: center Hessian not positive definite");
  }
  return pb;
}

SubproblemResult solve_block(const PreparedBlock& block, const Vec& y, double t,
                             const BlockTarget& target, const Vec& warm_z,
                             const SubproblemOptions& options) {
  if (!(t > 0.0)) {
    throw Error(ErrorKind::kDomain, "solve_block: t must be positive");
  }
  const Barrier& F = *block.reduced.barrier;
  const Vec g = block.reduced.c + block.reduced.A.transpose() * y;
  const Vec g_over_t = g / t;

  Vec z = (warm_z.size() == F.dim() && F.contains(warm_z)) ? warm_z : block.reduced.x_start;
  auto psi = [&](const Vec& p) { return F.value(p) - g_over_t.dot(p); };

  const double eps_machine = std::numeric_limits<double>::epsilon();
  double psi_z = psi(z);
  double best_lambda = std::numeric_limits<double>::infinity();
  int stalled = 0;

  for (int it = 0;; ++it) {
    const Vec Fg = F.gradient(z);
    Eigen::LLT<Mat> llt(F.hessian(z));
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorKind::kNumerical, "solve_block: barrier Hessian not positive definite");
    }
    const Vec grad = Fg - g_over_t;
    const Vec dz = -llt.solve(grad);
    const double lambda = std::sqrt(std::max(0.0, -grad.dot(dz)));

    const double res_local = t * lambda;
    const double res_c = t * dual_local_norm(block.center_llt, grad);
    // Rounding in g - t grad F is about eps (|g| + t |grad F|) per entry.
    const Vec magnitude = g.cwiseAbs() + t * Fg.cwiseAbs();
    const double floor =
        std::max(1e-12, 64.0 * eps_machine * dual_local_norm(llt, magnitude));
    const double residual = options.rule == StopRule::kLocal ? res_local : res_c;
    const double threshold = target.exact ? floor : std::max(target.eps, floor);
    // The center-norm bound magnifies rounding in directions where the
    // Hessian at z is much stiffer than at the center; the decrement bound
    // does not, so the smaller of the two is reported.
    const double cert = std::min(certificate(res_c, t, block.nu), certificate_local(lambda));

    // At the numerical floor the decrement stops contracting; exact targets
    // accept that point instead of spinning to the iteration cap.
    if (lambda < 1e-8 && !(lambda < 0.5 * best_lambda)) ++stalled;
    best_lambda = std::min(best_lambda, lambda);
    const bool at_floor = target.exact && stalled >= 3;

    if ((residual <= threshold || at_floor) && cert <= target.delta) {
      SubproblemResult out;
      out.z_bar = z;
      out.x_bar = block.reduction.lift(z);
      out.residual_c = res_c;
      out.residual_local = res_local;
      out.newton_iters = it;
      out.delta_cert = cert;
      out.floor = floor;
      out.F_value = F.value(z);
      out.F_gradient = Fg;
      out.hessian_llt = std::move(llt);
      return out;
    }
    if (it >= options.max_iter) {
      std::ostringstream msg;
      msg << "solve_block: iteration cap " << options.max_iter << " reached (residual "
          << residual << ", threshold " << threshold << ", certificate " << cert << ")";
      throw Error(ErrorKind::kIterationCap, msg.str());
    }

    Vec trial;
    double psi_trial = 0.0;
    bool accepted = false;
    if (lambda < options.beta_full) {
      double alpha = 1.0;
      trial = z + dz;
      while (!F.contains(trial)) {
        alpha *= 0.5;
        if (alpha < 1e-12) {
          throw Error(ErrorKind::kNumerical, "solve_block: lost interiority on a full step");
        }
        trial = z + alpha * dz;
      }
      psi_trial = psi(trial);
      accepted = true;
    } else {
      const double damped = 1.0 / (1.0 + lambda);
      if (options.line_search) {
        const double want = omega(lambda);
        for (double alpha = 1.0; alpha > damped; alpha *= 0.5) {
          Vec cand = z + alpha * dz;
          if (!F.contains(cand)) continue;
          const double pc = psi(cand);
          if (pc <= psi_z - want) {
            trial = std::move(cand);
            psi_trial = pc;
            accepted = true;
            break;
          }
        }
      }
      if (!accepted) {
        double alpha = damped;
        trial = z + alpha * dz;
        while (!F.contains(trial)) {
          alpha *= 0.5;
          if (alpha < 1e-12) {
            throw Error(ErrorKind::kNumerical, "solve_block: lost interiority on a damped step");
          }
          trial = z + alpha * dz;
        }
        psi_trial = psi(trial);
      }
    }
    z = std::move(trial);
    psi_z = psi_trial;
  }
}

}  // namespace dualpath
