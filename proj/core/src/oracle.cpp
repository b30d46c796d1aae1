#include "dualpath/oracle.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "dualpath/barriers.hpp"

namespace dualpath::oracle {

namespace {

struct Centered {
  Vec x;
  double decrement = 0.0;
  int iters = 0;
};

// Minimizes F(x) - tau c'x subject to C x = e from an interior x0 that need
// not satisfy the equalities. While infeasible, steps backtrack on the norm
// of the KKT residual (grad + C'w, C x - e); once a full step has restored
// the equalities, damped steps (1 + lambda)^{-1} decrease the objective
// monotonically.
Centered center(const Barrier& F, const Vec& c, double tau, const Mat& C, const Vec& e, Vec x,
                double tol, int max_iter = 400) {
  const Index p = C.rows();
  const double e_scale = 1.0 + (p > 0 ? e.cwiseAbs().maxCoeff() : 0.0);
  const double C_scale = p > 0 ? C.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
  Vec w = Vec::Zero(p);
  auto kkt_norm = [&](const Vec& z, const Vec& mult) {
    const Vec rd = F.gradient(z) - tau * c + C.transpose() * mult;
    const Vec rp = C * z - e;
    return std::sqrt(rd.squaredNorm() + rp.squaredNorm());
  };

  Centered out;
  int stalled = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    const Vec g = F.gradient(x) - tau * c;
    const Mat Hm = F.hessian(x);
    Eigen::LLT<Mat> H(Hm);
    if (H.info() != Eigen::Success) {
      throw Error(ErrorKind::kNumerical, "oracle: barrier Hessian not positive definite (tau " +
                                             std::to_string(tau) + ", step " + std::to_string(it) + ")");
    }
    Vec dx;
    Vec w_new = Vec::Zero(p);
    const Vec rp = C * x - e;
    if (p > 0) {
      // Schur complement on the multipliers.
      const Mat HiCt = H.solve(C.transpose());
      Eigen::LDLT<Mat> S(C * HiCt);
      const Vec Hig = H.solve(g);
      w_new = S.solve(rp - C * Hig);
      dx = -Hig - HiCt * w_new;
      for (int pass = 0; pass < 2; ++pass) {
        const Vec dw = S.solve(C * dx + rp);
        w_new += dw;
        dx -= HiCt * dw;
      }
    } else {
      dx = -H.solve(g);
    }
    const double lambda = std::sqrt(std::max(0.0, dx.dot(Hm * dx)));
    const double rp_norm = p > 0 ? rp.cwiseAbs().maxCoeff() : 0.0;
    const bool feasible = rp_norm <= 1e-10 * (e_scale + C_scale * x.cwiseAbs().maxCoeff());
    out.x = x;
    out.decrement = lambda;
    out.iters = it;
    if (feasible && lambda <= tol) return out;
    // Rounding in tau c - C'w limits the attainable decrement at large tau;
    // accept once it stops improving.
    if (feasible && lambda < 1e-3) {
      stalled = lambda < 0.5 * best ? 0 : stalled + 1;
      if (stalled >= 5) return out;
    }
    best = std::min(best, lambda);

    double alpha = 1.0;
    if (feasible) {
      if (lambda >= 0.25) alpha = 1.0 / (1.0 + lambda);
      while (!F.contains(x + alpha * dx)) {
        alpha *= 0.5;
        if (alpha < 1e-14) throw Error(ErrorKind::kNumerical, "oracle: lost interiority");
      }
    } else {
      const Vec dw = w_new - w;
      const double r0 = kkt_norm(x, w);
      for (;;) {
        const Vec trial = x + alpha * dx;
        if (F.contains(trial) && kkt_norm(trial, w + alpha * dw) <= (1.0 - 0.01 * alpha) * r0) break;
        alpha *= 0.5;
        if (alpha < 1e-14) throw Error(ErrorKind::kNumerical, "oracle: infeasible-start line search failed");
      }
      w += alpha * dw;
    }
    x += alpha * dx;
  }
  throw Error(ErrorKind::kIterationCap, "oracle: centering did not converge");
}

// Centers with a zero objective first when that is possible, so that the
// remaining steps start from a feasible point and decrease the objective
// monotonically; the infeasible-start iteration can otherwise wander close
// to the boundary.
Vec feasible_start(const Barrier& F, const Mat& C, const Vec& e, const Vec& x0) {
  try {
    return center(F, Vec::Zero(x0.size()), 0.0, C, e, x0, 1e-9).x;
  } catch (const Error&) {
    return x0;
  }
}

// Follows tau upward by factors of 8 from a feasible point to tau_target.
Centered follow(const Barrier& F, const Vec& c, double tau_target, const Mat& C, const Vec& e,
                const Vec& x0, double tol) {
  Vec x = feasible_start(F, C, e, x0);
  double tau = tau_target;
  while (tau * (1.0 + c.norm() * (1.0 + x.norm())) > 1.0) tau /= 8.0;
  for (;;) {
    Centered c_out = center(F, c, tau, C, e, x, tol);
    if (tau >= tau_target) return c_out;
    x = c_out.x;
    tau = std::min(tau * 8.0, tau_target);
  }
}

struct Stacked {
  std::shared_ptr<ProductBarrier> F;
  Vec c;
  Mat C;
  Vec e;
  Vec x0;
  std::vector<Index> offsets;
};

Stacked stack(const SeparableProblem& problem, bool with_coupling,
              const std::vector<Vec>& start = {}) {
  Stacked s;
  std::vector<BarrierPtr> factors;
  Index n = 0, p = 0;
  for (const auto& blk : problem.blocks) {
    factors.push_back(blk.barrier);
    s.offsets.push_back(n);
    n += blk.dim();
    if (blk.equality) p += blk.equality->E.rows();
  }
  const Index m = with_coupling ? problem.m() : 0;
  s.F = std::make_shared<ProductBarrier>(factors);
  s.c = Vec::Zero(n);
  s.x0 = Vec::Zero(n);
  s.C = Mat::Zero(m + p, n);
  s.e = Vec::Zero(m + p);
  if (with_coupling) s.e.head(m) = problem.b;
  Index row = m;
  for (std::size_t i = 0; i < problem.blocks.size(); ++i) {
    const Block& blk = problem.blocks[i];
    const Index off = s.offsets[i];
    s.c.segment(off, blk.dim()) = blk.c;
    s.x0.segment(off, blk.dim()) = start.empty() ? blk.x_start : start[i];
    if (with_coupling) s.C.block(0, off, m, blk.dim()) = blk.A;
    if (blk.equality) {
      const Index q = blk.equality->E.rows();
      s.C.block(row, off, q, blk.dim()) = blk.equality->E;
      s.e.segment(row, q) = blk.equality->f;
      row += q;
    }
  }
  return s;
}

std::vector<Vec> split(const SeparableProblem& problem, const Vec& x) {
  std::vector<Vec> out;
  Index off = 0;
  for (const auto& blk : problem.blocks) {
    out.push_back(x.segment(off, blk.dim()));
    off += blk.dim();
  }
  return out;
}

Mat equality_matrix(const Block& blk) {
  return blk.equality ? blk.equality->E : Mat(0, blk.dim());
}

Vec equality_rhs(const Block& blk) { return blk.equality ? blk.equality->f : Vec(0); }

double block_max_vertex(const Block& blk, const Vec& g) {
  auto poly = blk.barrier->polytope();
  if (!poly) {
    throw Error(ErrorKind::kInvalidInstance, "oracle: block domain is not polyhedral");
  }
  const Mat E = equality_matrix(blk);
  const Vec f = equality_rhs(blk);
  const Index n = blk.dim();
  const Index k = n - E.rows();
  const Index rows = poly->G.rows();
  if (k < 0 || k > rows) {
    throw Error(ErrorKind::kInvalidInstance, "oracle: polytope has no vertices");
  }
  // Enumerate k-subsets of the inequality rows.
  std::vector<Index> pick(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) pick[static_cast<std::size_t>(i)] = i;
  double best = -std::numeric_limits<double>::infinity();
  long count = 0;
  const double scale = 1.0 + poly->h.cwiseAbs().maxCoeff();
  for (;;) {
    if (++count > 2000000) {
      throw Error(ErrorKind::kInvalidInstance, "oracle: too many vertex candidates");
    }
    Mat M(n, n);
    Vec r(n);
    M.topRows(E.rows()) = E;
    r.head(E.rows()) = f;
    for (Index i = 0; i < k; ++i) {
      M.row(E.rows() + i) = poly->G.row(pick[static_cast<std::size_t>(i)]);
      r(E.rows() + i) = poly->h(pick[static_cast<std::size_t>(i)]);
    }
    Eigen::FullPivLU<Mat> lu(M);
    if (lu.isInvertible()) {
      const Vec x = lu.solve(r);
      if ((poly->G * x - poly->h).maxCoeff() <= 1e-9 * scale) best = std::max(best, g.dot(x));
    }
    // Next combination in lexicographic order.
    Index i = k - 1;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == rows - k + i) --i;
    if (i < 0) break;
    ++pick[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j) {
      pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  if (!std::isfinite(best)) {
    throw Error(ErrorKind::kInvalidInstance, "oracle: no feasible vertex found");
  }
  return best;
}

}  // namespace

CoupledResult solve_coupled(const SeparableProblem& problem, double tol,
                            const std::vector<Vec>& start) {
  require_valid(problem);
  if (problem.n() > 200) {
    throw Error(ErrorKind::kInvalidInstance, "oracle: problem too large for the dense oracle");
  }
  const Stacked s = stack(problem, true, start);
  const double nu = s.F->nu();
  CoupledResult out;
  Vec x = feasible_start(*s.F, s.C, s.e, s.x0);
  double tau = 1.0;
  for (;;) {
    Centered c = center(*s.F, s.c, tau, s.C, s.e, x, 1e-10);
    out.newton_iters += c.iters;
    x = c.x;
    const double lam = std::min(c.decrement, 0.5);
    const double gap = (nu + std::sqrt(nu) * lam / (1.0 - lam)) / tau;
    if (gap <= tol) {
      out.phi_star = s.c.dot(x);
      out.gap_bound = gap;
      out.x = split(problem, x);
      return out;
    }
    tau *= 8.0;
  }
}

std::vector<Vec> block_centers(const SeparableProblem& problem) {
  std::vector<Vec> out;
  for (const auto& blk : problem.blocks) {
    Centered c = center(*blk.barrier, Vec::Zero(blk.dim()), 0.0, equality_matrix(blk),
                        equality_rhs(blk), blk.x_start, 1e-13);
    out.push_back(c.x);
  }
  return out;
}

SmoothedResult smoothed_optimum(const SeparableProblem& problem, double t,
                                const std::vector<Vec>& start) {
  require_valid(problem);
  const Stacked s = stack(problem, true, start);
  const auto centers = block_centers(problem);
  double F_c = 0.0;
  for (std::size_t i = 0; i < centers.size(); ++i) F_c += problem.blocks[i].barrier->value(centers[i]);
  Centered c = follow(*s.F, s.c, 1.0 / t, s.C, s.e, s.x0, 1e-13);
  SmoothedResult out;
  out.value = s.c.dot(c.x) - t * (s.F->value(c.x) - F_c);
  out.x = split(problem, c.x);
  out.decrement = c.decrement;
  return out;
}

SmoothedResult smoothed_dual(const SeparableProblem& problem, const Vec& y, double t) {
  const auto centers = block_centers(problem);
  SmoothedResult out;
  out.value = -problem.b.dot(y);
  for (std::size_t i = 0; i < problem.blocks.size(); ++i) {
    const Block& blk = problem.blocks[i];
    const Vec g = blk.c + blk.A.transpose() * y;
    Centered c = follow(*blk.barrier, g, 1.0 / t, equality_matrix(blk), equality_rhs(blk),
                        centers[i], 1e-13);
    out.value += g.dot(c.x) - t * (blk.barrier->value(c.x) - blk.barrier->value(centers[i]));
    out.x.push_back(c.x);
    out.decrement = std::max(out.decrement, c.decrement);
  }
  return out;
}

namespace {

// Fewest-hop directed path from a to b as a list of link indices.
std::optional<std::vector<std::size_t>> hop_path(const rpc::Instance& inst, int a, int b) {
  const std::size_t N = inst.nodes.size();
  std::vector<long> via(N, -1);
  std::vector<bool> seen(N, false);
  std::vector<int> queue{a};
  seen[static_cast<std::size_t>(a)] = true;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int i = queue[head];
    for (std::size_t l = 0; l < inst.links.size(); ++l) {
      const int j = inst.links[l].to;
      if (inst.links[l].from != i || seen[static_cast<std::size_t>(j)]) continue;
      seen[static_cast<std::size_t>(j)] = true;
      via[static_cast<std::size_t>(j)] = static_cast<long>(l);
      queue.push_back(j);
    }
  }
  if (!seen[static_cast<std::size_t>(b)]) return std::nullopt;
  std::vector<std::size_t> path;
  for (int i = b; i != a;) {
    const auto l = static_cast<std::size_t>(via[static_cast<std::size_t>(i)]);
    path.push_back(l);
    i = inst.links[l].from;
  }
  return path;
}

// Flows u[link][commodity] of rpc_feasible_point.
std::vector<std::vector<double>> feasible_flows(const rpc::Instance& inst) {
  const std::size_t L = inst.links.size();
  const std::size_t K = inst.commodities.size();
  std::vector<std::vector<double>> u(L, std::vector<double>(K, 0.0));
  for (std::size_t k = 0; k < K; ++k) {
    const auto& c = inst.commodities[k];
    const auto route = hop_path(inst, c.source, c.dest);
    if (!route) throw Error(ErrorKind::kInvalidInstance, "oracle: destination unreachable");
    for (std::size_t l : *route) u[l][k] += c.demand;
  }
  // Links on no directed cycle keep only their demand flow.
  for (std::size_t l = 0; l < L; ++l) {
    const auto back = hop_path(inst, inst.links[l].to, inst.links[l].from);
    if (!back) continue;
    for (std::size_t k = 0; k < K; ++k) {
      const double amount = 1.0 + (k == 0 ? inst.links[l].capacity : 0.0);
      u[l][k] += amount;
      for (std::size_t r : *back) u[r][k] += amount;
    }
  }
  return u;
}

}  // namespace

std::vector<Vec> rpc_feasible_point(const rpc::Instance& inst) {
  rpc::check(inst);
  const auto u = feasible_flows(inst);
  const Index K = static_cast<Index>(inst.commodities.size());
  std::vector<Vec> out;
  for (std::size_t l = 0; l < inst.links.size(); ++l) {
    Vec x(K + 2);
    for (Index k = 0; k < K; ++k) x(k) = u[l][static_cast<std::size_t>(k)];
    const double v = x.head(K).sum() - inst.links[l].capacity;
    x(K) = v;
    x(K + 1) = (inst.links[l].kind == rpc::Congestion::kLog ? -std::log(v) : v * std::log(v)) + 1.0;
    out.push_back(std::move(x));
  }
  return out;
}

CoupledResult rpc_optimum(const rpc::Instance& inst, double tol) {
  rpc::check(inst);
  const Index L = static_cast<Index>(inst.links.size());
  const Index K = static_cast<Index>(inst.commodities.size());
  const Index N = static_cast<Index>(inst.nodes.size());
  // Variables: flows u (link-major, L K entries) followed by the excesses v.
  const Index nu_cnt = L * K;
  const Index n = nu_cnt + L;

  // Conservation rows for every node except each commodity's destination,
  // then one row sum_k u_k - v = b per link.
  std::vector<Index> row_of(static_cast<std::size_t>(N * K), -1);
  Index m = 0;
  for (Index k = 0; k < K; ++k) {
    for (Index i = 0; i < N; ++i) {
      if (i != inst.commodities[static_cast<std::size_t>(k)].dest) row_of[static_cast<std::size_t>(k * N + i)] = m++;
    }
  }
  const Index m_flow = m;
  m += L;
  Mat C = Mat::Zero(m, n);
  Vec e = Vec::Zero(m);
  for (Index a = 0; a < L; ++a) {
    const auto& l = inst.links[static_cast<std::size_t>(a)];
    for (Index k = 0; k < K; ++k) {
      const Index r_out = row_of[static_cast<std::size_t>(k * N + l.from)];
      const Index r_in = row_of[static_cast<std::size_t>(k * N + l.to)];
      if (r_out >= 0) C(r_out, a * K + k) += 1.0;
      if (r_in >= 0) C(r_in, a * K + k) -= 1.0;
      C(m_flow + a, a * K + k) = 1.0;
    }
    C(m_flow + a, nu_cnt + a) = -1.0;
    e(m_flow + a) = l.capacity;
  }
  for (Index k = 0; k < K; ++k) {
    const auto& c = inst.commodities[static_cast<std::size_t>(k)];
    e(row_of[static_cast<std::size_t>(k * N + c.source)]) = c.demand;
  }

  auto is_log = [&](Index a) { return inst.links[static_cast<std::size_t>(a)].kind == rpc::Congestion::kLog; };
  auto g = [&](Index a, double v) { return is_log(a) ? -std::log(v) : v * std::log(v); };
  auto g1 = [&](Index a, double v) { return is_log(a) ? -1.0 / v : std::log(v) + 1.0; };
  auto g2 = [&](Index a, double v) { return is_log(a) ? 1.0 / (v * v) : 1.0 / v; };
  auto cost = [&](const Vec& x) {
    double total = 0.0;
    for (Index a = 0; a < L; ++a) {
      const auto& l = inst.links[static_cast<std::size_t>(a)];
      total += l.cost * x.segment(a * K, K).sum() + l.weight * g(a, x(nu_cnt + a));
    }
    return total;
  };

  Vec x(n);
  const auto flows = feasible_flows(inst);
  for (Index a = 0; a < L; ++a) {
    for (Index k = 0; k < K; ++k) x(a * K + k) = flows[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)];
    x(nu_cnt + a) = x.segment(a * K, K).sum() - inst.links[static_cast<std::size_t>(a)].capacity;
  }
  const double nu = static_cast<double>(n);
  const double e_scale = 1.0 + e.cwiseAbs().maxCoeff();

  CoupledResult out;
  double tau = 1e-3;
  for (;;) {
    double lambda = 0.0;
    int stalled = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int it = 0;; ++it) {
      if (it > 500) {
        throw Error(ErrorKind::kIterationCap, "rpc_optimum: centering did not converge (tau " +
                                                  std::to_string(tau) + ")");
      }
      // The Hessian is diagonal: 1/u^2 for flows, tau w g'' + 1/v^2 for excesses.
      Vec grad(n);
      Vec hdiag(n);
      for (Index a = 0; a < L; ++a) {
        const auto& l = inst.links[static_cast<std::size_t>(a)];
        for (Index k = 0; k < K; ++k) {
          const Index p = a * K + k;
          grad(p) = tau * l.cost - 1.0 / x(p);
          hdiag(p) = 1.0 / (x(p) * x(p));
        }
        const double v = x(nu_cnt + a);
        grad(nu_cnt + a) = tau * l.weight * g1(a, v) - 1.0 / v;
        hdiag(nu_cnt + a) = tau * l.weight * g2(a, v) + 1.0 / (v * v);
      }
      const Vec hinv = hdiag.cwiseInverse();
      const Vec rp = C * x - e;
      const Mat HiCt = hinv.asDiagonal() * C.transpose();
      Eigen::LDLT<Mat> S(C * HiCt);
      Vec w = S.solve(rp - C * hinv.cwiseProduct(grad));
      Vec dx = -hinv.cwiseProduct(grad + C.transpose() * w);
      // S is badly scaled at large tau; refinement keeps C dx = -rp.
      for (int pass = 0; pass < 2; ++pass) {
        const Vec dw = S.solve(C * dx + rp);
        w += dw;
        dx -= HiCt * dw;
      }
      lambda = std::sqrt(dx.cwiseAbs2().dot(hdiag));
      const bool feasible = rp.cwiseAbs().maxCoeff() <= 1e-10 * (e_scale + x.cwiseAbs().maxCoeff());
      if (feasible && lambda <= 1e-10) break;
      if (feasible && lambda < 1e-3) {
        stalled = lambda < 0.5 * best ? 0 : stalled + 1;
        if (stalled >= 5) break;
      }
      best = std::min(best, lambda);
      double alpha = lambda < 0.25 ? 1.0 : 1.0 / (1.0 + lambda);
      while ((x + alpha * dx).minCoeff() <= 0.0) {
        alpha *= 0.5;
        if (alpha < 1e-14) {
          throw Error(ErrorKind::kNumerical, "rpc_optimum: lost interiority (tau " + std::to_string(tau) + ")");
        }
      }
      x += alpha * dx;
      ++out.newton_iters;
    }
    const double lam = std::min(lambda, 0.5);
    const double gap = (nu + std::sqrt(nu) * lam / (1.0 - lam)) / tau;
    if (gap <= tol) {
      out.phi_star = -cost(x);
      out.gap_bound = gap;
      for (Index a = 0; a < L; ++a) {
        Vec xa(K + 2);
        xa.head(K) = x.segment(a * K, K);
        xa(K) = x(nu_cnt + a);
        xa(K + 1) = g(a, xa(K));
        out.x.push_back(std::move(xa));
      }
      return out;
    }
    tau *= 8.0;
  }
}

double dual_d0(const SeparableProblem& problem, const Vec& y) {
  double d = -problem.b.dot(y);
  for (const auto& blk : problem.blocks) {
    d += block_max_vertex(blk, blk.c + blk.A.transpose() * y);
  }
  return d;
}

}  // namespace dualpath::oracle
