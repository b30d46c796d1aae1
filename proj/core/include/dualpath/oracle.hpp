#pragma once

#include <vector>

#include "dualpath/problem.hpp"
#include "dualpath/rpc.hpp"

namespace dualpath::oracle {

/// Reference answers computed in the full x space without the
/// decomposition machinery. Intended for desk-scale problems (n <= 200).

struct CoupledResult {
  /// Objective value c'x of the final barrier iterate; phi* lies in
  /// [phi_star, phi_star + gap_bound].
  double phi_star = 0.0;
  double gap_bound = 0.0;
  std::vector<Vec> x;
  int newton_iters = 0;
};

/// Barrier method on the coupled problem: minimize F(x) - tau c'x subject
/// to A x = b and every E_i x_i = f_i, with tau increased until the
/// certified gap is below tol.
///
/// @param start Optional interior point per block; x_start is used when
/// empty. A start that satisfies the equalities avoids the infeasible-start
/// iteration, which can stall near the boundary.
CoupledResult solve_coupled(const SeparableProblem& problem, double tol = 1e-8,
                            const std::vector<Vec>& start = {});

/// phi* of a routing instance from a barrier method over the flows alone:
/// v = sum_k u_k - b is eliminated and the congestion term stays in the
/// objective, so no epigraph variables appear. x holds (u, v, g(v)) per link
/// in the layout of rpc::to_problem.
CoupledResult rpc_optimum(const rpc::Instance& inst, double tol = 1e-6);

/// A point of the rpc::to_problem formulation that satisfies every
/// equality strictly inside the barrier domains: each demand is routed on a
/// fewest-hop path, and every link then receives, for each commodity, a
/// circulation through it so that all flows are positive and each link
/// carries more than its capacity.
std::vector<Vec> rpc_feasible_point(const rpc::Instance& inst);

struct SmoothedResult {
  double value = 0.0;
  std::vector<Vec> x;
  /// Newton decrement of the final centering step.
  double decrement = 0.0;
};

/// Analytic center of each block over {E_i x = f_i}.
std::vector<Vec> block_centers(const SeparableProblem& problem);

/// d*(t) = max { c'x - t [F(x) - F(x^c)] : A x = b, E x = f }.
SmoothedResult smoothed_optimum(const SeparableProblem& problem, double t,
                                const std::vector<Vec>& start = {});

/// Near-exact d(y, t), maximized block by block in full coordinates.
SmoothedResult smoothed_dual(const SeparableProblem& problem, const Vec& y, double t);

/// d0(y) = sum_i max { (c_i + A_i'y)'x : x in cl X_i } - b'y by vertex
/// enumeration. Throws Error(kInvalidInstance) for non-polyhedral blocks.
double dual_d0(const SeparableProblem& problem, const Vec& y);

}  // namespace dualpath::oracle
