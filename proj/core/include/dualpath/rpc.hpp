#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dualpath/problem.hpp"

namespace dualpath::rpc {

enum class Congestion { kLog, kEntropy };

struct Node {
  double x = 0.0;
  double y = 0.0;
};

struct Link {
  int from = 0;
  int to = 0;
  /// Capacity b_ij; flow above it is penalized.
  double capacity = 0.0;
  /// Linear cost c_ij per unit of flow.
  double cost = 0.0;
  /// Congestion weight w_ij.
  double weight = 10.0;
  Congestion kind = Congestion::kLog;
};

struct Commodity {
  int source = 0;
  int dest = 0;
  double demand = 0.0;
};

/// Routing problem with congestion:
///   minimize sum_ij [c_ij sum_k u_ijk + w_ij g_ij(v_ij)]
///   s.t. flow conservation per (node, commodity),
///        sum_k u_ijk - v_ij = b_ij, u >= 0, v > 0,
/// with g = -ln v (log kind) or g = v ln v (entropy kind).
struct Instance {
  std::uint64_t seed = 0;
  std::vector<Node> nodes;
  std::vector<Link> links;
  std::vector<Commodity> commodities;
};

/// Random instance with coordinates in [0,100]x[0,300], demands in
/// [50,500], capacities in [10,100], weight 10, Euclidean link costs and a
/// random congestion kind per link. The link set always contains a
/// directed Hamiltonian cycle, so the network is strongly connected.
///
/// Throws Error(kInvalidInstance) when n_links < n_nodes or the sizes are
/// otherwise infeasible.
Instance generate(std::uint64_t seed, int n_nodes, int n_links, int n_commodities);

/// Structural checks: index ranges, positive demands, distinct endpoints,
/// every intermediate node with an in-link and an out-link, a path for
/// each commodity.
void check(const Instance& inst);

/// Upper bound on v_ij imposed so each block's feasible set is bounded.
double flow_excess_bound(const Instance& inst, std::size_t link);

/// Upper bound on s_ij imposed so each block's feasible set is bounded.
double slack_bound(const Instance& inst, std::size_t link);

/// One block per link over (u_1..u_nC, v, s), maximizing
/// -(c sum_k u_k + w s). Conservation rows for each commodity's destination
/// node are dropped because they are implied by the others.
SeparableProblem to_problem(const Instance& inst);

/// Number of coupling rows kept by to_problem: n_C (n_N - 1).
Index coupling_rows(const Instance& inst);

/// Row of (node, commodity) in the coupling matrix, or -1 when dropped.
Index coupling_row(const Instance& inst, int node, int commodity);

/// Minimization objective of the original model at a full solution
/// x = (x_link)_links with x_link = (u, v, s).
double routing_cost(const Instance& inst, const std::vector<Vec>& x);

nlohmann::json to_json(const Instance& inst);
Instance from_json(const nlohmann::json& j);

}  // namespace dualpath::rpc
