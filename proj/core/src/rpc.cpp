#include "dualpath/rpc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>
#include <set>

#include "dualpath/barriers.hpp"

namespace dualpath::rpc {

namespace {

// Uniform draws built directly from the engine's bits so instances are
// identical across standard library implementations.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) {
    const double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  int index(int n) { return static_cast<int>(eng_() % static_cast<std::uint64_t>(n)); }

 private:
  std::mt19937_64 eng_;
};

bool reachable(const Instance& inst, int from, int to) {
  std::vector<char> seen(inst.nodes.size(), 0);
  std::queue<int> q;
  q.push(from);
  seen[static_cast<std::size_t>(from)] = 1;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    if (u == to) return true;
    for (const auto& l : inst.links) {
      if (l.from == u && !seen[static_cast<std::size_t>(l.to)]) {
        seen[static_cast<std::size_t>(l.to)] = 1;
        q.push(l.to);
      }
    }
  }
  return false;
}

double total_demand(const Instance& inst) {
  double d = 0.0;
  for (const auto& c : inst.commodities) d += c.demand;
  return d;
}

}  // namespace

Instance generate(std::uint64_t seed, int n_nodes, int n_links, int n_commodities) {
  if (n_nodes < 2 || n_commodities < 1 || n_links < n_nodes ||
      n_links > n_nodes * (n_nodes - 1)) {
    throw Error(ErrorKind::kInvalidInstance,
                "rpc::generate: need 2 <= nodes <= links <= nodes (nodes - 1) and commodities >= 1");
  }
  Sampler rng(seed);
  Instance inst;
  inst.seed = seed;
  for (int i = 0; i < n_nodes; ++i) {
    Node nd;
    nd.x = rng.uniform(0.0, 100.0);
    nd.y = rng.uniform(0.0, 300.0);
    inst.nodes.push_back(nd);
  }

  // Random Hamiltonian cycle, then extra distinct arcs.
  std::vector<int> perm(static_cast<std::size_t>(n_nodes));
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n_nodes - 1; i > 0; --i) std::swap(perm[static_cast<std::size_t>(i)],
                                                  perm[static_cast<std::size_t>(rng.index(i + 1))]);
  std::set<std::pair<int, int>> arcs;
  std::vector<std::pair<int, int>> order;
  for (int i = 0; i < n_nodes; ++i) {
    const std::pair<int, int> a{perm[static_cast<std::size_t>(i)],
                                perm[static_cast<std::size_t>((i + 1) % n_nodes)]};
    arcs.insert(a);
    order.push_back(a);
  }
  int guard = 0;
  while (static_cast<int>(order.size()) < n_links) {
    if (++guard > 100000) {
      throw Error(ErrorKind::kInvalidInstance, "rpc::generate: could not place extra links");
    }
    const int a = rng.index(n_nodes);
    const int b = rng.index(n_nodes);
    if (a == b || arcs.count({a, b})) continue;
    arcs.insert({a, b});
    order.push_back({a, b});
  }

  for (const auto& [a, b] : order) {
    Link l;
    l.from = a;
    l.to = b;
    const auto& p = inst.nodes[static_cast<std::size_t>(a)];
    const auto& q = inst.nodes[static_cast<std::size_t>(b)];
    l.cost = std::hypot(p.x - q.x, p.y - q.y);
    l.capacity = rng.uniform(10.0, 100.0);
    l.weight = 10.0;
    l.kind = rng.uniform(0.0, 1.0) < 0.5 ? Congestion::kLog : Congestion::kEntropy;
    inst.links.push_back(l);
  }

  for (int k = 0; k < n_commodities; ++k) {
    Commodity c;
    for (int tries = 0;; ++tries) {
      if (tries > 1000) {
        throw Error(ErrorKind::kInvalidInstance, "rpc::generate: no routable commodity found");
      }
      c.source = rng.index(n_nodes);
      c.dest = rng.index(n_nodes);
      if (c.source != c.dest && reachable(inst, c.source, c.dest)) break;
    }
    c.demand = rng.uniform(50.0, 500.0);
    inst.commodities.push_back(c);
  }
  check(inst);
  return inst;
}

void check(const Instance& inst) {
  const int n = static_cast<int>(inst.nodes.size());
  if (n < 2 || inst.links.empty() || inst.commodities.empty()) {
    throw Error(ErrorKind::kInvalidInstance, "rpc: instance needs nodes, links and commodities");
  }
  std::vector<int> in(static_cast<std::size_t>(n), 0), out(static_cast<std::size_t>(n), 0);
  for (const auto& l : inst.links) {
    if (l.from < 0 || l.from >= n || l.to < 0 || l.to >= n || l.from == l.to) {
      throw Error(ErrorKind::kInvalidInstance, "rpc: link endpoints out of range");
    }
    if (!(l.capacity >= 0.0) || !(l.cost >= 0.0) || !(l.weight > 0.0)) {
      throw Error(ErrorKind::kInvalidInstance, "rpc: link data out of range");
    }
    ++out[static_cast<std::size_t>(l.from)];
    ++in[static_cast<std::size_t>(l.to)];
  }
  std::vector<char> terminal(static_cast<std::size_t>(n), 0);
  for (const auto& c : inst.commodities) {
    if (c.source >= 0 && c.source < n) terminal[static_cast<std::size_t>(c.source)] = 1;
    if (c.dest >= 0 && c.dest < n) terminal[static_cast<std::size_t>(c.dest)] = 1;
  }
  // Sources and destinations are covered by the route check below.
  for (int i = 0; i < n; ++i) {
    if (terminal[static_cast<std::size_t>(i)]) continue;
    if (in[static_cast<std::size_t>(i)] == 0 || out[static_cast<std::size_t>(i)] == 0) {
      throw Error(ErrorKind::kInvalidInstance,
                  "rpc: node " + std::to_string(i) + " lacks an in-link or an out-link");
    }
  }
  for (const auto& c : inst.commodities) {
    if (c.source < 0 || c.source >= n || c.dest < 0 || c.dest >= n || c.source == c.dest ||
        !(c.demand >= 0.0)) {
      throw Error(ErrorKind::kInvalidInstance, "rpc: commodity data out of range");
    }
    if (!reachable(inst, c.source, c.dest)) {
      throw Error(ErrorKind::kInvalidInstance, "rpc: commodity has no route");
    }
  }
}

double flow_excess_bound(const Instance& inst, std::size_t /*link*/) {
  // Twice the flow obtained by routing every demand and pushing each link
  // past its capacity once; optimal excesses sit far below it, so the cap
  // only serves to make the block domain bounded.
  double cap = 0.0;
  for (const auto& l : inst.links) cap += l.capacity;
  return 2.0 * (total_demand(inst) + cap);
}

double slack_bound(const Instance& inst, std::size_t link) {
  const Link& l = inst.links[link];
  if (l.kind == Congestion::kLog) return 50.0;
  const double V = flow_excess_bound(inst, link);
  return V * std::log(V) + 50.0;
}

Index coupling_rows(const Instance& inst) {
  return static_cast<Index>(inst.commodities.size()) *
         (static_cast<Index>(inst.nodes.size()) - 1);
}

Index coupling_row(const Instance& inst, int node, int commodity) {
  const int dest = inst.commodities[static_cast<std::size_t>(commodity)].dest;
  if (node == dest) return -1;
  const Index per = static_cast<Index>(inst.nodes.size()) - 1;
  return commodity * per + (node < dest ? node : node - 1);
}

SeparableProblem to_problem(const Instance& inst) {
  check(inst);
  const int nC = static_cast<int>(inst.commodities.size());
  const Index m = coupling_rows(inst);
  const Index nb = nC + 2;

  SeparableProblem prob;
  prob.b = Vec::Zero(m);
  for (int k = 0; k < nC; ++k) {
    const auto& c = inst.commodities[static_cast<std::size_t>(k)];
    prob.b(coupling_row(inst, c.source, k)) = c.demand;
  }

  std::vector<Index> u_idx(static_cast<std::size_t>(nC));
  std::iota(u_idx.begin(), u_idx.end(), Index{0});
  const Index iv = nC;
  const Index is = nC + 1;

  for (std::size_t a = 0; a < inst.links.size(); ++a) {
    const Link& l = inst.links[a];
    Block blk;
    blk.c = Vec::Zero(nb);
    blk.c.head(nC).setConstant(-l.cost);
    blk.c(is) = -l.weight;

    blk.A = Mat::Zero(m, nb);
    for (int k = 0; k < nC; ++k) {
      const Index r_out = coupling_row(inst, l.from, k);
      const Index r_in = coupling_row(inst, l.to, k);
      if (r_out >= 0) blk.A(r_out, k) = 1.0;
      if (r_in >= 0) blk.A(r_in, k) = -1.0;
    }

    const double V = flow_excess_bound(inst, a);
    const double S = slack_bound(inst, a);
    BarrierPtr epi;
    if (l.kind == Congestion::kLog) {
      epi = std::make_shared<LogEpigraphBarrier>();
    } else {
      epi = std::make_shared<EntropyEpigraphBarrier>();
    }
    Vec e1 = Vec::Ones(1);
    std::vector<SumBarrier::Term> terms;
    terms.push_back({std::make_shared<OrthantBarrier>(nC), u_idx});
    terms.push_back({epi, {iv, is}});
    terms.push_back({std::make_shared<HalfspaceBarrier>(e1, V), {iv}});
    terms.push_back({std::make_shared<HalfspaceBarrier>(e1, S), {is}});
    blk.barrier = std::make_shared<SumBarrier>(nb, std::move(terms));

    LocalEquality eq{Mat::Zero(1, nb), Vec::Constant(1, l.capacity)};
    eq.E.leftCols(nC).setOnes();
    eq.E(0, iv) = -1.0;
    blk.equality = std::move(eq);

    // Start with one unit of excess split evenly, and the epigraph slack at 1.
    const double v0 = 1.0;
    blk.x_start = Vec::Zero(nb);
    blk.x_start.head(nC).setConstant((l.capacity + v0) / nC);
    blk.x_start(iv) = v0;
    blk.x_start(is) = (l.kind == Congestion::kLog ? -std::log(v0) : v0 * std::log(v0)) + 1.0;
    prob.blocks.push_back(std::move(blk));
  }
  return prob;
}

double routing_cost(const Instance& inst, const std::vector<Vec>& x) {
  const Index nC = static_cast<Index>(inst.commodities.size());
  double cost = 0.0;
  for (std::size_t a = 0; a < inst.links.size(); ++a) {
    const Link& l = inst.links[a];
    const Vec& xa = x[a];
    const double v = xa(nC);
    const double g = l.kind == Congestion::kLog ? -std::log(v) : v * std::log(v);
    cost += l.cost * xa.head(nC).sum() + l.weight * g;
  }
  return cost;
}

nlohmann::json to_json(const Instance& inst) {
  nlohmann::json j;
  j["format"] = "rpc";
  j["seed"] = inst.seed;
  j["nodes"] = nlohmann::json::array();
  for (const auto& n : inst.nodes) j["nodes"].push_back({n.x, n.y});
  j["links"] = nlohmann::json::array();
  for (const auto& l : inst.links) {
    j["links"].push_back({{"from", l.from},
                          {"to", l.to},
                          {"capacity", l.capacity},
                          {"cost", l.cost},
                          {"weight", l.weight},
                          {"kind", l.kind == Congestion::kLog ? "log" : "entropy"}});
  }
  j["commodities"] = nlohmann::json::array();
  for (const auto& c : inst.commodities) {
    j["commodities"].push_back({{"source", c.source}, {"dest", c.dest}, {"demand", c.demand}});
  }
  return j;
}

Instance from_json(const nlohmann::json& j) {
  try {
    Instance inst;
    inst.seed = j.value("seed", std::uint64_t{0});
    for (const auto& n : j.at("nodes")) {
      if (n.is_object()) {
        inst.nodes.push_back({n.at("x").get<double>(), n.at("y").get<double>()});
      } else {
        inst.nodes.push_back({n.at(0).get<double>(), n.at(1).get<double>()});
      }
    }
    for (const auto& lj : j.at("links")) {
      Link l;
      l.from = lj.at("from").get<int>();
      l.to = lj.at("to").get<int>();
      l.capacity = lj.at("capacity").get<double>();
      l.cost = lj.at("cost").get<double>();
      l.weight = lj.value("weight", 10.0);
      const std::string kind = lj.value("kind", std::string("log"));
      if (kind != "log" && kind != "entropy") {
        throw Error(ErrorKind::kInvalidInstance, "rpc: unknown congestion kind '" + kind + "'");
      }
      l.kind = kind == "log" ? Congestion::kLog : Congestion::kEntropy;
      inst.links.push_back(l);
    }
    for (const auto& cj : j.at("commodities")) {
      inst.commodities.push_back({cj.at("source").get<int>(), cj.at("dest").get<int>(),
                                  cj.at("demand").get<double>()});
    }
    check(inst);
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidInstance, std::string("rpc: malformed instance: ") + e.what());
  }
}

}  // namespace dualpath::rpc
