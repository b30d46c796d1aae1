#include <gtest/gtest.h>

#include <cmath>

#include "dualpath/oracle.hpp"
#include "dualpath/problem.hpp"
#include "dualpath/rpc.hpp"
#include "fixtures.hpp"

using namespace dualpath;

namespace {

rpc::Instance single_link(rpc::Congestion kind) {
  rpc::Instance inst;
  inst.nodes = {{0.0, 0.0}, {1.0, 0.0}};
  inst.links = {{0, 1, 10.0, 1.0, 10.0, kind}};
  inst.commodities = {{0, 1, 50.0}};
  return inst;
}

}  // namespace

TEST(Generate, IsDeterministic) {
  const auto a = rpc::to_json(rpc::generate(7, 6, 10, 2));
  const auto b = rpc::to_json(rpc::generate(7, 6, 10, 2));
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_NE(a.dump(), rpc::to_json(rpc::generate(8, 6, 10, 2)).dump());
}

TEST(Generate, ProblemDimensions) {
  const auto inst = rpc::generate(3, 5, 8, 2);
  EXPECT_EQ(rpc::coupling_rows(inst), 8);
  const SeparableProblem p = rpc::to_problem(inst);
  EXPECT_EQ(p.m(), 8);
  EXPECT_EQ(p.blocks.size(), 8u);
  EXPECT_EQ(p.n(), 32);
  // The destination row of each commodity is dropped.
  for (int k = 0; k < 2; ++k) {
    EXPECT_EQ(rpc::coupling_row(inst, inst.commodities[k].dest, k), -1);
    EXPECT_GE(rpc::coupling_row(inst, inst.commodities[k].source, k), 0);
  }
}

TEST(Generate, SuiteInstancesValidate) {
  for (const auto& s : fixtures::rpc_suite()) {
    const auto inst = rpc::generate(s.seed, s.nodes, s.links, s.commodities);
    EXPECT_NO_THROW(rpc::check(inst));
    const auto rep = validate(rpc::to_problem(inst));
    EXPECT_TRUE(rep.ok()) << "seed " << s.seed << ": " << rep.message;
  }
}

TEST(Generate, DataRanges) {
  const auto inst = rpc::generate(11, 8, 14, 3);
  for (const auto& n : inst.nodes) {
    EXPECT_GE(n.x, 0.0);
    EXPECT_LE(n.x, 100.0);
    EXPECT_GE(n.y, 0.0);
    EXPECT_LE(n.y, 300.0);
  }
  for (const auto& l : inst.links) {
    EXPECT_NE(l.from, l.to);
    EXPECT_GE(l.capacity, 10.0);
    EXPECT_LE(l.capacity, 100.0);
    EXPECT_EQ(l.weight, 10.0);
    const auto& a = inst.nodes[static_cast<std::size_t>(l.from)];
    const auto& b = inst.nodes[static_cast<std::size_t>(l.to)];
    EXPECT_NEAR(l.cost, std::hypot(a.x - b.x, a.y - b.y), 1e-12);
  }
  for (const auto& c : inst.commodities) {
    EXPECT_GE(c.demand, 50.0);
    EXPECT_LE(c.demand, 500.0);
    EXPECT_NE(c.source, c.dest);
  }
  EXPECT_THROW(rpc::generate(1, 6, 5, 1), Error);
}

TEST(RpcOptimum, SingleLinkClosedForm) {
  // All demand uses the link: u = 50, v = 40.
  const auto log_opt = oracle::rpc_optimum(single_link(rpc::Congestion::kLog));
  EXPECT_NEAR(log_opt.phi_star, -(50.0 - 10.0 * std::log(40.0)), 1e-5);
  const auto ent_opt = oracle::rpc_optimum(single_link(rpc::Congestion::kEntropy));
  EXPECT_NEAR(ent_opt.phi_star, -(50.0 + 10.0 * 40.0 * std::log(40.0)), 1e-4);
  EXPECT_NEAR(log_opt.x[0](0), 50.0, 1e-6);
  EXPECT_NEAR(log_opt.x[0](1), 40.0, 1e-6);
}

TEST(RoutingCost, IsMinusTheBlockObjective) {
  const auto inst = rpc::generate(4, 5, 8, 2);
  const auto opt = oracle::rpc_optimum(inst);
  const SeparableProblem p = rpc::to_problem(inst);
  double obj = 0.0;
  for (std::size_t i = 0; i < p.blocks.size(); ++i) obj += p.blocks[i].c.dot(opt.x[i]);
  EXPECT_NEAR(rpc::routing_cost(inst, opt.x), -obj, 1e-9 * std::abs(obj));
  EXPECT_NEAR(obj, opt.phi_star, 1e-9 * std::abs(obj));
}

TEST(RpcJson, RoundTrip) {
  const auto inst = rpc::generate(21, 6, 9, 3);
  const auto back = rpc::from_json(rpc::to_json(inst));
  EXPECT_EQ(rpc::to_json(back).dump(), rpc::to_json(inst).dump());
  // Object-form nodes are accepted as well.
  auto j = rpc::to_json(single_link(rpc::Congestion::kLog));
  j["nodes"] = nlohmann::json::array({{{"x", 0.0}, {"y", 0.0}}, {{"x", 1.0}, {"y", 0.0}}});
  EXPECT_EQ(rpc::from_json(j).nodes[1].x, 1.0);
}

TEST(RpcCheck, RejectsBrokenInstances) {
  auto bad_index = single_link(rpc::Congestion::kLog);
  bad_index.links[0].to = 5;
  EXPECT_THROW(rpc::check(bad_index), Error);

  auto bad_demand = single_link(rpc::Congestion::kLog);
  bad_demand.commodities[0].demand = -1.0;
  EXPECT_THROW(rpc::check(bad_demand), Error);

  auto no_route = single_link(rpc::Congestion::kLog);
  no_route.commodities[0] = {1, 0, 10.0};
  try {
    rpc::check(no_route);
    ADD_FAILURE() << "expected a routing error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidInstance);
  }

  auto loop = single_link(rpc::Congestion::kLog);
  loop.links[0].to = 0;
  EXPECT_THROW(rpc::check(loop), Error);
}
