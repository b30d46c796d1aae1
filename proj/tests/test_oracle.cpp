#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "checks.hpp"
#include "dualpath/barriers.hpp"
#include "dualpath/oracle.hpp"
#include "dualpath/rpc.hpp"
#include "fixtures.hpp"

using namespace dualpath;

namespace {

// max x1 + 2 x2 over [0, 1]^2 split into two scalar blocks with x1 + x2 = 0.9.
SeparableProblem tiny_lp() {
  SeparableProblem p;
  for (double c : {1.0, 2.0}) {
    Block blk;
    blk.c = Vec::Constant(1, c);
    blk.A = Mat::Ones(1, 1);
    blk.barrier = std::make_shared<IntervalBarrier>(Vec::Zero(1), Vec::Ones(1));
    blk.x_start = Vec::Constant(1, 0.45);
    p.blocks.push_back(blk);
  }
  p.b = Vec::Constant(1, 0.9);
  return p;
}

}  // namespace

TEST(SolveCoupled, TinyLpClosedForm) {
  const auto r = oracle::solve_coupled(tiny_lp(), 1e-9);
  EXPECT_NEAR(r.phi_star, 1.8, 1e-8);
  EXPECT_LE(r.gap_bound, 1e-9);
  EXPECT_NEAR(r.x[0](0), 0.0, 1e-6);
  EXPECT_NEAR(r.x[1](0), 0.9, 1e-6);
}

TEST(SolveCoupled, BeatsTheStartAndMatchesGridSearch) {
  // Two scalar boxes with a concave objective along the coupling line
  // x1 + x2 = b, so a one-dimensional grid gives the reference.
  const SeparableProblem p = fixtures::quadratic_blocks(30, 2, 1, 1);
  const auto r = oracle::solve_coupled(p, 1e-9);
  double start = 0.0;
  for (const Block& blk : p.blocks) start += blk.c.dot(blk.x_start);
  EXPECT_GE(r.phi_star, start);

  // Recover each block's quadratic from its epigraph objective: the value
  // is the slack coordinate, phi_i(x) = -|x - a_i|^2 / 2.
  const double a0 = p.blocks[0].A(0, 0);
  const double a1 = p.blocks[1].A(0, 0);
  const double b = p.b(0);
  auto phi = [&](int i, double x) {
    const Vec xs = (Vec(2) << x, 0.0).finished();
    const auto& F = *p.blocks[static_cast<std::size_t>(i)].barrier;
    // Largest s with (x, s) in the closure of the epigraph domain, by bisection.
    double lo = -10.0;
    double hi = 10.0;
    for (int k = 0; k < 60; ++k) {
      const double mid = 0.5 * (lo + hi);
      Vec z = xs;
      z(1) = mid;
      (F.contains(z) ? lo : hi) = mid;
    }
    return lo;
  };
  double best = -1e300;
  for (int i = -10000; i <= 10000; ++i) {
    const double x0 = i * 1e-4;
    const double x1 = (b - a0 * x0) / a1;
    if (std::abs(x0) >= 1.0 || std::abs(x1) >= 1.0) continue;
    best = std::max(best, phi(0, x0) + phi(1, x1));
  }
  EXPECT_NEAR(r.phi_star, best, 1e-4);
}

TEST(SmoothedOptimum, BelowPhiStarAndRisingAsTFalls) {
  const auto inst = rpc::generate(1000, 5, 8, 2);
  const SeparableProblem p = rpc::to_problem(inst);
  const auto start = oracle::rpc_feasible_point(inst);
  const double phi_star = oracle::rpc_optimum(inst).phi_star;
  double prev = -1e300;
  for (double t : {1.0, 0.3, 0.1, 0.03, 0.01}) {
    const double d = oracle::smoothed_optimum(p, t, start).value;
    EXPECT_LE(d, phi_star + 1e-6 * std::abs(phi_star)) << "t " << t;
    EXPECT_GE(d, prev) << "t " << t;
    prev = d;
  }
}

TEST(SmoothedOptimum, EqualsTheDualMinimum) {
  const SeparableProblem sp = fixtures::quadratic_blocks(31, 3, 2, 2);
  const PreparedProblem p = prepare(sp);
  for (double t : {0.5, 0.05}) {
    const double primal = oracle::smoothed_optimum(sp, t).value;
    const DualIterate star = checks::dual_minimum(p, t, Vec::Zero(2));
    EXPECT_NEAR(star.d_val, primal, 1e-8 * (1.0 + std::abs(primal))) << "t " << t;
  }
}

TEST(SmoothedDual, MatchesTheDecomposedEvaluation) {
  const SeparableProblem sp = fixtures::boxes(32, 3, 2, 2, true);
  const PreparedProblem p = prepare(sp);
  std::mt19937_64 rng(32);
  for (int k = 0; k < 5; ++k) {
    const Vec y = fixtures::uniform_vec(rng, 2, -1.0, 1.0);
    const double ref = oracle::smoothed_dual(sp, y, 0.1).value;
    EXPECT_NEAR(checks::eval_exact(p, y, 0.1).d_val, ref, 1e-9 * (1.0 + std::abs(ref)));
  }
}

TEST(DualD0, SingleBoxAndProperties) {
  SeparableProblem one;
  Block blk;
  blk.c = (Vec(2) << 1.0, -1.0).finished();
  blk.A = Mat::Zero(1, 2);
  blk.barrier = std::make_shared<IntervalBarrier>(Vec::Zero(2), Vec::Ones(2));
  blk.x_start = Vec::Constant(2, 0.5);
  one.blocks.push_back(blk);
  one.b = Vec::Zero(1);
  EXPECT_DOUBLE_EQ(oracle::dual_d0(one, Vec::Zero(1)), 1.0);

  const SeparableProblem sp = fixtures::boxes(33, 3, 2, 2, true);
  const PreparedProblem p = prepare(sp);
  std::mt19937_64 rng(33);
  for (int k = 0; k < 10; ++k) {
    const Vec y1 = fixtures::uniform_vec(rng, 2, -2.0, 2.0);
    const Vec y2 = fixtures::uniform_vec(rng, 2, -2.0, 2.0);
    const double mid = oracle::dual_d0(sp, 0.5 * (y1 + y2));
    EXPECT_LE(mid, 0.5 * (oracle::dual_d0(sp, y1) + oracle::dual_d0(sp, y2)) + 1e-12);
    EXPECT_GE(oracle::dual_d0(sp, y1), checks::eval_exact(p, y1, 0.1).d_val - 1e-12);
  }
  EXPECT_THROW(oracle::dual_d0(fixtures::quadratic_blocks(1, 2, 2, 1), Vec::Zero(1)), Error);
}

TEST(FeasiblePoint, SatisfiesEveryConstraint) {
  for (const auto& s : fixtures::rpc_suite(5)) {
    const auto inst = rpc::generate(s.seed, s.nodes, s.links, s.commodities);
    const SeparableProblem p = rpc::to_problem(inst);
    const auto x = oracle::rpc_feasible_point(inst);
    Vec Ax = -p.b;
    for (std::size_t i = 0; i < p.blocks.size(); ++i) {
      const Block& blk = p.blocks[i];
      EXPECT_TRUE(blk.barrier->contains(x[i]));
      EXPECT_LT((blk.equality->E * x[i] - blk.equality->f).norm(), 1e-9);
      Ax += blk.A * x[i];
    }
    EXPECT_LT(Ax.norm(), 1e-9 * (1.0 + p.b.norm()));
  }
}
