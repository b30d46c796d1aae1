// Small hand-built instances shared by the unit tests and the acceptance run.
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "dualpath/barriers.hpp"
#include "dualpath/problem.hpp"

namespace fixtures {

using dualpath::Block;
using dualpath::Index;
using dualpath::Mat;
using dualpath::SeparableProblem;
using dualpath::Vec;

inline Vec uniform_vec(std::mt19937_64& rng, Index n, double lo, double hi) {
  std::uniform_real_distribution<double> U(lo, hi);
  Vec v(n);
  for (Index i = 0; i < n; ++i) v(i) = U(rng);
  return v;
}

inline Mat uniform_mat(std::mt19937_64& rng, Index r, Index c, double lo, double hi) {
  std::uniform_real_distribution<double> U(lo, hi);
  Mat A(r, c);
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < c; ++j) A(i, j) = U(rng);
  }
  return A;
}

/// M random boxes [l, u]^n with m coupling rows. Every start point is
/// interior and b = sum A_i x_start_i, so the starts are coupling feasible.
/// With `cut` set, every block also carries the half-space sum(x) <= d that
/// slices a corner off its box.
inline SeparableProblem boxes(std::uint64_t seed, int M, Index n, Index m, bool cut = false) {
  std::mt19937_64 rng(seed);
  SeparableProblem p;
  p.b = Vec::Zero(m);
  for (int i = 0; i < M; ++i) {
    Block blk;
    const Vec lo = uniform_vec(rng, n, -1.0, 0.0);
    const Vec hi = lo + uniform_vec(rng, n, 1.0, 2.0);
    blk.c = uniform_vec(rng, n, -1.0, 1.0);
    blk.A = uniform_mat(rng, m, n, -1.0, 1.0);
    const Vec mid = 0.5 * (lo + hi);
    const Vec half = 0.5 * (hi - lo);
    blk.x_start = mid + half.cwiseProduct(uniform_vec(rng, n, -0.3, 0.3));
    auto box = std::make_shared<dualpath::IntervalBarrier>(lo, hi);
    if (cut) {
      // Through the midpoint between the start and the top corner.
      const double d = 0.5 * (blk.x_start.sum() + hi.sum());
      std::vector<dualpath::SumBarrier::Term> terms;
      std::vector<Index> all(static_cast<std::size_t>(n));
      for (Index j = 0; j < n; ++j) all[static_cast<std::size_t>(j)] = j;
      terms.push_back({box, all});
      terms.push_back({std::make_shared<dualpath::HalfspaceBarrier>(Vec::Ones(n), d), all});
      blk.barrier = std::make_shared<dualpath::SumBarrier>(n, std::move(terms));
    } else {
      blk.barrier = box;
    }
    p.b += blk.A * blk.x_start;
    p.blocks.push_back(std::move(blk));
  }
  return p;
}

/// Two unit boxes in R^2 with zero objective, coupled through one row whose
/// right-hand side is met at the box centers. At y = 0 every block solution
/// is its analytic center and the dual gradient vanishes.
inline SeparableProblem centered_pair() {
  SeparableProblem p;
  Mat A(1, 2);
  A << 1.0, -0.5;
  for (int i = 0; i < 2; ++i) {
    Block blk;
    blk.c = Vec::Zero(2);
    blk.A = A;
    blk.barrier = std::make_shared<dualpath::IntervalBarrier>(Vec::Zero(2), Vec::Ones(2));
    blk.x_start = Vec::Constant(2, 0.5);
    p.blocks.push_back(std::move(blk));
  }
  p.b = Vec::Constant(1, 2.0 * 0.25);
  return p;
}

/// Blocks maximizing a concave quadratic -|x - a|^2 / 2 over a box through
/// the epigraph transform. Non-polyhedral, with curvature in every block.
inline SeparableProblem quadratic_blocks(std::uint64_t seed, int M, Index n, Index m) {
  std::mt19937_64 rng(seed);
  SeparableProblem p;
  p.b = Vec::Zero(m);
  for (int i = 0; i < M; ++i) {
    const Vec a = uniform_vec(rng, n, -0.5, 0.5);
    dualpath::NonlinearBlock nb;
    nb.phi = [a](const Vec& x) { return -0.5 * (x - a).squaredNorm(); };
    nb.A = uniform_mat(rng, m, n, -1.0, 1.0);
    nb.domain_barrier =
        std::make_shared<dualpath::IntervalBarrier>(Vec::Constant(n, -1.0), Vec::Constant(n, 1.0));
    nb.epigraph_barrier = std::make_shared<dualpath::QuadEpigraphBarrier>(
        Mat::Identity(n, n), a, -0.5 * a.squaredNorm());
    nb.x_start = uniform_vec(rng, n, -0.5, 0.5);
    p.b += nb.A * nb.x_start;
    p.blocks.push_back(dualpath::epigraph_transform(nb));
  }
  return p;
}

/// Sizes of the seeded routing suite: 4-8 nodes, 6-12 links (never fewer
/// than nodes) and 1-3 commodities.
struct RpcSize {
  std::uint64_t seed;
  int nodes;
  int links;
  int commodities;
};

inline std::vector<RpcSize> rpc_suite(int count = 20) {
  std::mt19937_64 rng(2024);
  std::vector<RpcSize> out;
  for (int i = 0; i < count; ++i) {
    // Raw engine output keeps the sizes identical across standard libraries.
    const int nodes = 4 + static_cast<int>(rng() % 5);
    const int links = std::max(nodes, 6 + static_cast<int>(rng() % 7));
    const int commodities = 1 + static_cast<int>(rng() % 3);
    out.push_back({1000u + static_cast<std::uint64_t>(i), nodes, links, commodities});
  }
  return out;
}

}  // namespace fixtures
