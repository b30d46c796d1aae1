// Every shipped barrier at a representative interior point, plus bounded
// variants that have analytic centers.
#pragma once

#include <memory>
#include <random>
#include <vector>

#include "dualpath/barriers.hpp"

namespace samples {

using dualpath::BarrierPtr;
using dualpath::IntervalBarrier;
using dualpath::Mat;
using dualpath::SumBarrier;
using dualpath::Vec;

struct Sample {
  BarrierPtr F;
  Vec x;
};

inline BarrierPtr with_box(BarrierPtr F, const Vec& lo, const Vec& hi) {
  std::vector<dualpath::Index> all(static_cast<std::size_t>(lo.size()));
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = static_cast<dualpath::Index>(j);
  std::vector<SumBarrier::Term> terms{{std::move(F), all},
                                      {std::make_shared<IntervalBarrier>(lo, hi), all}};
  return std::make_shared<SumBarrier>(lo.size(), std::move(terms));
}

inline std::vector<Sample> shipped() {
  std::vector<Sample> out;
  out.push_back({std::make_shared<dualpath::OrthantBarrier>(3), (Vec(3) << 0.5, 1.5, 3.0).finished()});
  out.push_back({std::make_shared<IntervalBarrier>((Vec(2) << -1.0, 0.0).finished(),
                                                   (Vec(2) << 2.0, 0.5).finished()),
                 (Vec(2) << 0.3, 0.1).finished()});
  // A lone half-space has a singular Hessian; pair it with a box.
  out.push_back({with_box(std::make_shared<dualpath::HalfspaceBarrier>((Vec(2) << 1.0, 2.0).finished(), 2.0),
                          Vec::Zero(2), Vec::Ones(2)),
                 (Vec(2) << 0.4, 0.6).finished()});
  out.push_back({std::make_shared<dualpath::LogEpigraphBarrier>(), (Vec(2) << 2.0, 0.5).finished()});
  out.push_back({std::make_shared<dualpath::EntropyEpigraphBarrier>(), (Vec(2) << 0.7, 0.2).finished()});
  {
    Mat Q(2, 2);
    Q << 2.0, 0.5, 0.5, 1.0;
    auto quad = std::make_shared<dualpath::QuadEpigraphBarrier>(Q, (Vec(2) << 0.3, -0.2).finished(), 1.0);
    out.push_back({with_box(quad, Vec::Constant(3, -2.0), Vec::Constant(3, 2.0)),
                   (Vec(3) << 0.2, -0.1, 0.1).finished()});
  }
  {
    std::vector<BarrierPtr> f{std::make_shared<dualpath::OrthantBarrier>(2),
                              std::make_shared<dualpath::LogEpigraphBarrier>()};
    out.push_back({std::make_shared<dualpath::ProductBarrier>(f), (Vec(4) << 1.0, 2.0, 1.5, 0.3).finished()});
  }
  return out;
}

/// Bounded barrier with a box enclosing its domain for rejection sampling.
struct Bounded {
  BarrierPtr F;
  Vec x;
  Vec lo;
  Vec hi;
};

inline std::vector<Bounded> bounded() {
  std::vector<Bounded> out;
  {
    const Vec lo = (Vec(2) << -1.0, 0.0).finished();
    const Vec hi = (Vec(2) << 2.0, 0.5).finished();
    out.push_back({std::make_shared<IntervalBarrier>(lo, hi), (Vec(2) << 0.3, 0.1).finished(), lo, hi});
  }
  {
    // Simplex x >= 0, x1 + x2 + x3 <= 3.
    std::vector<SumBarrier::Term> terms{
        {std::make_shared<dualpath::OrthantBarrier>(3), {0, 1, 2}},
        {std::make_shared<dualpath::HalfspaceBarrier>(Vec::Ones(3), 3.0), {0, 1, 2}}};
    out.push_back({std::make_shared<SumBarrier>(3, terms), Vec::Constant(3, 0.5), Vec::Zero(3),
                   Vec::Constant(3, 3.0)});
  }
  {
    const Vec lo = (Vec(2) << 0.0, -3.0).finished();
    const Vec hi = (Vec(2) << 5.0, 3.0).finished();
    out.push_back({with_box(std::make_shared<dualpath::LogEpigraphBarrier>(), lo, hi),
                   (Vec(2) << 2.0, 0.5).finished(), lo, hi});
  }
  {
    const Vec lo = (Vec(2) << 0.0, -1.0).finished();
    const Vec hi = (Vec(2) << 3.0, 4.0).finished();
    out.push_back({with_box(std::make_shared<dualpath::EntropyEpigraphBarrier>(), lo, hi),
                   (Vec(2) << 0.7, 0.2).finished(), lo, hi});
  }
  {
    Mat Q(2, 2);
    Q << 2.0, 0.5, 0.5, 1.0;
    auto quad = std::make_shared<dualpath::QuadEpigraphBarrier>(Q, (Vec(2) << 0.3, -0.2).finished(), 1.0);
    const Vec lo = Vec::Constant(3, -2.0);
    const Vec hi = Vec::Constant(3, 2.0);
    out.push_back({with_box(quad, lo, hi), (Vec(3) << 0.2, -0.1, 0.1).finished(), lo, hi});
  }
  return out;
}

/// Uniform point of the domain by rejection from the enclosing box.
inline Vec interior_point(const Bounded& b, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (;;) {
    Vec x(b.lo.size());
    for (dualpath::Index j = 0; j < x.size(); ++j) x(j) = b.lo(j) + U(rng) * (b.hi(j) - b.lo(j));
    if (b.F->contains(x)) return x;
  }
}

inline Vec random_unit(std::mt19937_64& rng, dualpath::Index n) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Vec u(n);
  for (dualpath::Index j = 0; j < n; ++j) u(j) = U(rng);
  return u / u.norm();
}

}  // namespace samples
