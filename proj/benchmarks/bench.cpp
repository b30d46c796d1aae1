#include <benchmark/benchmark.h>

#include "dualpath/master.hpp"
#include "dualpath/pathfollow.hpp"
#include "dualpath/rpc.hpp"
#include "dualpath/subproblem.hpp"

using namespace dualpath;

namespace {

// Sizes grow in nodes; links and commodities follow.
rpc::Instance instance(int nodes) { return rpc::generate(42, nodes, 2 * nodes, 1 + nodes / 4); }

// One block solve, warm started from the previous t as in Phase 2.
void BM_SolveBlock(benchmark::State& state) {
  const auto inst = instance(static_cast<int>(state.range(0)));
  const SeparableProblem p = rpc::to_problem(inst);
  const PreparedBlock pb = prepare_block(p.blocks[0]);
  const Vec y = Vec::LinSpaced(p.m(), 0.0, 50.0);
  const double t = 0.25;
  const BlockTarget target{local_accuracy(0.01, t) / p.blocks.size(), 1.0, false};
  const Vec warm = solve_block(pb, y, t / 0.96, target, pb.z_center).z_bar;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_block(pb, y, t, target, warm));
  }
}
BENCHMARK(BM_SolveBlock)->Arg(8)->Arg(32);

void BM_EvalDual(benchmark::State& state) {
  const auto inst = instance(static_cast<int>(state.range(0)));
  const PreparedProblem p = prepare(rpc::to_problem(inst));
  MasterOptions opts;
  opts.threads = static_cast<int>(state.range(1));
  // Prices at the Phase-1 start; the warm start comes from a slightly larger t.
  const Vec y = Vec::Zero(p.m());
  const double t = 0.25;
  const DualAccuracy acc = DualAccuracy::inexact(0.01, t, p.nu, StopRule::kLocal);
  const DualIterate first = eval_dual(p, y, t / 0.96, acc, nullptr, opts);
  const auto warm = first.warm();
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval_dual(p, y, t, acc, &warm, opts));
  }
  state.SetLabel(std::to_string(p.M()) + " blocks, m = " + std::to_string(p.m()));
}
BENCHMARK(BM_EvalDual)->Args({8, 1})->Args({32, 1})->Args({32, 4})->Unit(benchmark::kMicrosecond);

void BM_Solve(benchmark::State& state) {
  const auto inst = instance(static_cast<int>(state.range(0)));
  const PreparedProblem p = prepare(rpc::to_problem(inst));
  SolverConfig cfg;
  cfg.mode = state.range(1) ? Mode::kExact : Mode::kInexact;
  long iters = 0;
  for (auto _ : state) {
    const SolveReport rep = solve(p, cfg);
    iters = rep.phase1_iters + rep.phase2_iters;
    benchmark::DoNotOptimize(rep.d_delta);
  }
  state.counters["newton_steps"] = static_cast<double>(iters);
}
BENCHMARK(BM_Solve)->Args({6, 0})->Args({6, 1})->Args({12, 0})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
