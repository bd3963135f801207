#include <benchmark/benchmark.h>

#include <random>

#include "netstream/fused_chain.hpp"
#include "netstream/rt_solver.hpp"
#include "netstream/stream_engine.hpp"
#include "netstream/streaming_covariance.hpp"
#include "netstream/synth.hpp"

using namespace netstream;

namespace {

Matrix spd(int p, std::uint64_t seed) {
  Rng rng(seed);
  Matrix a(p, p);
  for (Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  return a * a.transpose() / p + 0.5 * Matrix::Identity(p, p);
}

Matrix rows(int p, int n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(n, p);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  return x;
}

}  // namespace

static void BM_ThetaStep(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const Matrix s = spd(p, 1), z = Matrix::Identity(p, p), u = Matrix::Zero(p, p);
  for (auto _ : state) benchmark::DoNotOptimize(theta_step(s, z, u));
}
BENCHMARK(BM_ThetaStep)->Arg(5)->Arg(10)->Arg(19)->Arg(50);

static void BM_ZStep(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const Matrix th = spd(p, 2), u = 0.1 * spd(p, 3), prev = spd(p, 4);
  SolverConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(z_step(th, u, prev, cfg));
}
BENCHMARK(BM_ZStep)->Arg(10)->Arg(50);

template <class Mode>
static void BM_TrackerUpdate(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const Matrix x = rows(p, 4096, 5);
  ForgettingState s(p, Mode{});
  Index t = 0;
  for (auto _ : state) {
    s.update(x.row(t).transpose());
    t = (t + 1) % x.rows();
  }
}
BENCHMARK_TEMPLATE(BM_TrackerUpdate, FixedForgetting)->Arg(10)->Arg(19)->Arg(50);
BENCHMARK_TEMPLATE(BM_TrackerUpdate, AdaptiveForgetting)->Arg(10)->Arg(19)->Arg(50);

static void BM_Solve(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const Matrix s = spd(p, 6);
  const Matrix prev = s.inverse();
  SolverConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(solve(s, prev, cfg));
}
BENCHMARK(BM_Solve)->Arg(5)->Arg(10)->Arg(19);

static void BM_FusedChain(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(7);
  std::vector<double> a(n), out(n);
  for (double& v : a) v = rng.normal();
  for (auto _ : state) {
    fused_lasso_chain(a, 0.1, 0.2, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_FusedChain)->Arg(15)->Arg(500);

static void BM_EngineStep(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  DatasetSpec spec;
  spec.p = p;
  spec.segments = 3;
  spec.seg_len = 50;
  spec.graph = GraphModel::kWattsStrogatz;
  const auto ds = generate_dataset(spec);
  for (auto _ : state) {
    state.PauseTiming();
    StreamEngine engine(p, EngineConfig{});
    for (Index t = 0; t < 15; ++t) engine.push(ds.observations.row(t).transpose());
    state.ResumeTiming();
    for (Index t = 15; t < ds.observations.rows(); ++t)
      benchmark::DoNotOptimize(engine.push(ds.observations.row(t).transpose()));
  }
  state.SetItemsProcessed(state.iterations() * (ds.observations.rows() - 15));
}
BENCHMARK(BM_EngineStep)->Arg(10)->Arg(19)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
