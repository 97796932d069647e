#include <benchmark/benchmark.h>

#include "abode/geometry.hpp"
#include "abode/graph.hpp"
#include "abode/model.hpp"
#include "abode/rng.hpp"
#include "abode/synthetic.hpp"
#include "abode/train.hpp"

namespace {

using namespace abode;

// CDR length is the benchmark argument; antigen stays at 12 residues
FeaturizedComplex sample_of(std::size_t cdr) {
  return synthetic::random_complex(21, synthetic::ComplexShape{6, cdr, 4, 12});
}

void BM_FPsiForward(benchmark::State& state) {
  const auto sample = sample_of(static_cast<std::size_t>(state.range(0)));
  const graph::ComplexGraph g = graph::build_graph(sample, {});
  const model::ModelParams params = model::init_params(model::ModelConfig{}, 3);
  const ad::Array h = model::conditioning(params, g);
  const ad::Array z = graph::init_state(g);
  for (auto _ : state) benchmark::DoNotOptimize(model::f_psi(params, g, 50.0, 200.0, z, h));
}
BENCHMARK(BM_FPsiForward)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

void BM_SampleGradient(benchmark::State& state) {
  train::TrainConfig cfg;
  cfg.solver.steps = static_cast<std::size_t>(state.range(0));
  const auto prepared = train::prepare(sample_of(10), cfg);
  const model::ModelParams params = model::init_params(cfg.model, 3);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        train::sample_gradient(params, prepared, cfg.solver, cfg.loss, train::loss_mode(cfg.mode)));
}
BENCHMARK(BM_SampleGradient)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_Kabsch(benchmark::State& state) {
  Rng rng(9);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = synthetic::random_chain(rng, n, geometry::Vec3::Zero()).coords.track(geometry::Track::CA);
  const auto b = synthetic::random_chain(rng, n, geometry::Vec3::Zero()).coords.track(geometry::Track::CA);
  for (auto _ : state) benchmark::DoNotOptimize(geometry::kabsch_rmsd(a, b));
}
BENCHMARK(BM_Kabsch)->Arg(8)->Arg(64)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
