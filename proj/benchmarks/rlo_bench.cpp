#include <benchmark/benchmark.h>

#include "rlo/dataset.hpp"
#include "rlo/engine.hpp"
#include "rlo/fields.hpp"
#include "rlo/objectives.hpp"

namespace {

using namespace rlo;

void BM_GenerateDirection(benchmark::State& state) {
  const Index dim = state.range(0);
  FieldSpec spec;
  spec.phi = PhiKind::kTanhAdaptive;
  spec.lambda_b = 0.2;
  spec.global_normalize = true;
  OptimizerState y = OptimizerState::zero(dim, true);
  const Vector g = Vector::LinSpaced(dim, -1.0, 1.0);
  for (auto _ : state) {
    Direction out = generate_direction(spec, y, g);
    benchmark::DoNotOptimize(out.d.data());
    y = std::move(out.next);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_GenerateDirection)->RangeMultiplier(16)->Range(16, 65536);

void BM_RloStep(benchmark::State& state) {
  const Index dim = state.range(0);
  const RLOConfig cfg = make_preset("rlo_lifted", {{"h", 1e-3}});
  ExtendedState s = ExtendedState::initial(Point::euclidean(Vector::Ones(dim)), cfg);
  const Vector g = Vector::LinSpaced(dim, -1.0, 1.0);
  for (auto _ : state) {
    s = rlo_step(s, Tangent(s.theta, g), cfg).state;
    benchmark::DoNotOptimize(s.theta.coords().data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RloStep)->RangeMultiplier(16)->Range(16, 65536);

void BM_MlpEval(benchmark::State& state) {
  const Dataset data = make_two_gaussians(state.range(0) / 2, 2, 3.0, 1);
  const MlpArch arch{2, 16, 2};
  const Vector w = Vector::Constant(arch.num_weights(), 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(mlp_eval(w, data, arch).f);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpEval)->Arg(32)->Arg(128)->Arg(400);

}  // namespace

BENCHMARK_MAIN();
