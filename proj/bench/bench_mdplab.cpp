#include <benchmark/benchmark.h>

#include "json.hpp"
#include "mdplab/array_models.hpp"
#include "mdplab/dependence.hpp"
#include "mdplab/markov_chain.hpp"
#include "mdplab/mc_engine.hpp"

namespace {

using namespace mdplab;

TriangularArrayModel rademacher_model() {
  return build_model({{"family", "iid"},
                      {"params", {{"innovation", {{"law", "rademacher"}}}}},
                      {"speed", {{"form", "power"}, {"gamma", 0.5}}},
                      {"n_grid", {100}}});
}

void BM_CrudeTail(benchmark::State& state) {
  const auto model = rademacher_model();
  const auto a = model.speed();
  MCConfig cfg;
  cfg.per_batch = 20000;
  cfg.batches = 16;
  for (auto _ : state) {
    auto e = state.range(0) ? crude_tail(model, a, McEvent::endpoint_raw(20.0), 100, cfg)
                            : crude_tail_serial(model, a, McEvent::endpoint_raw(20.0), 100, cfg);
    benchmark::DoNotOptimize(e.p_hat);
  }
}
BENCHMARK(BM_CrudeTail)->Arg(0)->Arg(1)->ArgNames({"parallel"})->Unit(benchmark::kMillisecond);

void BM_AlphaExact(benchmark::State& state) {
  const auto chain = FiniteMarkovChain::moving_window(4);  // 16 states
  for (auto _ : state) {
    const double v = state.range(0) ? alpha_exact(chain, 3) : alpha_exact_serial(chain, 3);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_AlphaExact)->Arg(0)->Arg(1)->ArgNames({"parallel"})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
