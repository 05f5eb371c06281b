#include <benchmark/benchmark.h>

#include "adass/adass.hpp"
#include "adass/lsq_oracle.hpp"
#include "adass/model.hpp"
#include "adass/selection.hpp"
#include "adass/synthetic.hpp"

namespace {

using namespace adass;

void BM_PerSampleEvalLogistic(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const Dataset data = make_separable_logistic(256, d, 0.1, 1);
  const ModelSpec model = ModelSpec::logistic(d, 1e-3);
  const Vec w = init_params(model, 1);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(per_sample_eval(model, w, data, i));
    i = (i + 1) % data.size();
  }
}
BENCHMARK(BM_PerSampleEvalLogistic)->Arg(10)->Arg(100);

void BM_PerSampleEvalMlp(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  const Dataset data = make_blobs(256, 8, 3, 2.0, 1);
  const ModelSpec model = ModelSpec::mlp(8, hidden, 3, 1e-4);
  const Vec w = init_params(model, 1);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(per_sample_eval(model, w, data, i));
    i = (i + 1) % data.size();
  }
}
BENCHMARK(BM_PerSampleEvalMlp)->Arg(16)->Arg(64);

void BM_LossSweep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Dataset data = make_blobs(n, 8, 3, 2.0, 1);
  const ModelSpec model = ModelSpec::mlp(8, 16, 3, 1e-4);
  const Vec w = init_params(model, 1);
  for (auto _ : state) benchmark::DoNotOptimize(loss_sweep(model, w, data));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_LossSweep)->Arg(1000)->Arg(10000);

void BM_SelectSubset(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const Vec current = Vec::Random(n).cwiseAbs();
  const Vec cached = Vec::Random(n).cwiseAbs();
  for (auto _ : state) benchmark::DoNotOptimize(select_subset(current, cached, 0.99));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SelectSubset)->Arg(1000)->Arg(100000);

void BM_SolveSubset(benchmark::State& state) {
  const auto problem = generate_synthetic(FeatureDist::Gaussian, 1000, static_cast<std::size_t>(state.range(0)), 0.1, 1);
  const IndexList half = [] {
    IndexList idx(500);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = 2 * i;
    return idx;
  }();
  for (auto _ : state) benchmark::DoNotOptimize(lsq::solve_subset(problem.data, half));
}
BENCHMARK(BM_SolveSubset)->Arg(10)->Arg(50);

void BM_AdassEpoch(benchmark::State& state) {
  const Dataset data = make_separable_logistic(2000, 20, 0.1, 1);
  const ModelSpec model = ModelSpec::logistic(20, 1e-3);
  AdassConfig cfg;
  cfg.optimizer.epochs = 1;
  cfg.optimizer.batch = 10;
  cfg.optimizer.eta = 0.05;
  cfg.alpha_sel = static_cast<double>(state.range(0)) / 100.0;
  const Vec w0 = init_params(model, 1);
  for (auto _ : state) benchmark::DoNotOptimize(adass_train(model, data, w0, cfg));
}
BENCHMARK(BM_AdassEpoch)->Arg(100)->Arg(99);

}  // namespace

BENCHMARK_MAIN();
