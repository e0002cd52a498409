#include <benchmark/benchmark.h>

#include <vector>

#include "greenshield/edge.hpp"
#include "greenshield/metrics.hpp"
#include "greenshield/pipeline.hpp"

using namespace greenshield;

namespace {

const std::vector<LabeledSample>& training_set() {
  static const auto data = prepare_dataset(generate_dataset(500, 42), 42).train;
  return data;
}

std::vector<FeatureVector> inputs(std::size_t n) {
  Rng rng(1);
  std::vector<FeatureVector> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({rng.normal(30, 6), rng.normal(50, 12), rng.normal(23, 2.5)});
  return out;
}

template <class Train>
void run_predict(benchmark::State& state, Train train) {
  const FireModel model = train(training_set(), TrainConfig{});
  const auto xs = inputs(1024);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict_probability(model, xs[i++ & 1023]));
  }
}

void BM_PredictLogistic(benchmark::State& state) { run_predict(state, logreg_train); }
void BM_PredictForest(benchmark::State& state) { run_predict(state, forest_train); }
void BM_PredictSvm(benchmark::State& state) { run_predict(state, svm_train); }

void BM_TrainLogistic(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(logreg_train(training_set(), TrainConfig{}));
}

void BM_TrainForest(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(forest_train(training_set(), TrainConfig{}));
}

void BM_TrainSvm(benchmark::State& state) {
  TrainConfig cfg;
  cfg.svm.kernel = state.range(0) == 0 ? KernelType::Linear : KernelType::Rbf;
  for (auto _ : state) benchmark::DoNotOptimize(svm_train(training_set(), cfg));
}

void BM_Auc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  std::vector<double> scores(n);
  std::vector<int> truth(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = rng.uniform();
    truth[i] = static_cast<int>(i % 2);
  }
  for (auto _ : state) benchmark::DoNotOptimize(auc(roc_curve(scores, truth)));
  state.SetComplexityN(state.range(0));
}

void BM_Ingest(benchmark::State& state) {
  Rng rng(3);
  ThresholdState s;
  std::int64_t ts = 0;
  for (auto _ : state) {
    SensorReading r{"n1", ++ts, rng.normal(25, 0.5), rng.normal(45, 1), rng.normal(21, 0.1), false};
    s = ingest(s, r).state;
  }
}

}  // namespace

BENCHMARK(BM_PredictLogistic);
BENCHMARK(BM_PredictForest);
BENCHMARK(BM_PredictSvm);
BENCHMARK(BM_TrainLogistic)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainForest)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainSvm)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Auc)->RangeMultiplier(4)->Range(256, 65536)->Complexity(benchmark::oNLogN);
BENCHMARK(BM_Ingest);

BENCHMARK_MAIN();
