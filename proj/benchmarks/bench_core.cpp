#include "hpo/acquisition.hpp"
#include "hpo/cohort.hpp"
#include "hpo/gp.hpp"
#include "hpo/hyperspace.hpp"
#include "hpo/metrics.hpp"
#include "hpo/mlp.hpp"
#include "hpo/rng.hpp"
#include "hpo/synthetic.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

using namespace hpo;

struct Observations {
  Eigen::MatrixXd inputs;
  Eigen::VectorXd targets;
};

// Encoded uniform draws from the xgb space scored by the pinned bowl.
Observations xgb_observations(std::size_t n) {
  const SyntheticBowl bowl = SyntheticBowl::xgb();
  const auto configs = sample_uniform(bowl.space(), 17, n);
  Observations obs;
  obs.inputs.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(bowl.space().size()));
  obs.targets.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    obs.inputs.row(static_cast<Eigen::Index>(i)) = bowl.space().encode(configs[i], SpaceMode::Transformed).transpose();
    obs.targets(static_cast<Eigen::Index>(i)) = bowl(configs[i]);
  }
  return obs;
}

void BM_GpFit(benchmark::State& state) {
  const Observations obs = xgb_observations(static_cast<std::size_t>(state.range(0)));
  FitOptions options;
  options.ard = state.range(1) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(GaussianProcess::fit(obs.inputs, obs.targets, options));
}
BENCHMARK(BM_GpFit)->Args({25, 0})->Args({25, 1})->Args({100, 0})->Args({100, 1})->Unit(benchmark::kMillisecond);

void BM_LogMarginalLikelihood(benchmark::State& state) {
  const Observations obs = xgb_observations(static_cast<std::size_t>(state.range(0)));
  const auto params = KernelParams::per_dimension(1.0, Eigen::VectorXd::Constant(obs.inputs.cols(), 0.5));
  Eigen::VectorXd gradient;
  for (auto _ : state) benchmark::DoNotOptimize(log_marginal_likelihood(obs.inputs, obs.targets, params, 0.01, &gradient));
}
BENCHMARK(BM_LogMarginalLikelihood)->Arg(25)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_ProposeNext(benchmark::State& state) {
  const SyntheticBowl bowl = SyntheticBowl::xgb();
  const Observations obs = xgb_observations(static_cast<std::size_t>(state.range(0)));
  const auto gp = GaussianProcess::condition(obs.inputs, obs.targets,
                                             KernelParams::shared(1.0, 0.5), 0.01);
  std::uint64_t seed = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(propose_next(gp, bowl.space(), SpaceMode::Transformed, AcquisitionSpec{}, ++seed));
}
BENCHMARK(BM_ProposeNext)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_MlpTrain(benchmark::State& state) {
  CohortOptions options;
  options.seed = 3;
  const GroupedDataset data = generate_synthetic_cohort(options);
  MlpConfig config;
  config.epochs = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(train_mlp(data.features, data.labels, data.num_classes, config, 1));
}
BENCHMARK(BM_MlpTrain)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_AucBinary(benchmark::State& state) {
  Rng rng(5);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> scores(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = rng.uniform() < 0.3 ? 1 : 0;
    scores[i] = rng.uniform();
  }
  labels[0] = 1;
  labels[1] = 0;
  for (auto _ : state) benchmark::DoNotOptimize(auc_binary(scores, labels));
}
BENCHMARK(BM_AucBinary)->Arg(1000)->Arg(100000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
