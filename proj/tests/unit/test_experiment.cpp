#include "hpo/cohort.hpp"
#include "hpo/error.hpp"
#include "hpo/experiment.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <set>

#include <sys/wait.h>

using namespace hpo;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args, const fs::path& log) {
  const std::string command = std::string(HPO_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config_error(const std::string& text) {
  try {
    parse_experiment_config(text, "exp.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

ExperimentConfig synthetic_config(Optimizer optimizer, const fs::path& out, std::size_t workers) {
  ExperimentConfig config;
  config.optimizer = optimizer;
  config.budget = 12;
  config.init_budget = 4;
  config.seed = 21;
  config.workers = workers;
  config.output_dir = out;
  return config;
}

GroupedDataset tiny_cohort(std::uint64_t seed) {
  CohortOptions options;
  options.studies = 6;
  options.min_samples = 10;
  options.max_samples = 14;
  options.task = CohortTask::Mortality;
  options.event_rate = 0.3;
  options.seed = seed;
  return generate_synthetic_cohort(options);
}

}  // namespace

TEST(ExperimentConfig, ParsesKeysCommentsAndWhitespace) {
  const auto config = parse_experiment_config(
      "# search settings\n"
      "optimizer = bo\n"
      "budget=30   # trailing comment\n"
      "init_budget = 10\n"
      "acquisition = ucb\nkappa = 1.5\nard = false\nspace_mode = original\n"
      "objective = dataset\ndataset = d.csv\nmodel = mlp\nmetric = mauc\nfolds = 4\nseed = 9\n");
  EXPECT_EQ(config.optimizer, Optimizer::Bayes);
  EXPECT_EQ(config.budget, 30u);
  EXPECT_EQ(config.init_budget, 10u);
  EXPECT_EQ(config.acquisition.kind, AcquisitionKind::UpperConfidenceBound);
  EXPECT_EQ(config.acquisition.kappa, 1.5);
  EXPECT_FALSE(config.ard);
  EXPECT_EQ(config.space_mode, SpaceMode::Original);
  EXPECT_EQ(config.model, ModelFamily::Mlp);
  EXPECT_EQ(config.space_or_default(), "mlp");
  EXPECT_EQ(config.folds, 4);
  EXPECT_EQ(config.seed, 9u);
  EXPECT_EQ(ExperimentConfig{}.space_or_default(), "xgb");
}

TEST(ExperimentConfig, ErrorsNameTheLine) {
  EXPECT_NE(config_error("budget = 5\noptimizer = anneal\n").find("exp.cfg:2:"), std::string::npos);
  EXPECT_NE(config_error("\n\nbudget = five\n").find("exp.cfg:3:"), std::string::npos);
  EXPECT_NE(config_error("colour = blue\n").find("exp.cfg:1:"), std::string::npos);
  EXPECT_NE(config_error("just words\n").find("exp.cfg:1:"), std::string::npos);
  EXPECT_FALSE(config_error("budget = -3\n").empty());
}

TEST(ExperimentConfig, ValidationIsSeparateFromParsing) {
  const auto bo = parse_experiment_config("optimizer = bo\nbudget = 5\ninit_budget = 5\n", "exp.cfg");
  EXPECT_THROW(bo.validate(), ConfigError);
  const auto dataset = parse_experiment_config("objective = dataset\n", "exp.cfg");
  EXPECT_THROW(dataset.validate(), ConfigError);
}

TEST(RunExperiment, WritesLedgerAndSummary) {
  const auto dir = hpo::testing::scratch_dir("experiment-ledger");
  const auto result = run_experiment(synthetic_config(Optimizer::Bayes, dir / "out", 1));
  ASSERT_TRUE(fs::exists(dir / "out" / "trials.csv"));
  ASSERT_TRUE(fs::exists(dir / "out" / "timings.csv"));
  const auto ledger = hpo::testing::read_file(dir / "out" / "trials.csv");
  EXPECT_EQ(ledger.rfind("trial_index,phase,status,objective,is_best,booster,", 0), 0u);
  EXPECT_EQ(std::count(ledger.begin(), ledger.end(), '\n'), 13);
  const auto summary = nlohmann::json::parse(hpo::testing::read_file(dir / "out" / "summary.json"));
  EXPECT_EQ(summary["trials"], 12);
  EXPECT_EQ(summary["trials_by_phase"]["bo-init"], 4);
  EXPECT_EQ(summary["best"]["trial_index"], result.run.best().index);
  EXPECT_LE(summary["best"]["optimum_gap"].get<double>(), 1.0);
  EXPECT_GE(summary["best"]["optimum_gap"].get<double>(), 0.0);
}

TEST(RunExperiment, LedgerIsIdenticalAcrossWorkerCounts) {
  const auto dir = hpo::testing::scratch_dir("experiment-workers");
  for (auto optimizer : {Optimizer::Grid, Optimizer::Random, Optimizer::Bayes}) {
    std::string reference;
    for (std::size_t workers : {1u, 4u, 8u}) {
      const auto out = dir / (std::string(to_string(optimizer)) + std::to_string(workers));
      auto config = synthetic_config(optimizer, out, workers);
      if (optimizer == Optimizer::Grid) {
        config.space = "rbf";
        config.budget = 9;
      }
      run_experiment(config);
      const auto ledger = hpo::testing::read_file(out / "trials.csv");
      const auto summary = hpo::testing::read_file(out / "summary.json");
      if (reference.empty()) reference = ledger + summary;
      EXPECT_EQ(ledger + summary, reference) << to_string(optimizer) << " workers " << workers;
    }
  }
}

TEST(RunExperiment, GridBudgetPicksLargestFittingResolution) {
  const auto dir = hpo::testing::scratch_dir("experiment-grid");
  auto config = synthetic_config(Optimizer::Grid, dir / "out", 1);
  config.space = "rbf";
  config.budget = 20;  // 4 x 4 fits, 5 x 5 does not
  const auto result = run_experiment(config);
  EXPECT_EQ(result.run.trials.size(), 16u);
  config.grid_points = 2;
  EXPECT_EQ(run_experiment(config).run.trials.size(), 4u);
}

TEST(RunExperiment, RbfGridIsLogSpaced) {
  const auto dir = hpo::testing::scratch_dir("experiment-grid-log");
  auto config = synthetic_config(Optimizer::Grid, dir / "out", 1);
  config.space = "rbf";
  config.budget = 9;
  const auto result = run_experiment(config);
  std::set<double> c, gamma;
  for (const auto& t : result.run.trials) {
    c.insert(t.config.number("C"));
    gamma.insert(t.config.number("gamma"));
  }
  ASSERT_EQ(c.size(), 3u);
  ASSERT_EQ(gamma.size(), 3u);
  EXPECT_NEAR(*std::next(c.begin()), std::sqrt(1e-3 * 2.15), 1e-12);
  EXPECT_NEAR(*std::next(gamma.begin()), std::sqrt(1.12e-4 * 10.0), 1e-12);
}

TEST(RunExperiment, DatasetObjectiveWritesPredictions) {
  const auto dir = hpo::testing::scratch_dir("experiment-dataset");
  write_dataset(dir / "train.csv", tiny_cohort(1));
  write_dataset(dir / "valid.csv", tiny_cohort(2));
  ExperimentConfig config;
  config.objective = ObjectiveKind::Dataset;
  config.dataset = dir / "train.csv";
  config.validation = dir / "valid.csv";
  config.model = ModelFamily::Rbf;
  config.metric = Metric::Auc;
  config.folds = 3;
  config.budget = 3;
  config.seed = 4;
  config.output_dir = dir / "out";
  const auto result = run_experiment(config);
  ASSERT_TRUE(result.validation_score.has_value());
  const auto pooled = read_predictions(dir / "out" / "predictions.csv");
  EXPECT_NO_THROW(pooled.validate());
  EXPECT_NEAR(evaluate_metric(Metric::Auc, pooled.probabilities, pooled.labels), result.run.best().objective, 1e-12);
  EXPECT_NO_THROW(read_predictions(dir / "out" / "validation_predictions.csv").validate());
}

TEST(ComparePredictionFiles, ReportsInterval) {
  const auto dir = hpo::testing::scratch_dir("experiment-compare");
  PredictionSet p;
  p.probabilities.resize(6, 2);
  p.probabilities << 0.9, 0.1, 0.8, 0.2, 0.6, 0.4, 0.3, 0.7, 0.45, 0.55, 0.2, 0.8;
  p.labels = {0, 0, 1, 1, 0, 1};
  p.sample_ids = {"a", "b", "c", "d", "e", "f"};
  write_predictions(dir / "a.csv", p);
  write_predictions(dir / "b.csv", p);
  const auto report =
      nlohmann::json::parse(compare_prediction_files(dir / "a.csv", dir / "b.csv", Metric::Auc, {.resamples = 200}));
  EXPECT_EQ(report["observed_diff"], 0.0);
  EXPECT_EQ(report["ci_lo"], 0.0);
  EXPECT_EQ(report["ci_hi"], 0.0);
  EXPECT_EQ(report["resamples"], 200);
}

TEST(Cli, ExitCodes) {
  const auto dir = hpo::testing::scratch_dir("experiment-cli");
  const auto log = dir / "log.txt";
  EXPECT_EQ(run_cli("spaces", log), kExitOk);
  EXPECT_NE(hpo::testing::read_file(log).find("xgb"), std::string::npos);
  EXPECT_EQ(run_cli("run --optimizer random --budget 3 --output_dir " + (dir / "ok").string(), log), kExitOk);

  hpo::testing::write_file(dir / "bad.cfg", "budget = 3\noptimizer = anneal\n");
  EXPECT_EQ(run_cli("run -c " + (dir / "bad.cfg").string(), log), kExitConfig);
  EXPECT_NE(hpo::testing::read_file(log).find("bad.cfg:2:"), std::string::npos) << hpo::testing::read_file(log);
  EXPECT_EQ(run_cli("run --budget 0", log), kExitConfig);

  hpo::testing::write_file(dir / "broken.csv", "sample_id,group_id,label,f0\ns1,g,0,oops\n");
  EXPECT_EQ(run_cli("run --objective dataset --dataset " + (dir / "broken.csv").string() + " --output_dir " +
                        (dir / "x").string(),
                    log),
            kExitData);

  // Two single-sample groups: every fold trains on one sample, so every trial fails.
  hpo::testing::write_file(dir / "tiny.csv", "sample_id,group_id,label,f0\ns1,g1,0,0.1\ns2,g2,1,0.9\n");
  EXPECT_EQ(run_cli("run --objective dataset --folds 2 --budget 2 --dataset " + (dir / "tiny.csv").string() +
                        " --output_dir " + (dir / "y").string(),
                    log),
            kExitNoSuccess)
      << hpo::testing::read_file(log);
}

TEST(Cli, GenDataAndCompare) {
  const auto dir = hpo::testing::scratch_dir("experiment-cli-data");
  const auto log = dir / "log.txt";
  ASSERT_EQ(run_cli("gen-data -o " + (dir / "d.csv").string() + " --studies 6 --seed 3 --holdout-studies 2 --holdout-out " +
                        (dir / "h.csv").string(),
                    log),
            kExitOk)
      << hpo::testing::read_file(log);
  const auto train = read_dataset(dir / "d.csv");
  const auto held_out = read_dataset(dir / "h.csv");
  EXPECT_EQ(train.distinct_groups().size(), 6u);
  EXPECT_EQ(held_out.distinct_groups().size(), 2u);
  EXPECT_EQ(train.features.cols(), 41);

  PredictionSet p;
  p.probabilities.resize(4, 2);
  p.probabilities << 0.9, 0.1, 0.2, 0.8, 0.6, 0.4, 0.3, 0.7;
  p.labels = {0, 1, 0, 1};
  p.sample_ids = {"a", "b", "c", "d"};
  write_predictions(dir / "a.csv", p);
  write_predictions(dir / "b.csv", p);
  EXPECT_EQ(run_cli("compare " + (dir / "a.csv").string() + " " + (dir / "b.csv").string() +
                        " --resamples 100 --out " + (dir / "r.json").string(),
                    log),
            kExitOk);
  EXPECT_TRUE(fs::exists(dir / "r.json"));
  EXPECT_EQ(run_cli("compare " + (dir / "a.csv").string() + " " + (dir / "missing.csv").string(), log), kExitData);
}
