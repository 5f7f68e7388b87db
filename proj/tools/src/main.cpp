// hpo: experiment runner for grid, random and Bayesian hyperparameter search.

#include <CLI11.hpp>

#include "hpo/cohort.hpp"
#include "hpo/dataset.hpp"
#include "hpo/error.hpp"
#include "hpo/experiment.hpp"
#include "hpo/hyperspace.hpp"
#include "hpo/space_io.hpp"
#include "hpo/worker_pool.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

// Options that override fields of the config file when given.
struct RunFlags {
  std::string config_path;
  std::map<std::string, std::string> overrides;
};

void add_override(CLI::App& cmd, RunFlags& flags, const std::string& key, const std::string& help) {
  cmd.add_option_function<std::string>(
      "--" + key, [&flags, key](const std::string& v) { flags.overrides[key] = v; }, help);
}

int run_command(const RunFlags& flags) {
  hpo::ExperimentConfig config =
      flags.config_path.empty() ? hpo::ExperimentConfig{} : hpo::load_experiment_config(flags.config_path);
  for (const auto& [key, value] : flags.overrides) {
    try {
      config.set(key, value);
    } catch (const hpo::ConfigError& e) {
      throw hpo::ConfigError("--" + key + ": " + e.what());
    }
  }
  const auto result = hpo::run_experiment(config, &std::cerr);
  std::cout << (config.output_dir / "summary.json").string() << '\n';
  if (result.validation_score)
    std::cerr << "validation " << hpo::to_string(config.metric) << " " << *result.validation_score << '\n';
  return hpo::kExitOk;
}

int spaces_command(const std::string& name, bool as_json) {
  const auto names = name.empty() ? hpo::presets::names() : std::vector<std::string>{name};
  for (const auto& n : names) {
    const auto space = hpo::presets::by_name(n);
    if (as_json) {
      std::cout << hpo::dump_space(space) << '\n';
      continue;
    }
    std::cout << n << " (" << space.size() << " dimensions)\n";
    for (const auto& dim : space.dims()) {
      std::cout << "  " << dim.name() << ": ";
      std::visit(
          [&](const auto& kind) {
            using K = std::decay_t<decltype(kind)>;
            if constexpr (std::is_same_v<K, hpo::Continuous>) std::cout << "continuous [" << kind.lo << ", " << kind.hi << "]";
            else if constexpr (std::is_same_v<K, hpo::LogContinuous>)
              std::cout << "log-continuous [" << kind.log_lo << ", " << kind.log_hi << "] (natural log)";
            else if constexpr (std::is_same_v<K, hpo::DiscreteOrdinal>)
              std::cout << "discrete, " << kind.values.size() << " values [" << kind.values.front() << " .. "
                        << kind.values.back() << "]";
            else {
              std::cout << "categorical {";
              for (std::size_t i = 0; i < kind.labels.size(); ++i) std::cout << (i ? ", " : "") << kind.labels[i];
              std::cout << "}";
            }
          },
          dim.kind());
      if (space.rounds_to_int(dim.name())) std::cout << " rounded to integer";
      std::cout << '\n';
    }
  }
  return hpo::kExitOk;
}

struct GenFlags {
  std::string out;
  std::string holdout_out;
  std::size_t holdout_studies = 0;
  std::string task = "bvn";
  hpo::CohortOptions options;
};

int gen_data_command(GenFlags flags) {
  flags.options.task = hpo::parse_cohort_task(flags.task);
  flags.options.first_study = 0;
  const auto train = hpo::generate_synthetic_cohort(flags.options);
  hpo::write_dataset(flags.out, train);
  std::cerr << "wrote " << train.size() << " samples from " << flags.options.studies << " studies to " << flags.out
            << '\n';
  if (flags.holdout_studies > 0) {
    if (flags.holdout_out.empty()) throw hpo::ConfigError("--holdout-studies needs --holdout-out");
    hpo::CohortOptions held = flags.options;
    held.studies = flags.holdout_studies;
    held.first_study = flags.options.studies;
    const auto validation = hpo::generate_synthetic_cohort(held);
    hpo::write_dataset(flags.holdout_out, validation);
    std::cerr << "wrote " << validation.size() << " held-out samples to " << flags.holdout_out << '\n';
  }
  return hpo::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hyperparameter search runner: grid, random and Bayesian optimization"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "Run a search experiment and write its ledger");
  run->add_option("-c,--config", run_flags.config_path, "Experiment config file (key = value lines)");
  for (const auto& [key, help] : std::vector<std::pair<std::string, std::string>>{
           {"space", "Preset name (rbf, xgb, mlp) or space JSON file"},
           {"optimizer", "grid | random | bo"},
           {"budget", "Total number of evaluations"},
           {"init_budget", "Uniform initial evaluations for bo"},
           {"acquisition", "ei | ucb"},
           {"xi", "Expected-improvement margin"},
           {"kappa", "Upper-confidence-bound width"},
           {"ard", "Per-dimension lengthscales (true|false)"},
           {"space_mode", "original | transformed"},
           {"grid_points", "Points per continuous dimension for grid search"},
           {"objective", "synthetic | dataset"},
           {"dataset", "Dataset file for the dataset objective"},
           {"validation", "Held-out dataset scored with the best configuration"},
           {"model", "rbf | mlp"},
           {"metric", "auc | mauc | ap"},
           {"folds", "Grouped cross-validation folds"},
           {"seed", "Master seed"},
           {"workers", "Worker threads (default: HPO_WORKERS or hardware threads)"},
           {"output_dir", "Directory for trials.csv, summary.json and predictions"}})
    add_override(*run, run_flags, key, help);

  std::string compare_a, compare_b, compare_metric = "auc", compare_out;
  hpo::BootstrapOptions compare_options;
  auto* compare = app.add_subcommand("compare", "Paired bootstrap CI for the metric difference of two prediction files");
  compare->add_option("a", compare_a, "Prediction file A")->required();
  compare->add_option("b", compare_b, "Prediction file B")->required();
  compare->add_option("--metric", compare_metric, "auc | mauc | ap")->capture_default_str();
  compare->add_option("--resamples", compare_options.resamples, "Bootstrap resamples")->capture_default_str();
  compare->add_option("--seed", compare_options.seed, "Bootstrap seed")->capture_default_str();
  compare->add_option("--workers", compare_options.workers, "Worker threads");
  compare->add_option("--out", compare_out, "Also write the report to this file");

  std::string space_name;
  bool space_json = false;
  auto* spaces = app.add_subcommand("spaces", "List the preset search spaces");
  spaces->add_option("name", space_name, "Show only this preset");
  spaces->add_flag("--json", space_json, "Print space documents");

  GenFlags gen;
  auto* gen_data = app.add_subcommand("gen-data", "Write a synthetic multi-study expression cohort");
  gen_data->add_option("-o,--out", gen.out, "Output dataset file")->required();
  gen_data->add_option("--studies", gen.options.studies, "Number of studies")->capture_default_str();
  gen_data->add_option("--min-samples", gen.options.min_samples, "Smallest study size")->capture_default_str();
  gen_data->add_option("--max-samples", gen.options.max_samples, "Largest study size")->capture_default_str();
  gen_data->add_option("--task", gen.task, "bvn | mortality")->capture_default_str();
  gen_data->add_option("--batch-scale", gen.options.batch_effect_scale, "Per-study shift scale")->capture_default_str();
  gen_data->add_option("--separation", gen.options.class_separation, "Class effect scale")->capture_default_str();
  gen_data->add_option("--event-rate", gen.options.event_rate, "Mortality rate")->capture_default_str();
  gen_data->add_option("--seed", gen.options.seed, "Generator seed")->capture_default_str();
  gen_data->add_option("--holdout-studies", gen.holdout_studies, "Extra studies written to --holdout-out");
  gen_data->add_option("--holdout-out", gen.holdout_out, "Held-out dataset file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? hpo::kExitOk : hpo::kExitConfig;
  }

  try {
    if (*run) return run_command(run_flags);
    if (*compare) {
      if (compare_options.workers == 0) compare_options.workers = hpo::default_workers();
      const auto report =
          hpo::compare_prediction_files(compare_a, compare_b, hpo::parse_metric(compare_metric), compare_options);
      std::cout << report;
      if (!compare_out.empty()) {
        std::ofstream out(compare_out, std::ios::binary | std::ios::trunc);
        if (!out) throw hpo::DataError("cannot write '" + compare_out + "'");
        out << report;
      }
      return hpo::kExitOk;
    }
    if (*spaces) return spaces_command(space_name, space_json);
    if (*gen_data) return gen_data_command(gen);
  } catch (const hpo::NoSuccessfulTrials& e) {
    std::cerr << "error: " << e.what() << '\n';
    return hpo::kExitNoSuccess;
  } catch (const hpo::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return hpo::kExitData;
  } catch (const hpo::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return hpo::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return hpo::kExitOk;
}
