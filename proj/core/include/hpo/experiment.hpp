#pragma once

#include "hpo/acquisition.hpp"
#include "hpo/bootstrap.hpp"
#include "hpo/error.hpp"
#include "hpo/hyperspace.hpp"
#include "hpo/metrics.hpp"
#include "hpo/models.hpp"
#include "hpo/search.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

namespace hpo {

/// Invalid experiment configuration. The message carries "origin:line: "
/// when the offending value came from a file.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

enum class ObjectiveKind { Synthetic, Dataset };

struct ExperimentConfig {
  /// Preset name or space file path. Empty selects the model family's
  /// preset for dataset objectives and xgb otherwise.
  std::string space;
  Optimizer optimizer = Optimizer::Random;
  std::size_t budget = 10;
  std::size_t init_budget = 5;
  AcquisitionSpec acquisition;
  bool ard = true;
  SpaceMode space_mode = SpaceMode::Transformed;
  /// Points per continuous dimension for grid search; chosen from the budget
  /// when unset.
  std::optional<std::size_t> grid_points;

  ObjectiveKind objective = ObjectiveKind::Synthetic;
  std::filesystem::path dataset;
  std::filesystem::path validation;  // optional held-out studies
  ModelFamily model = ModelFamily::Rbf;
  Metric metric = Metric::Auc;
  int folds = 5;

  std::uint64_t seed = 0;
  std::size_t workers = 0;  // 0: default_workers()
  std::filesystem::path output_dir = "hpo-out";

  /// Sets one field from its textual form. Keys: space, optimizer, budget,
  /// init_budget, acquisition, xi, kappa, ard, space_mode, grid_points,
  /// objective, dataset, validation, model, metric, folds, seed, workers,
  /// output_dir. Throws ConfigError.
  void set(std::string_view key, std::string_view value);

  /// Cross-field checks. Throws ConfigError.
  void validate() const;

  std::string space_or_default() const;
};

/// Parses "key = value" lines ('#' starts a comment). Errors name the origin
/// and line.
ExperimentConfig parse_experiment_config(std::string_view text, const std::string& origin = "<config>");
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct ExperimentResult {
  RunRecord run;
  HyperSpace space;
  std::optional<double> validation_score;
};

/// Runs the configured search and writes into output_dir:
///   trials.csv      one row per trial (byte-identical for a fixed config)
///   summary.json    settings, best trial, flags
///   timings.csv     per-trial wall time
///   predictions.csv pooled cross-validated predictions of the best trial
///                   (dataset objective only)
///   validation_predictions.csv  best configuration refit on all data and
///                   applied to the validation set (when given)
ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

/// Trial ledger text: trial_index,phase,status,objective,is_best, then one
/// column per dimension with native values.
std::string format_trials(const HyperSpace& space, const RunRecord& run);

/// Bootstrap comparison of two prediction files, as a JSON document.
std::string compare_prediction_files(const std::filesystem::path& a, const std::filesystem::path& b, Metric metric,
                                     const BootstrapOptions& options);

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitData = 3, kExitNoSuccess = 4 };

}  // namespace hpo
