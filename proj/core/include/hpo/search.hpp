#pragma once

#include "hpo/acquisition.hpp"
#include "hpo/gp.hpp"
#include "hpo/hyperspace.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace hpo {

/// Maps a configuration to a score, higher is better. Throwing or returning a
/// non-finite value marks the trial as failed.
using Objective = std::function<double(const Configuration&)>;

enum class Phase { Grid, Random, BoInit, BoProposed };

std::string_view to_string(Phase phase);

struct TrialRecord {
  std::size_t index = 0;
  Configuration config;
  double objective = std::numeric_limits<double>::quiet_NaN();
  bool failed = false;
  std::string failure;
  Phase phase = Phase::Random;
  double wall_time_ms = 0.0;
};

enum class Optimizer { Grid, Random, Bayes };

std::string_view to_string(Optimizer optimizer);
Optimizer parse_optimizer(std::string_view text);

/// Settings snapshot stored with every run.
struct RunSettings {
  Optimizer optimizer = Optimizer::Random;
  std::size_t budget = 0;
  std::size_t init_budget = 0;
  AcquisitionSpec acquisition;
  bool ard = false;
  SpaceMode mode = SpaceMode::Transformed;
  std::uint64_t seed = 0;
};

struct RunRecord {
  std::vector<TrialRecord> trials;
  std::size_t best_index = 0;
  RunSettings settings;
  std::vector<std::string> flags;

  const TrialRecord& best() const { return trials.at(best_index); }
};

/// Index of the highest successful objective, lowest index on ties. Throws
/// NoSuccessfulTrials when every trial failed.
std::size_t select_best(const std::vector<TrialRecord>& trials);

/// Evaluates every configuration once on up to `workers` threads. Trial order
/// is input order regardless of the worker count.
RunRecord run_grid_search(const HyperSpace& space, const Objective& objective,
                          const std::vector<Configuration>& configs, std::size_t workers = 1);

/// Evaluates sample_uniform(space, seed, budget).
RunRecord run_random_search(const HyperSpace& space, const Objective& objective, std::size_t budget,
                            std::uint64_t seed, std::size_t workers = 1);

struct BayesOptSettings {
  std::size_t eval_budget = 10;
  std::size_t init_budget = 5;
  /// Drivers maximize; maximize_objective is forced to true.
  AcquisitionSpec acquisition;
  bool ard = false;
  SpaceMode mode = SpaceMode::Transformed;
  std::uint64_t seed = 0;
  /// Threads for the initial uniform batch. The guided phase is sequential.
  std::size_t workers = 1;
  FitOptions fit;
  ProposalOptions proposal;
  /// Proposals colliding with an earlier trial are perturbed up to this many
  /// times before a uniform random configuration is used instead.
  std::size_t max_collisions = 5;
};

/// Sequential model-based optimization: init_budget uniform configurations,
/// then until eval_budget trials exist: fit the GP to every successful trial
/// (encoded per `mode`), propose the acquisition maximizer, evaluate it.
RunRecord run_bayes_opt(const HyperSpace& space, const Objective& objective, const BayesOptSettings& settings);

}  // namespace hpo
