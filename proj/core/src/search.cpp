#include "hpo/search.hpp"

#include "hpo/error.hpp"
#include "hpo/rng.hpp"
#include "hpo/worker_pool.hpp"

#include <chrono>
#include <cmath>
#include <exception>

namespace hpo {
namespace {

// Stream identifiers under the run seed.
constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kFitStream = 1ULL << 32;
constexpr std::uint64_t kProposalStream = 2ULL << 32;
constexpr std::uint64_t kCollisionStream = 3ULL << 32;

TrialRecord evaluate(const Objective& objective, Configuration config, std::size_t index, Phase phase) {
  TrialRecord trial;
  trial.index = index;
  trial.phase = phase;
  const auto start = std::chrono::steady_clock::now();
  try {
    trial.objective = objective(config);
    if (!std::isfinite(trial.objective)) {
      trial.failed = true;
      trial.failure = "non-finite objective";
    }
  } catch (const std::exception& e) {
    trial.failed = true;
    trial.failure = e.what();
  } catch (...) {
    trial.failed = true;
    trial.failure = "unknown error";
  }
  if (trial.failed) trial.objective = std::numeric_limits<double>::quiet_NaN();
  trial.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  trial.config = std::move(config);
  return trial;
}

std::vector<TrialRecord> evaluate_batch(const Objective& objective, std::vector<Configuration> configs,
                                        std::size_t first_index, Phase phase, std::size_t workers) {
  std::vector<TrialRecord> trials(configs.size());
  parallel_for(configs.size(), workers, [&](std::size_t i) {
    trials[i] = evaluate(objective, std::move(configs[i]), first_index + i, phase);
  });
  return trials;
}

void note_failures(RunRecord& run) {
  std::size_t failed = 0;
  for (const auto& t : run.trials) failed += t.failed ? 1 : 0;
  if (failed > 0) run.flags.push_back(std::to_string(failed) + " trial(s) failed and were excluded");
}

bool seen_before(const std::vector<TrialRecord>& trials, const Configuration& config) {
  for (const auto& t : trials)
    if (t.config == config) return true;
  return false;
}

// Moves `config` off a collision: 1% uniform noise on every continuous
// coordinate, or one rank step on a random discrete/categorical dimension
// when the space has no continuous dimension.
Configuration perturb(const HyperSpace& space, SpaceMode mode, const Configuration& config, Rng& rng) {
  Eigen::VectorXd x = space.encode(config, mode);
  bool moved = false;
  for (std::size_t h = 0; h < space.size(); ++h) {
    if (!space.dim(h).is_continuous()) continue;
    const auto [lo, hi] = space.encoded_bounds(h, mode);
    const auto i = static_cast<Eigen::Index>(h);
    x(i) = std::clamp(x(i) + rng.uniform(-0.01, 0.01) * (hi - lo), lo, hi);
    moved = true;
  }
  if (!moved) {
    std::vector<std::size_t> movable;
    for (std::size_t h = 0; h < space.size(); ++h)
      if (space.dim(h).cardinality() > 1) movable.push_back(h);
    if (!movable.empty()) {
      const std::size_t h = movable[rng.index(movable.size())];
      const auto i = static_cast<Eigen::Index>(h);
      const int dir = rng.index(2) == 0 ? -1 : 1;
      double next = space.adjacent_rank(h, x(i), dir, mode);
      if (next == x(i)) next = space.adjacent_rank(h, x(i), -dir, mode);
      x(i) = next;
    }
  }
  return space.decode(x, mode);
}

}  // namespace

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::Grid: return "grid";
    case Phase::Random: return "random";
    case Phase::BoInit: return "bo-init";
    case Phase::BoProposed: return "bo-proposed";
  }
  return "unknown";
}

std::string_view to_string(Optimizer optimizer) {
  switch (optimizer) {
    case Optimizer::Grid: return "grid";
    case Optimizer::Random: return "random";
    case Optimizer::Bayes: return "bo";
  }
  return "unknown";
}

Optimizer parse_optimizer(std::string_view text) {
  if (text == "grid") return Optimizer::Grid;
  if (text == "random") return Optimizer::Random;
  if (text == "bo") return Optimizer::Bayes;
  throw InvalidArgument("unknown optimizer '" + std::string(text) + "' (expected grid|random|bo)");
}

std::size_t select_best(const std::vector<TrialRecord>& trials) {
  std::size_t best = trials.size();
  for (std::size_t i = 0; i < trials.size(); ++i) {
    if (trials[i].failed) continue;
    if (best == trials.size() || trials[i].objective > trials[best].objective) best = i;
  }
  if (best == trials.size()) throw NoSuccessfulTrials();
  return best;
}

RunRecord run_grid_search(const HyperSpace& space, const Objective& objective,
                          const std::vector<Configuration>& configs, std::size_t workers) {
  if (configs.empty()) throw InvalidArgument("grid search needs at least one configuration");
  for (const auto& c : configs) space.validate(c);
  RunRecord run;
  run.settings.optimizer = Optimizer::Grid;
  run.settings.budget = configs.size();
  run.trials = evaluate_batch(objective, configs, 0, Phase::Grid, workers);
  note_failures(run);
  run.best_index = select_best(run.trials);
  return run;
}

RunRecord run_random_search(const HyperSpace& space, const Objective& objective, std::size_t budget,
                            std::uint64_t seed, std::size_t workers) {
  if (budget == 0) throw InvalidArgument("random search needs budget >= 1");
  RunRecord run;
  run.settings.optimizer = Optimizer::Random;
  run.settings.budget = budget;
  run.settings.seed = seed;
  run.trials = evaluate_batch(objective, sample_uniform(space, seed, budget), 0, Phase::Random, workers);
  note_failures(run);
  run.best_index = select_best(run.trials);
  return run;
}

RunRecord run_bayes_opt(const HyperSpace& space, const Objective& objective, const BayesOptSettings& settings) {
  if (settings.init_budget == 0) throw InvalidArgument("init_budget must be >= 1");
  if (settings.eval_budget <= settings.init_budget)
    throw InvalidArgument("eval_budget (" + std::to_string(settings.eval_budget) + ") must exceed init_budget (" +
                          std::to_string(settings.init_budget) + ")");
  AcquisitionSpec acquisition = settings.acquisition;
  acquisition.maximize_objective = true;
  acquisition.validate();

  RunRecord run;
  run.settings = {Optimizer::Bayes, settings.eval_budget, settings.init_budget, acquisition,
                  settings.ard,     settings.mode,        settings.seed};

  const std::uint64_t seed = settings.seed;
  run.trials = evaluate_batch(objective, sample_uniform(space, derive_seed(seed, kInitStream), settings.init_budget),
                              0, Phase::BoInit, settings.workers);

  const auto dims = static_cast<Eigen::Index>(space.size());
  for (std::size_t t = settings.init_budget; t < settings.eval_budget; ++t) {
    std::vector<const TrialRecord*> usable;
    for (const auto& trial : run.trials)
      if (!trial.failed) usable.push_back(&trial);

    Configuration next;
    bool have_proposal = false;
    if (!usable.empty()) {
      Eigen::MatrixXd inputs(static_cast<Eigen::Index>(usable.size()), dims);
      Eigen::VectorXd targets(static_cast<Eigen::Index>(usable.size()));
      for (std::size_t i = 0; i < usable.size(); ++i) {
        inputs.row(static_cast<Eigen::Index>(i)) = space.encode(usable[i]->config, settings.mode).transpose();
        targets(static_cast<Eigen::Index>(i)) = usable[i]->objective;
      }
      try {
        FitOptions fit = settings.fit;
        fit.ard = settings.ard;
        fit.seed = derive_seed(seed, kFitStream + t);
        const GaussianProcess gp = GaussianProcess::fit(std::move(inputs), std::move(targets), fit);
        if (gp.used_fallback())
          run.flags.push_back("trial " + std::to_string(t) + ": likelihood fit failed, heuristic kernel parameters used");
        const Proposal proposal =
            propose_next(gp, space, settings.mode, acquisition, derive_seed(seed, kProposalStream + t), settings.proposal);
        if (proposal.degenerate)
          run.flags.push_back("trial " + std::to_string(t) + ": flat acquisition surface, proposal is effectively random");
        next = proposal.config;
        have_proposal = true;
      } catch (const SurrogateSingular&) {
        run.flags.push_back("trial " + std::to_string(t) + ": surrogate singular, uniform random proposal");
      }
    } else {
      run.flags.push_back("trial " + std::to_string(t) + ": no successful trials yet, uniform random proposal");
    }

    Rng collision_rng(derive_seed(seed, kCollisionStream + t));
    if (!have_proposal) next = sample_uniform(space, collision_rng.next_u64(), 1).front();
    std::size_t collisions = 0;
    while (seen_before(run.trials, next)) {
      if (++collisions > settings.max_collisions) {
        next = sample_uniform(space, collision_rng.next_u64(), 1).front();
        run.flags.push_back("trial " + std::to_string(t) + ": repeated collisions, uniform random proposal");
        break;
      }
      next = perturb(space, settings.mode, next, collision_rng);
    }
    run.trials.push_back(evaluate(objective, std::move(next), t, Phase::BoProposed));
  }

  note_failures(run);
  run.best_index = select_best(run.trials);
  return run;
}

}  // namespace hpo
