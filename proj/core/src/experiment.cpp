#include "hpo/experiment.hpp"

#include "hpo/cross_validation.hpp"
#include "hpo/dataset.hpp"
#include "hpo/error.hpp"
#include "hpo/rng.hpp"
#include "hpo/space_io.hpp"
#include "hpo/synthetic.hpp"
#include "hpo/worker_pool.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace hpo {
namespace {

using nlohmann::ordered_json;

// Stream identifiers under the experiment seed.
constexpr std::uint64_t kFoldStream = 0xF01D;
constexpr std::uint64_t kTrainStream = 0x7EA1;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <class T>
T parse_integer(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError(std::string(key) + ": '" + std::string(value) + "' is not a valid integer");
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError(std::string(key) + ": '" + std::string(value) + "' is not a number");
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "on" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "off" || value == "0" || value == "no") return false;
  throw ConfigError(std::string(key) + ": expected true or false, got '" + std::string(value) + "'");
}

// Runs a parser, rethrowing library argument errors as ConfigError.
template <class F>
auto as_config(std::string_view key, F&& parse) {
  try {
    return parse();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

std::string value_text(const Value& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  return format_double(std::get<double>(v));
}

ordered_json config_json(const HyperSpace& space, const Configuration& config) {
  ordered_json out = ordered_json::object();
  for (const auto& dim : space.dims()) {
    const auto& v = config.at(dim.name());
    if (const auto* s = std::get_if<std::string>(&v)) out[dim.name()] = *s;
    else out[dim.name()] = std::get<double>(v);
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
}

// Largest points-per-dimension whose grid fits the budget. Continuous
// dimensions with positive bounds spanning two decades or more are spaced
// logarithmically.
std::vector<Configuration> budget_grid(const HyperSpace& space, const ExperimentConfig& config) {
  std::map<std::string, std::size_t> points;
  std::map<std::string, GridScale> scale;
  for (const auto& dim : space.dims())
    if (const auto* c = std::get_if<Continuous>(&dim.kind()); c && c->lo > 0.0 && c->hi >= 100.0 * c->lo)
      scale[dim.name()] = GridScale::Log;
  auto grid_with = [&](std::size_t p) {
    for (const auto& dim : space.dims())
      if (dim.is_continuous()) points[dim.name()] = p;
    return generate_grid(space, points, scale);
  };
  if (config.grid_points) return grid_with(*config.grid_points);
  auto grid = grid_with(1);
  if (grid.size() > config.budget)
    throw ConfigError("budget " + std::to_string(config.budget) + " is smaller than the coarsest grid (" +
                      std::to_string(grid.size()) + " points)");
  const bool has_continuous =
      std::any_of(space.dims().begin(), space.dims().end(), [](const Dimension& d) { return d.is_continuous(); });
  if (!has_continuous) return grid;
  for (std::size_t p = 2; p <= config.budget; ++p) {
    auto next = grid_with(p);
    if (next.size() > config.budget) break;
    grid = std::move(next);
  }
  return grid;
}

ordered_json settings_json(const ExperimentConfig& config) {
  ordered_json s;
  s["space"] = config.space_or_default();
  s["optimizer"] = std::string(to_string(config.optimizer));
  s["budget"] = config.budget;
  if (config.optimizer == Optimizer::Bayes) {
    s["init_budget"] = config.init_budget;
    s["acquisition"] = std::string(to_string(config.acquisition.kind));
    s["xi"] = config.acquisition.xi;
    s["kappa"] = config.acquisition.kappa;
    s["ard"] = config.ard;
    s["space_mode"] = std::string(to_string(config.space_mode));
  }
  if (config.optimizer == Optimizer::Grid && config.grid_points) s["grid_points"] = *config.grid_points;
  if (config.objective == ObjectiveKind::Dataset) {
    s["objective"] = "dataset";
    s["dataset"] = config.dataset.generic_string();
    s["model"] = std::string(to_string(config.model));
    s["metric"] = std::string(to_string(config.metric));
    s["folds"] = config.folds;
    if (!config.validation.empty()) s["validation"] = config.validation.generic_string();
  } else {
    s["objective"] = "synthetic";
  }
  s["seed"] = config.seed;
  return s;
}

}  // namespace

void ExperimentConfig::set(std::string_view key, std::string_view raw) {
  const std::string value = trim(raw);
  if (value.empty()) throw ConfigError(std::string(key) + ": empty value");
  if (key == "space") space = value;
  else if (key == "optimizer") optimizer = as_config(key, [&] { return parse_optimizer(value); });
  else if (key == "budget") budget = parse_integer<std::size_t>(key, value);
  else if (key == "init_budget") init_budget = parse_integer<std::size_t>(key, value);
  else if (key == "acquisition") acquisition.kind = as_config(key, [&] { return parse_acquisition(value); });
  else if (key == "xi") acquisition.xi = parse_real(key, value);
  else if (key == "kappa") acquisition.kappa = parse_real(key, value);
  else if (key == "ard") ard = parse_bool(key, value);
  else if (key == "space_mode") space_mode = as_config(key, [&] { return parse_space_mode(value); });
  else if (key == "grid_points") grid_points = parse_integer<std::size_t>(key, value);
  else if (key == "objective") {
    if (value == "synthetic") objective = ObjectiveKind::Synthetic;
    else if (value == "dataset") objective = ObjectiveKind::Dataset;
    else throw ConfigError("objective: expected synthetic or dataset, got '" + value + "'");
  } else if (key == "dataset") dataset = value;
  else if (key == "validation") validation = value;
  else if (key == "model") model = as_config(key, [&] { return parse_model_family(value); });
  else if (key == "metric") metric = as_config(key, [&] { return parse_metric(value); });
  else if (key == "folds") folds = parse_integer<int>(key, value);
  else if (key == "seed") seed = parse_integer<std::uint64_t>(key, value);
  else if (key == "workers") workers = parse_integer<std::size_t>(key, value);
  else if (key == "output_dir") output_dir = value;
  else throw ConfigError("unknown key '" + std::string(key) + "'");
}

std::string ExperimentConfig::space_or_default() const {
  if (!space.empty()) return space;
  return objective == ObjectiveKind::Dataset ? std::string(to_string(model)) : std::string("xgb");
}

void ExperimentConfig::validate() const {
  if (budget == 0) throw ConfigError("budget must be >= 1");
  if (optimizer == Optimizer::Bayes) {
    if (init_budget == 0) throw ConfigError("init_budget must be >= 1");
    if (budget <= init_budget)
      throw ConfigError("budget (" + std::to_string(budget) + ") must exceed init_budget (" +
                        std::to_string(init_budget) + ") for bo");
    as_config("acquisition", [&] {
      acquisition.validate();
      return 0;
    });
  }
  if (grid_points && *grid_points == 0) throw ConfigError("grid_points must be >= 1");
  if (objective == ObjectiveKind::Dataset) {
    if (dataset.empty()) throw ConfigError("objective = dataset needs a dataset path");
    if (model == ModelFamily::SyntheticXgb) throw ConfigError("model: synthetic-xgb is not a classifier");
    if (folds < 2) throw ConfigError("folds must be >= 2");
  }
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

ExperimentConfig parse_experiment_config(std::string_view text, const std::string& origin) {
  ExperimentConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string content = trim(line.substr(0, line.find('#')));
    if (content.empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no) + ": ";
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    try {
      config.set(trim(std::string_view(content).substr(0, eq)), std::string_view(content).substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return config;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_config(buffer.str(), path.string());
}

std::string format_trials(const HyperSpace& space, const RunRecord& run) {
  std::ostringstream out;
  out << "trial_index,phase,status,objective,is_best";
  for (const auto& dim : space.dims()) out << ',' << dim.name();
  out << '\n';
  for (std::size_t i = 0; i < run.trials.size(); ++i) {
    const auto& t = run.trials[i];
    out << t.index << ',' << to_string(t.phase) << ',' << (t.failed ? "failed" : "ok") << ','
        << (t.failed ? std::string() : format_double(t.objective)) << ',' << (i == run.best_index ? 1 : 0);
    for (const auto& dim : space.dims()) out << ',' << value_text(t.config.at(dim.name()));
    out << '\n';
  }
  return out.str();
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log) {
  config.validate();
  ExperimentResult result;
  result.space = as_config("space", [&] { return resolve_space(config.space_or_default()); });
  const HyperSpace& space = result.space;
  const std::size_t workers = config.workers > 0 ? config.workers : default_workers();

  std::optional<GroupedDataset> dataset;
  std::optional<ModelSpec> model;
  std::optional<FoldAssignment> folds;
  std::optional<SyntheticBowl> bowl;
  Objective objective;
  // Folds train in parallel only while the search itself is sequential.
  const std::size_t fold_workers = config.optimizer == Optimizer::Bayes ? workers : 1;
  const std::uint64_t train_seed = derive_seed(config.seed, kTrainStream);

  if (config.objective == ObjectiveKind::Dataset) {
    dataset = read_dataset(config.dataset);
    model.emplace(as_config("model", [&] { return ModelSpec(config.model, space); }));
    folds = as_config("folds", [&] { return grouped_kfold(*dataset, config.folds, derive_seed(config.seed, kFoldStream)); });
    if (config.metric != Metric::Mauc && dataset->num_classes != 2)
      throw ConfigError("metric " + std::string(to_string(config.metric)) + " needs a binary dataset; use mauc");
    objective = [&](const Configuration& c) {
      return cv_objective(*model, c, *dataset, *folds, config.metric, train_seed, fold_workers);
    };
  } else {
    bowl.emplace(space.size() == presets::xgb().size() && config.space_or_default() == "xgb" ? SyntheticBowl::xgb()
                                                                                 : SyntheticBowl(space));
    objective = [&](const Configuration& c) { return (*bowl)(c); };
  }

  if (log) *log << "running " << to_string(config.optimizer) << " with budget " << config.budget << " on "
                << workers << " worker(s)\n";
  switch (config.optimizer) {
    case Optimizer::Grid:
      result.run = run_grid_search(space, objective, budget_grid(space, config), workers);
      break;
    case Optimizer::Random:
      result.run = run_random_search(space, objective, config.budget, config.seed, workers);
      break;
    case Optimizer::Bayes: {
      BayesOptSettings settings;
      settings.eval_budget = config.budget;
      settings.init_budget = config.init_budget;
      settings.acquisition = config.acquisition;
      settings.ard = config.ard;
      settings.mode = config.space_mode;
      settings.seed = config.seed;
      settings.workers = workers;
      result.run = run_bayes_opt(space, objective, settings);
      break;
    }
  }

  const auto& run = result.run;
  const auto& best = run.best();
  std::filesystem::create_directories(config.output_dir);
  write_text(config.output_dir / "trials.csv", format_trials(space, run));

  std::ostringstream timings;
  timings << "trial_index,wall_time_ms\n";
  for (const auto& t : run.trials) timings << t.index << ',' << format_double(t.wall_time_ms) << '\n';
  write_text(config.output_dir / "timings.csv", timings.str());

  ordered_json summary;
  summary["settings"] = settings_json(config);
  summary["space"] = nlohmann::ordered_json::parse(dump_space(space));
  ordered_json counts = ordered_json::object();
  std::size_t failed = 0;
  for (const auto& t : run.trials) {
    counts[std::string(to_string(t.phase))] = counts.value(std::string(to_string(t.phase)), 0) + 1;
    failed += t.failed ? 1 : 0;
  }
  summary["trials"] = run.trials.size();
  summary["trials_by_phase"] = counts;
  summary["failed_trials"] = failed;
  summary["best"] = {{"trial_index", best.index},
                     {"phase", std::string(to_string(best.phase))},
                     {"objective", best.objective},
                     {"config", config_json(space, best.config)}};
  if (bowl) summary["best"]["optimum_gap"] = bowl->optimum_value() - best.objective;

  ordered_json failures = ordered_json::array();
  for (const auto& t : run.trials)
    if (t.failed) failures.push_back({{"trial_index", t.index}, {"reason", t.failure}});
  summary["failures"] = failures;
  summary["flags"] = run.flags;

  if (dataset) {
    const auto fold_of_sample = folds->fold_of_samples(*dataset);
    const PredictionSet pooled =
        cross_validated_predictions(*model, best.config, *dataset, fold_of_sample, train_seed, workers);
    write_predictions(config.output_dir / "predictions.csv", pooled);
    if (!config.validation.empty()) {
      const GroupedDataset held_out = read_dataset(config.validation);
      if (held_out.features.cols() != dataset->features.cols())
        throw DataError("validation dataset has a different feature count");
      const auto trained = model->train(dataset->features, dataset->labels, dataset->num_classes, best.config,
                                        derive_seed(train_seed, 0xFFFF));
      PredictionSet preds;
      preds.probabilities = trained->predict_proba(held_out.features);
      preds.labels = held_out.labels;
      preds.sample_ids = held_out.sample_ids;
      write_predictions(config.output_dir / "validation_predictions.csv", preds);
      result.validation_score = evaluate_metric(config.metric, preds.probabilities, preds.labels);
      summary["validation"] = {{"dataset", config.validation.generic_string()},
                               {"metric", std::string(to_string(config.metric))},
                               {"score", *result.validation_score}};
    }
  }
  write_text(config.output_dir / "summary.json", summary.dump(2) + "\n");
  if (log) *log << "best trial " << best.index << " objective " << format_double(best.objective) << "\n";
  return result;
}

std::string compare_prediction_files(const std::filesystem::path& a, const std::filesystem::path& b, Metric metric,
                                     const BootstrapOptions& options) {
  const PredictionSet preds_a = read_predictions(a);
  const PredictionSet preds_b = read_predictions(b);
  const CiResult ci = bootstrap_diff_ci(preds_a, preds_b, metric, options);
  ordered_json report;
  report["a"] = a.generic_string();
  report["b"] = b.generic_string();
  report["metric"] = std::string(to_string(metric));
  report["metric_a"] = evaluate_metric(metric, preds_a.probabilities, preds_a.labels);
  report["metric_b"] = evaluate_metric(metric, preds_b.probabilities, preds_b.labels);
  report["observed_diff"] = ci.observed_diff;
  report["ci_lo"] = ci.lo;
  report["ci_hi"] = ci.hi;
  report["confidence"] = 0.95;
  report["resamples"] = ci.resamples;
  report["redraws"] = ci.redraws;
  report["seed"] = options.seed;
  return report.dump(2) + "\n";
}

}  // namespace hpo
