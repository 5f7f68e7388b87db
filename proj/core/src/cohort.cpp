#include "hpo/cohort.hpp"

#include "hpo/error.hpp"
#include "hpo/features.hpp"
#include "hpo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

namespace hpo {
namespace {

constexpr std::uint64_t kBiologyStream = 0;
constexpr std::uint64_t kLayoutStream = 1;
constexpr std::uint64_t kStudyStream = 1ULL << 32;

// Marsaglia-Tsang gamma draw with unit scale.
double gamma_draw(Rng& rng, double shape) {
  if (shape < 1.0) return gamma_draw(rng, shape + 1.0) * std::pow(rng.uniform() + 0x1.0p-54, 1.0 / shape);
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u + 0x1.0p-54) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

// Log-scale class effect of each module, by class.
std::map<std::string, std::vector<double>> module_effects(CohortTask task) {
  if (task == CohortTask::Bvn)
    return {{"viral_up", {0.0, 1.0, 0.0}},
            {"bacterial_up", {0.8, 0.0, 0.0}},
            {"sepsis_up", {0.5, 0.4, 0.0}},
            {"sepsis_down", {-0.5, -0.4, 0.0}}};
  return {{"mortality_up", {0.0, 0.7}}, {"mortality_down", {0.0, -0.7}}, {"sepsis_up", {0.0, 0.3}}};
}

std::vector<std::size_t> exact_counts(const std::vector<double>& rates, std::size_t n) {
  const std::size_t c = rates.size();
  if (n < c) throw InvalidArgument("cohort has fewer samples than classes");
  std::vector<std::size_t> counts(c);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < c; ++k) {
    const double exact = rates[k] * static_cast<double>(n);
    counts[k] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[k];
    remainders.emplace_back(exact - std::floor(exact), k);
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++counts[remainders[i % c].second];
  // Every class needs a sample; borrow from the largest class.
  for (auto& count : counts) {
    if (count > 0) continue;
    ++count;
    --*std::max_element(counts.begin(), counts.end());
  }
  return counts;
}

}  // namespace

std::string_view to_string(CohortTask task) { return task == CohortTask::Bvn ? "bvn" : "mortality"; }

CohortTask parse_cohort_task(std::string_view text) {
  if (text == "bvn") return CohortTask::Bvn;
  if (text == "mortality") return CohortTask::Mortality;
  throw InvalidArgument("unknown cohort task '" + std::string(text) + "' (expected bvn|mortality)");
}

std::vector<double> class_rates(CohortTask task, double event_rate) {
  if (task == CohortTask::Bvn) return {0.40, 0.30, 0.30};
  if (!(event_rate > 0.0 && event_rate < 1.0)) throw InvalidArgument("event rate must lie in (0, 1)");
  return {1.0 - event_rate, event_rate};
}

GroupedDataset generate_synthetic_cohort(const CohortOptions& options) {
  if (options.studies < 1) throw InvalidArgument("cohort needs at least one study");
  if (options.min_samples < 1 || options.min_samples > options.max_samples)
    throw InvalidArgument("samples per study must satisfy 1 <= min <= max");
  if (!(options.batch_effect_scale >= 0.0) || !(options.class_separation >= 0.0) ||
      !(options.composition_concentration >= 0.0))
    throw InvalidArgument("cohort scales must be >= 0");

  const auto rates = class_rates(options.task, options.event_rate);
  const std::size_t c = rates.size();
  const auto& modules = default_gene_modules();
  const auto genes = default_gene_order();
  const auto g = static_cast<Eigen::Index>(genes.size());

  // Class profiles shared by every study generated from this seed.
  Rng biology(derive_seed(options.seed, kBiologyStream));
  Eigen::VectorXd base(g);
  for (Eigen::Index j = 0; j < g; ++j) base(j) = biology.normal(2.0, 0.3);
  Eigen::MatrixXd profile = base.replicate(1, static_cast<Eigen::Index>(c));
  const auto effects = module_effects(options.task);
  Eigen::Index column = 0;
  for (const auto& module : modules) {
    const auto it = effects.find(module.name);
    for (std::size_t k = 0; k < module.genes.size(); ++k, ++column) {
      const double jitter = biology.uniform(0.7, 1.3);
      if (it == effects.end()) continue;
      for (std::size_t cls = 0; cls < c; ++cls)
        profile(column, static_cast<Eigen::Index>(cls)) += options.class_separation * jitter * it->second[cls];
    }
  }

  // Study sizes and compositions.
  Rng layout(derive_seed(options.seed, kLayoutStream + 2 * options.first_study));
  std::vector<std::size_t> sizes(options.studies);
  std::vector<std::vector<double>> composition(options.studies, std::vector<double>(c, 1.0));
  std::size_t total = 0;
  for (std::size_t s = 0; s < options.studies; ++s) {
    Rng study(derive_seed(options.seed, kStudyStream + options.first_study + s));
    sizes[s] = options.min_samples + study.index(options.max_samples - options.min_samples + 1);
    total += sizes[s];
    if (options.composition_concentration > 0.0)
      for (auto& w : composition[s]) w = gamma_draw(study, options.composition_concentration) + 1e-3;
  }
  auto remaining = exact_counts(rates, total);

  GroupedDataset ds;
  ds.num_classes = static_cast<int>(c);
  Eigen::MatrixXd expression(static_cast<Eigen::Index>(total), g);
  Eigen::Index row = 0;
  for (std::size_t s = 0; s < options.studies; ++s) {
    const std::size_t index = options.first_study + s;
    Rng study(derive_seed(options.seed, kStudyStream + (1ULL << 31) + index));
    const double scale = options.batch_effect_scale;
    const double multiplier = std::exp(study.normal(0.0, 0.1 * scale));
    Eigen::VectorXd shift(g);
    for (Eigen::Index j = 0; j < g; ++j) shift(j) = study.normal(0.0, 0.5 * scale);

    char group[32];
    std::snprintf(group, sizeof group, "study%03zu", index);
    for (std::size_t i = 0; i < sizes[s]; ++i, ++row) {
      double weight_total = 0.0;
      for (std::size_t k = 0; k < c; ++k) weight_total += composition[s][k] * static_cast<double>(remaining[k]);
      double pick = layout.uniform() * weight_total;
      std::size_t label = 0;
      for (; label + 1 < c; ++label) {
        pick -= composition[s][label] * static_cast<double>(remaining[label]);
        if (pick < 0.0 && remaining[label] > 0) break;
      }
      while (remaining[label] == 0) label = (label + 1) % c;
      --remaining[label];

      for (Eigen::Index j = 0; j < g; ++j) {
        const double log_value = profile(j, static_cast<Eigen::Index>(label)) + study.normal(0.0, 0.5);
        expression(row, j) = std::exp(multiplier * log_value + shift(j));
      }
      ds.labels.push_back(static_cast<int>(label));
      ds.groups.emplace_back(group);
      char id[48];
      std::snprintf(id, sizeof id, "%s_%03zu", group, i);
      ds.sample_ids.emplace_back(id);
    }
  }
  ds.features = module_features(expression, module_indices(modules, genes));
  ds.validate();
  return ds;
}

}  // namespace hpo
