#pragma once

#include "hpo/dataset.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace hpo {

/// Bvn: 0 bacterial, 1 viral, 2 non-infectious. Mortality: 0 survived, 1 died.
enum class CohortTask { Bvn, Mortality };

std::string_view to_string(CohortTask task);
CohortTask parse_cohort_task(std::string_view text);

struct CohortOptions {
  std::size_t studies = 20;
  std::size_t min_samples = 20;
  std::size_t max_samples = 40;
  CohortTask task = CohortTask::Bvn;
  /// Scales per-study additive and multiplicative shifts; 0 removes them.
  double batch_effect_scale = 1.0;
  /// Scales the class-specific expression effects.
  double class_separation = 1.0;
  /// Positive-class rate of the mortality task.
  double event_rate = 0.053;
  /// Spread of class composition across studies (Dirichlet concentration;
  /// smaller is more heterogeneous, 0 gives identical compositions).
  double composition_concentration = 0.7;
  /// Index of the first generated study. Studies are numbered globally, so
  /// calls with disjoint ranges and the same seed yield disjoint cohorts that
  /// share class profiles (e.g. training and held-out studies).
  std::size_t first_study = 0;
  std::uint64_t seed = 0;
};

/// Global class rates of a task.
std::vector<double> class_rates(CohortTask task, double event_rate);

/// Synthetic multi-study gene-expression cohort. Expression of the 29 marker
/// genes is log-normal around class-conditional profiles, then distorted per
/// study; features are module_features of it (41 columns). Global label
/// counts equal round(rate * n) (largest remainder, at least one per class).
GroupedDataset generate_synthetic_cohort(const CohortOptions& options);

}  // namespace hpo
