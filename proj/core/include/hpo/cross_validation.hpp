#pragma once

#include "hpo/dataset.hpp"
#include "hpo/hyperspace.hpp"
#include "hpo/metrics.hpp"
#include "hpo/models.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace hpo {

/// Maps each group to exactly one of k folds.
struct FoldAssignment {
  std::map<std::string, int> fold_of_group;
  int k = 0;

  /// Throws InvalidArgument if a fold index is out of range or a fold is empty.
  void validate() const;
  /// Fold index of every sample; throws DataError for an unmapped group.
  std::vector<int> fold_of_samples(const GroupedDataset& dataset) const;
};

/// Whole groups to folds, balanced by sample count: groups are shuffled by
/// `seed`, stably sorted by size descending, then each goes to the fold with
/// the fewest samples (lowest index on ties).
FoldAssignment grouped_kfold(const GroupedDataset& dataset, int k, std::uint64_t seed);

/// Ordinary k-fold over samples, ignoring groups: a seeded permutation dealt
/// round-robin.
std::vector<int> sample_kfold(std::size_t n, int k, std::uint64_t seed);

/// Trains on all folds but one and predicts the held-out fold, for every
/// fold. Row i of the result is the prediction for sample i. Fold f trains
/// with seed derive_seed(seed, f). Folds may train concurrently.
PredictionSet cross_validated_predictions(const Classifier& classifier, const Configuration& config,
                                          const GroupedDataset& dataset, std::span<const int> fold_of_sample,
                                          std::uint64_t seed = 0, std::size_t workers = 1);

/// Metric computed once on the pooled held-out predictions.
double cv_objective(const Classifier& classifier, const Configuration& config, const GroupedDataset& dataset,
                    const FoldAssignment& folds, Metric metric, std::uint64_t seed = 0, std::size_t workers = 1);

}  // namespace hpo
