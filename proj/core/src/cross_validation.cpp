#include "hpo/cross_validation.hpp"

#include "hpo/error.hpp"
#include "hpo/rng.hpp"
#include "hpo/worker_pool.hpp"

#include <algorithm>
#include <numeric>

namespace hpo {

void FoldAssignment::validate() const {
  if (k < 2) throw InvalidArgument("fold count must be >= 2");
  std::vector<bool> used(static_cast<std::size_t>(k), false);
  for (const auto& [group, fold] : fold_of_group) {
    if (fold < 0 || fold >= k) throw InvalidArgument("group '" + group + "' has fold index out of range");
    used[static_cast<std::size_t>(fold)] = true;
  }
  for (int f = 0; f < k; ++f)
    if (!used[static_cast<std::size_t>(f)]) throw InvalidArgument("fold " + std::to_string(f) + " is empty");
}

std::vector<int> FoldAssignment::fold_of_samples(const GroupedDataset& dataset) const {
  std::vector<int> folds(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto it = fold_of_group.find(dataset.groups[i]);
    if (it == fold_of_group.end()) throw DataError("group '" + dataset.groups[i] + "' has no fold");
    folds[i] = it->second;
  }
  return folds;
}

FoldAssignment grouped_kfold(const GroupedDataset& dataset, int k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("fold count must be >= 2");
  std::map<std::string, std::size_t> sizes;
  for (const auto& g : dataset.groups) ++sizes[g];
  if (sizes.size() < static_cast<std::size_t>(k))
    throw InvalidArgument("grouped k-fold needs at least " + std::to_string(k) + " groups, found " +
                          std::to_string(sizes.size()));

  std::vector<std::pair<std::string, std::size_t>> groups(sizes.begin(), sizes.end());
  Rng rng(seed);
  rng.shuffle(groups.begin(), groups.end());
  std::stable_sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  FoldAssignment out;
  out.k = k;
  std::vector<std::size_t> load(static_cast<std::size_t>(k), 0);
  for (const auto& [name, count] : groups) {
    const auto smallest = static_cast<std::size_t>(std::min_element(load.begin(), load.end()) - load.begin());
    load[smallest] += count;
    out.fold_of_group[name] = static_cast<int>(smallest);
  }
  return out;
}

std::vector<int> sample_kfold(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2 || n < static_cast<std::size_t>(k)) throw InvalidArgument("k-fold needs k >= 2 and at least k samples");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());
  std::vector<int> folds(n);
  for (std::size_t i = 0; i < n; ++i) folds[order[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  return folds;
}

PredictionSet cross_validated_predictions(const Classifier& classifier, const Configuration& config,
                                          const GroupedDataset& dataset, std::span<const int> fold_of_sample,
                                          std::uint64_t seed, std::size_t workers) {
  if (fold_of_sample.size() != dataset.size()) throw InvalidArgument("fold vector length differs from dataset");
  const int k = fold_of_sample.empty() ? 0 : *std::max_element(fold_of_sample.begin(), fold_of_sample.end()) + 1;
  if (k < 2) throw InvalidArgument("cross-validation needs at least two folds");

  PredictionSet out;
  out.labels = dataset.labels;
  out.sample_ids = dataset.sample_ids;
  out.probabilities.resize(static_cast<Eigen::Index>(dataset.size()), dataset.num_classes);

  std::vector<std::vector<std::size_t>> held_out(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (fold_of_sample[i] < 0) throw InvalidArgument("negative fold index");
    held_out[static_cast<std::size_t>(fold_of_sample[i])].push_back(i);
  }

  parallel_for(static_cast<std::size_t>(k), workers, [&](std::size_t f) {
    if (held_out[f].empty()) return;
    std::vector<std::size_t> train_rows;
    for (std::size_t i = 0; i < dataset.size(); ++i)
      if (static_cast<std::size_t>(fold_of_sample[i]) != f) train_rows.push_back(i);
    if (train_rows.empty()) throw InvalidArgument("a fold leaves no training samples");
    const GroupedDataset train = dataset.subset(train_rows);
    const GroupedDataset test = dataset.subset(held_out[f]);
    const auto model = classifier.train(train.features, train.labels, dataset.num_classes, config, derive_seed(seed, f));
    const Eigen::MatrixXd probs = model->predict_proba(test.features);
    if (probs.rows() != test.features.rows() || probs.cols() != dataset.num_classes)
      throw TrainingFailure("model returned predictions of the wrong shape");
    if (!probs.allFinite()) throw TrainingFailure("model returned non-finite probabilities");
    for (std::size_t r = 0; r < held_out[f].size(); ++r)
      out.probabilities.row(static_cast<Eigen::Index>(held_out[f][r])) = probs.row(static_cast<Eigen::Index>(r));
  });
  return out;
}

double cv_objective(const Classifier& classifier, const Configuration& config, const GroupedDataset& dataset,
                    const FoldAssignment& folds, Metric metric, std::uint64_t seed, std::size_t workers) {
  folds.validate();
  const auto fold_of_sample = folds.fold_of_samples(dataset);
  const PredictionSet pooled = cross_validated_predictions(classifier, config, dataset, fold_of_sample, seed, workers);
  return evaluate_metric(metric, pooled.probabilities, pooled.labels);
}

}  // namespace hpo
