#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hpo {

/// Samples with real features, class labels in [0, num_classes) and the
/// identifier of the group (study) each sample came from.
struct GroupedDataset {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  std::vector<std::string> groups;
  std::vector<std::string> sample_ids;
  int num_classes = 2;

  std::size_t size() const noexcept { return labels.size(); }

  /// Throws DataError on length mismatches, out-of-range labels or a class
  /// with no samples.
  void validate() const;

  GroupedDataset subset(std::span<const std::size_t> rows) const;

  /// Distinct group identifiers, sorted.
  std::vector<std::string> distinct_groups() const;
};

/// Delimited text, comma separated, header row required:
///   sample_id,group_id,label,<feature columns...>
/// num_classes is inferred as max(label) + 1.
GroupedDataset read_dataset(const std::filesystem::path& path);
void write_dataset(const std::filesystem::path& path, const GroupedDataset& dataset);

/// Pooled class-probability predictions, one row per sample.
struct PredictionSet {
  Eigen::MatrixXd probabilities;
  std::vector<int> labels;
  std::vector<std::string> sample_ids;

  std::size_t size() const noexcept { return labels.size(); }
  int num_classes() const noexcept { return static_cast<int>(probabilities.cols()); }

  /// Throws DataError unless rows sum to 1 within 1e-9, entries are in
  /// [0, 1] and all lengths agree.
  void validate() const;
};

/// Header: sample_id,label,p0,...,p{c-1}.
PredictionSet read_predictions(const std::filesystem::path& path);
void write_predictions(const std::filesystem::path& path, const PredictionSet& predictions);

/// Shortest decimal text that round-trips a double.
std::string format_double(double value);

}  // namespace hpo
