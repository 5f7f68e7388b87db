#pragma once

#include <Eigen/Core>

#include <span>
#include <string_view>

namespace hpo {

/// Mann-Whitney AUC: the probability that a random positive (label 1)
/// outscores a random negative (label 0), ties counting one half. Computed
/// from integer win/tie counts. Throws DataError unless labels are 0/1 with
/// both present.
double auc_binary(std::span<const double> scores, std::span<const int> labels);

/// Hand-Till multi-class AUC: mean over unordered class pairs (i, j) of
/// (A(i|j) + A(j|i)) / 2, where A(i|j) ranks samples of classes i and j by
/// column i of `probabilities`. Every class in [0, cols) must be present.
double mauc_hand_till(const Eigen::MatrixXd& probabilities, std::span<const int> labels);

/// Area under the precision-recall step curve over descending-score
/// thresholds, tied scores forming one threshold. Positive class is 1.
double average_precision(std::span<const double> scores, std::span<const int> labels);

enum class Metric { Auc, Mauc, AveragePrecision };

std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view text);

/// Applies `metric` to a probability matrix. Auc and AveragePrecision are
/// binary metrics and score column 1.
double evaluate_metric(Metric metric, const Eigen::MatrixXd& probabilities, std::span<const int> labels);

/// False when the labels make `metric` undefined (a required class is absent).
bool metric_defined(Metric metric, std::span<const int> labels, int num_classes);

}  // namespace hpo
