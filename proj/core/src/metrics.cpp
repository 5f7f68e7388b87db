#include "hpo/metrics.hpp"

#include "hpo/error.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

namespace hpo {
namespace {

void check_lengths(std::size_t scores, std::size_t labels) {
  if (scores != labels) throw DataError("scores and labels differ in length");
}

std::vector<std::size_t> order_by(std::span<const double> scores, bool descending) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (descending)
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  else
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  return order;
}

// Pairwise AUC of `positive` against `negative` scored by `column`, over the
// samples whose label is either class.
double pair_auc(const Eigen::MatrixXd& probabilities, std::span<const int> labels, int positive, int negative,
                int column) {
  std::vector<double> scores;
  std::vector<int> binary;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != positive && labels[i] != negative) continue;
    scores.push_back(probabilities(static_cast<Eigen::Index>(i), column));
    binary.push_back(labels[i] == positive ? 1 : 0);
  }
  return auc_binary(scores, binary);
}

}  // namespace

double auc_binary(std::span<const double> scores, std::span<const int> labels) {
  check_lengths(scores.size(), labels.size());
  std::uint64_t positives = 0, negatives = 0;
  for (int label : labels) {
    if (label == 1) ++positives;
    else if (label == 0) ++negatives;
    else throw DataError("auc_binary expects labels 0 and 1");
  }
  if (positives == 0 || negatives == 0) throw DataError("auc_binary needs both classes present");

  const auto order = order_by(scores, false);
  std::uint64_t wins = 0, ties = 0, negatives_below = 0;
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start;
    std::uint64_t pos = 0, neg = 0;
    while (end < order.size() && scores[order[end]] == scores[order[start]]) {
      (labels[order[end]] == 1 ? pos : neg) += 1;
      ++end;
    }
    wins += pos * negatives_below;
    ties += pos * neg;
    negatives_below += neg;
    start = end;
  }
  return (2.0 * static_cast<double>(wins) + static_cast<double>(ties)) /
         (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

double mauc_hand_till(const Eigen::MatrixXd& probabilities, std::span<const int> labels) {
  if (static_cast<std::size_t>(probabilities.rows()) != labels.size())
    throw DataError("probabilities and labels differ in length");
  const int c = static_cast<int>(probabilities.cols());
  if (c < 2) throw DataError("mauc_hand_till needs at least two classes");
  std::vector<std::size_t> counts(static_cast<std::size_t>(c), 0);
  for (int label : labels) {
    if (label < 0 || label >= c) throw DataError("label " + std::to_string(label) + " out of range");
    ++counts[static_cast<std::size_t>(label)];
  }
  for (int k = 0; k < c; ++k)
    if (counts[static_cast<std::size_t>(k)] == 0) throw DataError("class " + std::to_string(k) + " is missing");

  double total = 0.0;
  int pairs = 0;
  for (int i = 0; i < c; ++i) {
    for (int j = i + 1; j < c; ++j) {
      total += (pair_auc(probabilities, labels, i, j, i) + pair_auc(probabilities, labels, j, i, j)) / 2.0;
      ++pairs;
    }
  }
  return total / pairs;
}

double average_precision(std::span<const double> scores, std::span<const int> labels) {
  check_lengths(scores.size(), labels.size());
  std::size_t positives = 0;
  for (int label : labels) {
    if (label != 0 && label != 1) throw DataError("average_precision expects labels 0 and 1");
    positives += label == 1 ? 1 : 0;
  }
  if (positives == 0) throw DataError("average_precision needs at least one positive");

  const auto order = order_by(scores, true);
  double ap = 0.0, previous_recall = 0.0;
  std::size_t tp = 0, seen = 0;
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start;
    while (end < order.size() && scores[order[end]] == scores[order[start]]) {
      tp += labels[order[end]] == 1 ? 1 : 0;
      ++end;
    }
    seen = end;
    const double recall = static_cast<double>(tp) / static_cast<double>(positives);
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    ap += (recall - previous_recall) * precision;
    previous_recall = recall;
    start = end;
  }
  return ap;
}

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::Auc: return "auc";
    case Metric::Mauc: return "mauc";
    case Metric::AveragePrecision: return "ap";
  }
  return "unknown";
}

Metric parse_metric(std::string_view text) {
  if (text == "auc") return Metric::Auc;
  if (text == "mauc") return Metric::Mauc;
  if (text == "ap") return Metric::AveragePrecision;
  throw InvalidArgument("unknown metric '" + std::string(text) + "' (expected auc|mauc|ap)");
}

double evaluate_metric(Metric metric, const Eigen::MatrixXd& probabilities, std::span<const int> labels) {
  if (metric == Metric::Mauc) return mauc_hand_till(probabilities, labels);
  if (probabilities.cols() != 2) throw DataError(std::string(to_string(metric)) + " needs a binary task");
  if (static_cast<std::size_t>(probabilities.rows()) != labels.size())
    throw DataError("probabilities and labels differ in length");
  const Eigen::VectorXd positive = probabilities.col(1);
  const std::span<const double> scores(positive.data(), static_cast<std::size_t>(positive.size()));
  return metric == Metric::Auc ? auc_binary(scores, labels) : average_precision(scores, labels);
}

bool metric_defined(Metric metric, std::span<const int> labels, int num_classes) {
  std::vector<bool> present(static_cast<std::size_t>(std::max(num_classes, 0)), false);
  for (int label : labels)
    if (label >= 0 && label < num_classes) present[static_cast<std::size_t>(label)] = true;
  if (metric == Metric::AveragePrecision) return num_classes == 2 && present[1];
  return std::all_of(present.begin(), present.end(), [](bool p) { return p; });
}

}  // namespace hpo
