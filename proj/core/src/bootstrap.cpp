#include "hpo/bootstrap.hpp"

#include "hpo/error.hpp"
#include "hpo/rng.hpp"
#include "hpo/worker_pool.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace hpo {
namespace {

constexpr std::size_t kMaxRedrawsPerResample = 10000;

double metric_on(Metric metric, const PredictionSet& preds, std::span<const std::size_t> rows,
                 std::vector<int>& labels) {
  Eigen::MatrixXd probs(static_cast<Eigen::Index>(rows.size()), preds.probabilities.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    probs.row(static_cast<Eigen::Index>(i)) = preds.probabilities.row(static_cast<Eigen::Index>(rows[i]));
  return evaluate_metric(metric, probs, labels);
}

}  // namespace

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InvalidArgument("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("quantile probability must lie in [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

CiResult bootstrap_diff_ci(const PredictionSet& a, const PredictionSet& b, Metric metric,
                           const BootstrapOptions& options) {
  if (a.size() != b.size() || a.sample_ids != b.sample_ids || a.labels != b.labels)
    throw DataError("prediction sets are not aligned on sample ids and labels");
  if (a.num_classes() != b.num_classes()) throw DataError("prediction sets differ in class count");
  if (options.resamples == 0) throw InvalidArgument("resamples must be >= 1");
  a.validate();
  b.validate();
  const int c = a.num_classes();
  if (!metric_defined(metric, a.labels, c)) throw DataError("metric is undefined on the full prediction set");

  CiResult result;
  result.observed_diff = evaluate_metric(metric, a.probabilities, a.labels) -
                         evaluate_metric(metric, b.probabilities, b.labels);
  result.resamples = options.resamples;

  const std::size_t n = a.size();
  std::vector<double> diffs(options.resamples);
  std::vector<std::size_t> redraws(options.resamples, 0);
  std::mutex recorder_mutex;

  parallel_for(options.resamples, options.workers, [&](std::size_t r) {
    Rng rng(derive_seed(options.seed, r));
    std::vector<std::size_t> rows(n);
    std::vector<int> labels(n);
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) {
        rows[i] = rng.index(n);
        labels[i] = a.labels[rows[i]];
      }
      if (metric_defined(metric, labels, c)) break;
      if (++redraws[r] > kMaxRedrawsPerResample) throw DataError("bootstrap cannot draw a resample with every class");
    }
    if (options.recorder) {
      std::lock_guard lock(recorder_mutex);
      options.recorder(r, BootstrapSide::A, rows);
    }
    const double metric_a = metric_on(metric, a, rows, labels);
    if (options.recorder) {
      std::lock_guard lock(recorder_mutex);
      options.recorder(r, BootstrapSide::B, rows);
    }
    const double metric_b = metric_on(metric, b, rows, labels);
    diffs[r] = metric_a - metric_b;
  });

  for (std::size_t count : redraws) result.redraws += count;
  std::sort(diffs.begin(), diffs.end());
  result.lo = quantile_sorted(diffs, 0.025);
  result.hi = quantile_sorted(diffs, 0.975);
  return result;
}

}  // namespace hpo
