#pragma once

#include "hpo/dataset.hpp"
#include "hpo/metrics.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace hpo {

struct CiResult {
  double observed_diff = 0.0;
  double lo = 0.0;  // 2.5th percentile of the resampled differences
  double hi = 0.0;  // 97.5th percentile
  std::size_t resamples = 0;
  /// Draws discarded because the metric was undefined on them.
  std::size_t redraws = 0;
};

enum class BootstrapSide { A, B };

/// Observes every index vector used to evaluate a side of a resample.
/// Called from worker threads, serialized by the caller.
using ResampleRecorder = std::function<void(std::size_t resample, BootstrapSide side, std::span<const std::size_t>)>;

struct BootstrapOptions {
  std::size_t resamples = 5000;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  ResampleRecorder recorder;
};

/// Paired bootstrap of metric(A) - metric(B). Each resample draws n indices
/// with replacement from a stream seeded by (seed, resample index) and
/// applies them to both sets; draws on which the metric is undefined are
/// replaced. Percentiles use linear interpolation between order statistics.
/// Throws DataError when the sets are not aligned on sample ids and labels.
CiResult bootstrap_diff_ci(const PredictionSet& a, const PredictionSet& b, Metric metric,
                           const BootstrapOptions& options = {});

/// Linear-interpolation quantile of sorted data (h = (n - 1) p).
double quantile_sorted(std::span<const double> sorted, double p);

}  // namespace hpo
