#pragma once

#include "hpo/hyperspace.hpp"

#include <vector>

namespace hpo {

/// Deterministic test objective: a negative quadratic bowl in the unit
/// (transformed) coordinates of every non-categorical dimension, minus a
/// per-label offset for every categorical dimension. The maximum is 0 and is
/// attained at optimum().
class SyntheticBowl {
 public:
  /// `weights` and `targets` hold one entry per dimension (ignored for
  /// categorical ones); targets of discrete dimensions are snapped to the
  /// nearest rank. `offsets` holds one list per dimension, sized to the
  /// label count for categorical dimensions (empty otherwise), with a 0
  /// somewhere in each list.
  SyntheticBowl(HyperSpace space, std::vector<double> weights, std::vector<double> targets,
                std::vector<std::vector<double>> offsets);

  /// Default bowl for any space: weight 0.15 (0.03 for discrete
  /// dimensions), targets spread over [0.2, 0.8], categorical offsets 0.05 per
  /// label index.
  explicit SyntheticBowl(HyperSpace space);

  /// The pinned bowl over the xgb preset space.
  static SyntheticBowl xgb();

  double operator()(const Configuration& config) const;

  const HyperSpace& space() const noexcept { return space_; }
  const Configuration& optimum() const noexcept { return optimum_; }
  double optimum_value() const noexcept { return 0.0; }

 private:
  HyperSpace space_;
  std::vector<double> weights_;
  std::vector<double> targets_;
  std::vector<std::vector<double>> offsets_;
  Configuration optimum_;
};

/// Two-dimensional multimodal function on x, y in [0, 1]: a sum of four
/// Gaussian bumps. Global maximum near (0.75, 0.25) with value close to 1.
HyperSpace multimodal_space();
double multimodal_objective(const Configuration& config);

/// One-dimensional concave quadratic on x in [0, 1]: -(x - 0.3)^2.
HyperSpace quadratic_space();
double quadratic_objective(const Configuration& config);
constexpr double kQuadraticOptimum = 0.3;

}  // namespace hpo
