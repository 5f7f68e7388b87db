#include "hpo/synthetic.hpp"

#include "hpo/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hpo {

SyntheticBowl::SyntheticBowl(HyperSpace space, std::vector<double> weights, std::vector<double> targets,
                             std::vector<std::vector<double>> offsets)
    : space_(std::move(space)), weights_(std::move(weights)), targets_(std::move(targets)), offsets_(std::move(offsets)) {
  const std::size_t d = space_.size();
  if (weights_.size() != d || targets_.size() != d || offsets_.size() != d)
    throw InvalidArgument("bowl parameters need one entry per dimension");

  Eigen::VectorXd best(static_cast<Eigen::Index>(d));
  for (std::size_t h = 0; h < d; ++h) {
    const auto& dim = space_.dim(h);
    const auto i = static_cast<Eigen::Index>(h);
    if (dim.is_categorical()) {
      const auto& offs = offsets_[h];
      if (offs.size() != dim.cardinality()) throw InvalidArgument("categorical offsets must cover every label of " + dim.name());
      const auto best_label = std::min_element(offs.begin(), offs.end()) - offs.begin();
      if (offs[static_cast<std::size_t>(best_label)] != 0.0) throw InvalidArgument("categorical offsets need a zero entry");
      best(i) = dim.cardinality() == 1 ? 0.5 : static_cast<double>(best_label) / static_cast<double>(dim.cardinality() - 1);
      continue;
    }
    if (!(weights_[h] >= 0.0) || !(targets_[h] >= 0.0 && targets_[h] <= 1.0))
      throw InvalidArgument("bowl weight must be >= 0 and target in [0, 1] for " + dim.name());
    best(i) = targets_[h];
  }
  best = space_.snap(best, SpaceMode::Transformed);
  for (std::size_t h = 0; h < d; ++h)
    if (!space_.dim(h).is_categorical()) targets_[h] = best(static_cast<Eigen::Index>(h));
  optimum_ = space_.decode(best, SpaceMode::Transformed);
}

namespace {

std::vector<double> default_weights(const HyperSpace& space) {
  std::vector<double> w;
  for (const auto& dim : space.dims()) w.push_back(dim.is_continuous() ? 0.15 : 0.03);
  return w;
}

std::vector<double> default_targets(const HyperSpace& space) {
  std::vector<double> t;
  for (std::size_t h = 0; h < space.size(); ++h) {
    const double golden = std::fmod(0.5 + 0.6180339887498949 * static_cast<double>(h), 1.0);
    t.push_back(0.2 + 0.6 * golden);
  }
  return t;
}

std::vector<std::vector<double>> default_offsets(const HyperSpace& space) {
  std::vector<std::vector<double>> out;
  for (const auto& dim : space.dims()) {
    std::vector<double> offs;
    if (dim.is_categorical())
      for (std::size_t k = 0; k < dim.cardinality(); ++k) offs.push_back(0.05 * static_cast<double>(k));
    out.push_back(std::move(offs));
  }
  return out;
}

}  // namespace

SyntheticBowl::SyntheticBowl(HyperSpace space)
    : SyntheticBowl(space, default_weights(space), default_targets(space), default_offsets(space)) {}

SyntheticBowl SyntheticBowl::xgb() {
  HyperSpace space = presets::xgb();
  // booster, gamma, learning_rate, reg_alpha, reg_lambda, max_delta_step,
  // max_depth, min_child_weight, n_estimators, colsample_bylevel,
  // colsample_bynode, colsample_bytree, subsample
  std::vector<double> weights{0.0, 0.15, 0.15, 0.15, 0.15, 0.03, 0.03, 0.03, 0.15, 0.15, 0.15, 0.15, 0.15};
  std::vector<double> targets{0.0, 0.3, 0.7, 0.2, 0.45, 1.0, 3.0 / 7.0, 0.25, 0.6, 0.5, 0.8, 0.35, 0.65};
  std::vector<std::vector<double>> offsets(space.size());
  offsets[0] = {0.0, 0.1, 0.03};
  return SyntheticBowl(std::move(space), std::move(weights), std::move(targets), std::move(offsets));
}

double SyntheticBowl::operator()(const Configuration& config) const {
  space_.validate(config);
  const Eigen::VectorXd u = space_.encode(config, SpaceMode::Transformed);
  double value = 0.0;
  for (std::size_t h = 0; h < space_.size(); ++h) {
    const auto i = static_cast<Eigen::Index>(h);
    if (space_.dim(h).is_categorical()) {
      const auto& dim = space_.dim(h);
      const auto index = dim.cardinality() == 1
                             ? std::size_t{0}
                             : static_cast<std::size_t>(std::llround(u(i) * static_cast<double>(dim.cardinality() - 1)));
      value -= offsets_[h][index];
    } else {
      const double gap = u(i) - targets_[h];
      value -= weights_[h] * gap * gap;
    }
  }
  return value;
}

HyperSpace multimodal_space() {
  return HyperSpace({Dimension::continuous("x", 0.0, 1.0), Dimension::continuous("y", 0.0, 1.0)});
}

double multimodal_objective(const Configuration& config) {
  struct Bump {
    double x, y, height, width;
  };
  static constexpr Bump bumps[] = {
      {0.75, 0.25, 1.0, 0.10}, {0.20, 0.80, 0.8, 0.15}, {0.30, 0.20, 0.6, 0.12}, {0.80, 0.85, 0.5, 0.10}};
  const double x = config.number("x");
  const double y = config.number("y");
  double value = 0.0;
  for (const auto& b : bumps) {
    const double r2 = (x - b.x) * (x - b.x) + (y - b.y) * (y - b.y);
    value += b.height * std::exp(-r2 / (2.0 * b.width * b.width));
  }
  return value;
}

HyperSpace quadratic_space() { return HyperSpace({Dimension::continuous("x", 0.0, 1.0)}); }

double quadratic_objective(const Configuration& config) {
  const double gap = config.number("x") - kQuadraticOptimum;
  return -gap * gap;
}

}  // namespace hpo
