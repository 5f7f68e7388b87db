#pragma once

#include "hpo/hyperspace.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>

namespace hpo {

/// A fitted classifier. Immutable after training and safe to share across
/// threads for prediction.
class TrainedModel {
 public:
  virtual ~TrainedModel() = default;
  /// n x c matrix of class probabilities; rows sum to 1.
  virtual Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& features) const = 0;
  virtual int num_classes() const noexcept = 0;
};

/// Anything that turns (training data, configuration, seed) into a model.
/// Implementations must be deterministic in their inputs and thread-safe.
class Classifier {
 public:
  virtual ~Classifier() = default;
  /// Throws TrainingFailure when training diverges or does not converge.
  virtual std::unique_ptr<TrainedModel> train(const Eigen::MatrixXd& features, std::span<const int> labels,
                                              int num_classes, const Configuration& config,
                                              std::uint64_t seed) const = 0;
};

enum class ModelFamily { Rbf, Mlp, SyntheticXgb };

std::string_view to_string(ModelFamily family);
ModelFamily parse_model_family(std::string_view text);

/// A model family bound to a hyperparameter space. The constructor checks
/// that every dimension the family reads is present in the space.
class ModelSpec final : public Classifier {
 public:
  ModelSpec(ModelFamily family, HyperSpace space);
  /// Family bound to its preset space.
  explicit ModelSpec(ModelFamily family);

  ModelFamily family() const noexcept { return family_; }
  const HyperSpace& space() const noexcept { return space_; }

  /// SyntheticXgb is an objective, not a classifier: training it throws
  /// InvalidArgument.
  std::unique_ptr<TrainedModel> train(const Eigen::MatrixXd& features, std::span<const int> labels, int num_classes,
                                      const Configuration& config, std::uint64_t seed) const override;

 private:
  ModelFamily family_;
  HyperSpace space_;
};

/// Column-wise z-scoring fitted on training data. Constant columns get unit
/// scale.
class Standardizer {
 public:
  Standardizer() = default;
  explicit Standardizer(const Eigen::MatrixXd& features);

  Eigen::MatrixXd apply(const Eigen::MatrixXd& features) const;

 private:
  Eigen::RowVectorXd mean_;
  Eigen::RowVectorXd scale_;
};

}  // namespace hpo
