#pragma once

#include "hpo/models.hpp"

#include <Eigen/Core>

#include <memory>
#include <span>

namespace hpo {

/// Options of the Newton solver behind train_rbf.
struct KernelLogisticOptions {
  std::size_t max_iterations = 500;
  double gradient_tolerance = 1e-6;
  double jitter = 1e-8;
};

/// RBF-kernel logistic regression. Each binary problem minimizes
///   C * sum_i logloss(f_i) + a'Ka / 2,  f = K a,
/// with K = exp(-gamma |x - x'|^2) + 1 on z-scored features (the constant
/// term plays the role of an intercept). Three or more classes are fit
/// one-vs-rest and the probabilities renormalized.
/// Throws TrainingFailure when Newton's method does not converge.
std::unique_ptr<TrainedModel> train_rbf(const Eigen::MatrixXd& features, std::span<const int> labels, int num_classes,
                                        double C, double gamma, const KernelLogisticOptions& options = {});

/// exp(-gamma |a_i - b_j|^2) for every row pair.
Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double gamma);

}  // namespace hpo
