#pragma once

#include "hpo/hyperspace.hpp"
#include "hpo/models.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace hpo {

enum class Activation { Elu, Relu, Sigmoid, Tanh, LeakyRelu };
enum class Regularization { None, L1, L2 };

Activation parse_activation(std::string_view label);
Regularization parse_regularization(std::string_view label);

/// Training settings of a multilayer perceptron. `epochs` counts full passes
/// over the training data.
struct MlpConfig {
  std::size_t epochs = 100;
  std::size_t hidden_layers = 1;
  std::size_t nodes_per_layer = 8;
  Activation activation = Activation::Relu;
  bool dropout = false;
  double dropout_input = 0.0;
  double dropout_hidden = 0.0;
  Regularization regularization = Regularization::None;
  double l1 = 0.0;
  double l2 = 0.0;
  double learning_rate = 1e-3;
  std::uint64_t init_seed = 10;
  std::size_t batch_size = 128;

  /// Reads the dimensions of the mlp preset space (native values).
  static MlpConfig from_configuration(const Configuration& config);
  void validate() const;

  /// Penalty coefficients actually applied given the regularization choice.
  double l1_coefficient() const noexcept { return regularization == Regularization::L1 ? l1 : 0.0; }
  double l2_coefficient() const noexcept { return regularization == Regularization::L2 ? l2 : 0.0; }
};

/// Fully connected network with equal-width hidden layers and a softmax
/// output. Weights are Glorot-uniform from `init_seed`, biases zero.
class MlpNetwork {
 public:
  MlpNetwork(std::size_t inputs, std::size_t hidden_layers, std::size_t nodes, std::size_t outputs,
             Activation activation, std::uint64_t init_seed);

  std::size_t parameter_count() const noexcept;
  /// Weights then bias of each layer in order, weights column-major.
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::Ref<const Eigen::VectorXd>& params);

  /// Rows are samples; returns n x outputs probabilities.
  Eigen::MatrixXd predict(const Eigen::MatrixXd& features) const;

  /// Mean cross-entropy plus l1 * sum|W| + l2 * sum W^2 over weight matrices
  /// (biases unpenalized), without dropout. Fills `gradient` in parameters()
  /// order when non-null.
  double loss_and_gradient(const Eigen::MatrixXd& features, std::span<const int> labels, double l1, double l2,
                           Eigen::VectorXd* gradient) const;

  /// One Adam-trained fit; see train_mlp.
  void train(const Eigen::MatrixXd& features, std::span<const int> labels, const MlpConfig& config, std::uint64_t seed);

 private:
  struct Workspace;

  // Forward and backward pass over columns of `inputs` (features x batch).
  // Masks, when given, hold inverted-dropout multipliers per layer input.
  double batch_pass(const Eigen::MatrixXd& inputs, std::span<const int> labels, double l1, double l2,
                    const std::vector<Eigen::MatrixXd>* masks, Workspace& work) const;

  Activation activation_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

/// Trains an MLP on z-scored features. Mini-batch order and dropout masks
/// are drawn from streams derived from `seed`. Throws TrainingFailure when
/// the loss becomes non-finite.
std::unique_ptr<TrainedModel> train_mlp(const Eigen::MatrixXd& features, std::span<const int> labels, int num_classes,
                                        const MlpConfig& config, std::uint64_t seed);

}  // namespace hpo
