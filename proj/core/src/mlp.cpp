#include "hpo/mlp.hpp"

#include "hpo/error.hpp"
#include "hpo/rng.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace hpo {
namespace {

constexpr double kLeakySlope = 0.01;
constexpr double kEluAlpha = 1.0;
constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEpsilon = 1e-7;

void activate(const Eigen::MatrixXd& z, Activation activation, Eigen::MatrixXd& out) {
  const auto a = z.array();
  switch (activation) {
    case Activation::Elu: out = (a > 0.0).select(a, kEluAlpha * a.expm1()); return;
    case Activation::Relu: out = a.max(0.0); return;
    case Activation::Sigmoid: out = (1.0 + (-a).exp()).inverse(); return;
    case Activation::Tanh: out = a.tanh(); return;
    case Activation::LeakyRelu: out = (a > 0.0).select(a, kLeakySlope * a); return;
  }
}

// Derivative of the activation, from pre-activations `z` and outputs `h`.
void activation_slope(const Eigen::MatrixXd& z, const Eigen::MatrixXd& h, Activation activation, Eigen::MatrixXd& out) {
  const auto a = z.array();
  switch (activation) {
    case Activation::Elu: out = (a > 0.0).select(Eigen::ArrayXXd::Ones(z.rows(), z.cols()), h.array() + kEluAlpha); return;
    case Activation::Relu: out = (a > 0.0).cast<double>(); return;
    case Activation::Sigmoid: out = h.array() * (1.0 - h.array()); return;
    case Activation::Tanh: out = 1.0 - h.array().square(); return;
    case Activation::LeakyRelu: out = (a > 0.0).select(Eigen::ArrayXXd::Ones(z.rows(), z.cols()), kLeakySlope); return;
  }
}

// Column-wise softmax; writes log-probabilities of each column into `log_p`.
void softmax_columns(const Eigen::MatrixXd& z, Eigen::MatrixXd& p, Eigen::MatrixXd& log_p) {
  p.resize(z.rows(), z.cols());
  log_p.resize(z.rows(), z.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const double top = z.col(j).maxCoeff();
    const double log_total = top + std::log((z.col(j).array() - top).exp().sum());
    log_p.col(j) = z.col(j).array() - log_total;
    p.col(j) = log_p.col(j).array().exp();
  }
}

class MlpModel final : public TrainedModel {
 public:
  MlpModel(Standardizer standardizer, MlpNetwork network, int num_classes)
      : standardizer_(std::move(standardizer)), network_(std::move(network)), num_classes_(num_classes) {}

  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& features) const override {
    return network_.predict(standardizer_.apply(features));
  }
  int num_classes() const noexcept override { return num_classes_; }

 private:
  Standardizer standardizer_;
  MlpNetwork network_;
  int num_classes_;
};

}  // namespace

Activation parse_activation(std::string_view label) {
  if (label == "ELU") return Activation::Elu;
  if (label == "ReLU") return Activation::Relu;
  if (label == "sigmoid") return Activation::Sigmoid;
  if (label == "tanh") return Activation::Tanh;
  if (label == "Leaky ReLU") return Activation::LeakyRelu;
  throw InvalidArgument("unknown activation '" + std::string(label) + "'");
}

Regularization parse_regularization(std::string_view label) {
  if (label == "None") return Regularization::None;
  if (label == "L1") return Regularization::L1;
  if (label == "L2") return Regularization::L2;
  throw InvalidArgument("unknown regularization '" + std::string(label) + "'");
}

MlpConfig MlpConfig::from_configuration(const Configuration& config) {
  MlpConfig out;
  out.epochs = static_cast<std::size_t>(std::llround(config.number("training_iterations")));
  out.hidden_layers = static_cast<std::size_t>(std::llround(config.number("hidden_layers")));
  out.nodes_per_layer = static_cast<std::size_t>(std::llround(config.number("nodes_per_layer")));
  out.activation = parse_activation(config.label("activation"));
  const auto& dropout = config.label("dropout");
  if (dropout != "True" && dropout != "False") throw InvalidArgument("dropout must be True or False");
  out.dropout = dropout == "True";
  out.dropout_input = config.number("dropout_input");
  out.dropout_hidden = config.number("dropout_hidden");
  out.regularization = parse_regularization(config.label("regularization"));
  out.l1 = config.number("l1");
  out.l2 = config.number("l2");
  out.learning_rate = config.number("learning_rate");
  out.init_seed = static_cast<std::uint64_t>(std::llround(config.number("init_seed")));
  out.validate();
  return out;
}

void MlpConfig::validate() const {
  if (epochs == 0) throw InvalidArgument("mlp needs at least one epoch");
  if (hidden_layers == 0 || nodes_per_layer == 0) throw InvalidArgument("mlp needs at least one hidden unit");
  if (!(dropout_input >= 0.0 && dropout_input < 1.0) || !(dropout_hidden >= 0.0 && dropout_hidden < 1.0))
    throw InvalidArgument("dropout rates must lie in [0, 1)");
  if (!(l1 >= 0.0) || !(l2 >= 0.0) || !std::isfinite(l1) || !std::isfinite(l2))
    throw InvalidArgument("regularization terms must be finite and >= 0");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw InvalidArgument("learning rate must be > 0");
  if (batch_size == 0) throw InvalidArgument("batch size must be >= 1");
}

struct MlpNetwork::Workspace {
  std::vector<Eigen::MatrixXd> pre;          // pre-activations per layer
  std::vector<Eigen::MatrixXd> inputs;       // input of each layer, after dropout
  std::vector<Eigen::MatrixXd> outputs;      // hidden activations before dropout
  Eigen::MatrixXd slope;
  Eigen::MatrixXd delta;
  Eigen::MatrixXd back;
  std::vector<Eigen::MatrixXd> grad_weights;
  std::vector<Eigen::VectorXd> grad_biases;
  Eigen::MatrixXd probabilities;
  Eigen::MatrixXd log_probabilities;
};

MlpNetwork::MlpNetwork(std::size_t inputs, std::size_t hidden_layers, std::size_t nodes, std::size_t outputs,
                       Activation activation, std::uint64_t init_seed)
    : activation_(activation) {
  if (inputs == 0 || nodes == 0 || outputs < 2) throw InvalidArgument("invalid network shape");
  Rng rng(derive_seed(init_seed, 0));
  std::size_t fan_in = inputs;
  for (std::size_t l = 0; l <= hidden_layers; ++l) {
    const std::size_t fan_out = l == hidden_layers ? outputs : nodes;
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Eigen::MatrixXd w(static_cast<Eigen::Index>(fan_out), static_cast<Eigen::Index>(fan_in));
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = rng.uniform(-limit, limit);
    weights_.push_back(std::move(w));
    biases_.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fan_out)));
    fan_in = fan_out;
  }
}

std::size_t MlpNetwork::parameter_count() const noexcept {
  std::size_t count = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l)
    count += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
  return count;
}

Eigen::VectorXd MlpNetwork::parameters() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.segment(at, weights_[l].size()) = weights_[l].reshaped();
    at += weights_[l].size();
    out.segment(at, biases_[l].size()) = biases_[l];
    at += biases_[l].size();
  }
  return out;
}

void MlpNetwork::set_parameters(const Eigen::Ref<const Eigen::VectorXd>& params) {
  if (static_cast<std::size_t>(params.size()) != parameter_count()) throw InvalidArgument("parameter vector size mismatch");
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    weights_[l].reshaped() = params.segment(at, weights_[l].size());
    at += weights_[l].size();
    biases_[l] = params.segment(at, biases_[l].size());
    at += biases_[l].size();
  }
}

Eigen::MatrixXd MlpNetwork::predict(const Eigen::MatrixXd& features) const {
  if (features.cols() != weights_.front().cols()) throw InvalidArgument("feature count differs from network input");
  Eigen::MatrixXd a = features.transpose();
  Eigen::MatrixXd z;
  for (std::size_t l = 0; l + 1 < weights_.size(); ++l) {
    z.noalias() = weights_[l] * a;
    z.colwise() += biases_[l];
    activate(z, activation_, a);
  }
  Eigen::MatrixXd p, log_p;
  softmax_columns((weights_.back() * a).colwise() + biases_.back(), p, log_p);
  return p.transpose();
}

double MlpNetwork::batch_pass(const Eigen::MatrixXd& inputs, std::span<const int> labels, double l1, double l2,
                              const std::vector<Eigen::MatrixXd>* masks, Workspace& work) const {
  const std::size_t layers = weights_.size();
  const auto m = inputs.cols();
  work.pre.resize(layers);
  work.inputs.resize(layers);
  work.outputs.resize(layers);
  work.grad_weights.resize(layers);
  work.grad_biases.resize(layers);

  work.inputs[0] = masks ? inputs.cwiseProduct((*masks)[0]) : inputs;
  for (std::size_t l = 0; l < layers; ++l) {
    work.pre[l].noalias() = weights_[l] * work.inputs[l];
    work.pre[l].colwise() += biases_[l];
    if (l + 1 < layers) {
      activate(work.pre[l], activation_, work.outputs[l]);
      if (masks) work.inputs[l + 1] = work.outputs[l].cwiseProduct((*masks)[l + 1]);
      else work.inputs[l + 1] = work.outputs[l];
    }
  }
  softmax_columns(work.pre.back(), work.probabilities, work.log_probabilities);

  double loss = 0.0;
  Eigen::MatrixXd& delta = work.delta;
  delta = work.probabilities;
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto y = labels[static_cast<std::size_t>(j)];
    loss -= work.log_probabilities(y, j);
    delta(y, j) -= 1.0;
  }
  loss /= static_cast<double>(m);
  delta /= static_cast<double>(m);
  for (const auto& w : weights_) loss += l1 * w.cwiseAbs().sum() + l2 * w.squaredNorm();

  for (std::size_t l = layers; l-- > 0;) {
    work.grad_weights[l].noalias() = delta * work.inputs[l].transpose();
    if (l1 > 0.0) work.grad_weights[l] += l1 * weights_[l].unaryExpr([](double v) { return double((v > 0) - (v < 0)); });
    if (l2 > 0.0) work.grad_weights[l] += 2.0 * l2 * weights_[l];
    work.grad_biases[l] = delta.rowwise().sum();
    if (l == 0) break;
    work.back.noalias() = weights_[l].transpose() * delta;
    if (masks) work.back.array() *= (*masks)[l].array();
    activation_slope(work.pre[l - 1], work.outputs[l - 1], activation_, work.slope);
    delta = work.back.cwiseProduct(work.slope);
  }
  return loss;
}

double MlpNetwork::loss_and_gradient(const Eigen::MatrixXd& features, std::span<const int> labels, double l1,
                                     double l2, Eigen::VectorXd* gradient) const {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) throw InvalidArgument("features and labels differ in length");
  Workspace work;
  const double loss = batch_pass(features.transpose(), labels, l1, l2, nullptr, work);
  if (gradient) {
    gradient->resize(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index at = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      gradient->segment(at, work.grad_weights[l].size()) = work.grad_weights[l].reshaped();
      at += work.grad_weights[l].size();
      gradient->segment(at, work.grad_biases[l].size()) = work.grad_biases[l];
      at += work.grad_biases[l].size();
    }
  }
  return loss;
}

void MlpNetwork::train(const Eigen::MatrixXd& features, std::span<const int> labels, const MlpConfig& config,
                       std::uint64_t seed) {
  config.validate();
  const auto n = features.rows();
  if (n == 0 || static_cast<std::size_t>(n) != labels.size()) throw InvalidArgument("features and labels differ in length");
  const Eigen::MatrixXd columns = features.transpose();
  const std::size_t layers = weights_.size();
  const double l1 = config.l1_coefficient();
  const double l2 = config.l2_coefficient();

  std::vector<Eigen::MatrixXd> m_w, v_w;
  std::vector<Eigen::VectorXd> m_b, v_b;
  for (std::size_t l = 0; l < layers; ++l) {
    m_w.push_back(Eigen::MatrixXd::Zero(weights_[l].rows(), weights_[l].cols()));
    v_w.push_back(m_w.back());
    m_b.push_back(Eigen::VectorXd::Zero(biases_[l].size()));
    v_b.push_back(m_b.back());
  }

  Rng order_rng(derive_seed(seed, 1));
  Rng mask_rng(derive_seed(seed, 2));
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<int> batch_labels;
  std::vector<Eigen::MatrixXd> masks(layers);
  Workspace work;
  Eigen::MatrixXd batch;
  double beta1_power = 1.0, beta2_power = 1.0;

  auto draw_mask = [&](Eigen::MatrixXd& mask, Eigen::Index rows, Eigen::Index cols, double rate) {
    mask.resize(rows, cols);
    const double keep = 1.0 / (1.0 - rate);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) mask(i, j) = mask_rng.uniform() < rate ? 0.0 : keep;
  };

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    order_rng.shuffle(order.begin(), order.end());
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const auto m = static_cast<Eigen::Index>(end - start);
      batch.resize(columns.rows(), m);
      batch_labels.resize(static_cast<std::size_t>(m));
      for (Eigen::Index j = 0; j < m; ++j) {
        const std::size_t row = order[start + static_cast<std::size_t>(j)];
        batch.col(j) = columns.col(static_cast<Eigen::Index>(row));
        batch_labels[static_cast<std::size_t>(j)] = labels[row];
      }
      if (config.dropout) {
        draw_mask(masks[0], batch.rows(), m, config.dropout_input);
        for (std::size_t l = 1; l < layers; ++l) draw_mask(masks[l], weights_[l].cols(), m, config.dropout_hidden);
      }
      const double loss = batch_pass(batch, batch_labels, l1, l2, config.dropout ? &masks : nullptr, work);
      if (!std::isfinite(loss)) throw TrainingFailure("mlp training diverged (non-finite loss)");

      beta1_power *= kBeta1;
      beta2_power *= kBeta2;
      const double step = config.learning_rate * std::sqrt(1.0 - beta2_power) / (1.0 - beta1_power);
      for (std::size_t l = 0; l < layers; ++l) {
        m_w[l] = kBeta1 * m_w[l] + (1.0 - kBeta1) * work.grad_weights[l];
        v_w[l] = kBeta2 * v_w[l] + (1.0 - kBeta2) * work.grad_weights[l].cwiseAbs2();
        weights_[l].array() -= step * m_w[l].array() / (v_w[l].array().sqrt() + kAdamEpsilon);
        m_b[l] = kBeta1 * m_b[l] + (1.0 - kBeta1) * work.grad_biases[l];
        v_b[l] = kBeta2 * v_b[l] + (1.0 - kBeta2) * work.grad_biases[l].cwiseAbs2();
        biases_[l].array() -= step * m_b[l].array() / (v_b[l].array().sqrt() + kAdamEpsilon);
      }
    }
  }
  for (std::size_t l = 0; l < layers; ++l)
    if (!weights_[l].allFinite() || !biases_[l].allFinite()) throw TrainingFailure("mlp weights became non-finite");
}

std::unique_ptr<TrainedModel> train_mlp(const Eigen::MatrixXd& features, std::span<const int> labels, int num_classes,
                                        const MlpConfig& config, std::uint64_t seed) {
  if (num_classes < 2) throw InvalidArgument("need at least two classes");
  for (int label : labels)
    if (label < 0 || label >= num_classes) throw InvalidArgument("label out of range");
  Standardizer standardizer(features);
  MlpNetwork network(static_cast<std::size_t>(features.cols()), config.hidden_layers, config.nodes_per_layer,
                     static_cast<std::size_t>(num_classes), config.activation, config.init_seed);
  network.train(standardizer.apply(features), labels, config, seed);
  return std::make_unique<MlpModel>(std::move(standardizer), std::move(network), num_classes);
}

}  // namespace hpo
