#include "hpo/models.hpp"

#include "hpo/error.hpp"
#include "hpo/kernel_logistic.hpp"
#include "hpo/mlp.hpp"

#include <string>
#include <vector>

namespace hpo {
namespace {

std::vector<std::string> required_dimensions(ModelFamily family) {
  switch (family) {
    case ModelFamily::Rbf: return {"C", "gamma"};
    case ModelFamily::Mlp:
      return {"training_iterations", "hidden_layers", "nodes_per_layer", "activation", "dropout", "dropout_input",
              "dropout_hidden", "regularization", "l1", "l2", "learning_rate", "init_seed"};
    case ModelFamily::SyntheticXgb: {
      const HyperSpace space = presets::xgb();
      std::vector<std::string> names;
      for (const auto& dim : space.dims()) names.push_back(dim.name());
      return names;
    }
  }
  return {};
}

HyperSpace preset_space(ModelFamily family) {
  switch (family) {
    case ModelFamily::Rbf: return presets::rbf();
    case ModelFamily::Mlp: return presets::mlp();
    case ModelFamily::SyntheticXgb: return presets::xgb();
  }
  return {};
}

}  // namespace

std::string_view to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::Rbf: return "rbf";
    case ModelFamily::Mlp: return "mlp";
    case ModelFamily::SyntheticXgb: return "synthetic-xgb";
  }
  return "unknown";
}

ModelFamily parse_model_family(std::string_view text) {
  if (text == "rbf") return ModelFamily::Rbf;
  if (text == "mlp") return ModelFamily::Mlp;
  if (text == "synthetic-xgb") return ModelFamily::SyntheticXgb;
  throw InvalidArgument("unknown model family '" + std::string(text) + "' (expected rbf|mlp|synthetic-xgb)");
}

ModelSpec::ModelSpec(ModelFamily family, HyperSpace space) : family_(family), space_(std::move(space)) {
  for (const auto& name : required_dimensions(family_))
    if (!space_.index_of(name))
      throw InvalidArgument("space lacks dimension '" + name + "' required by model family " +
                            std::string(to_string(family_)));
}

ModelSpec::ModelSpec(ModelFamily family) : ModelSpec(family, preset_space(family)) {}

std::unique_ptr<TrainedModel> ModelSpec::train(const Eigen::MatrixXd& features, std::span<const int> labels,
                                               int num_classes, const Configuration& config,
                                               std::uint64_t seed) const {
  space_.validate(config);
  switch (family_) {
    case ModelFamily::Rbf:
      return train_rbf(features, labels, num_classes, config.number("C"), config.number("gamma"));
    case ModelFamily::Mlp:
      return train_mlp(features, labels, num_classes, MlpConfig::from_configuration(config), seed);
    case ModelFamily::SyntheticXgb:
      break;
  }
  throw InvalidArgument("the synthetic-xgb family is an objective and cannot be trained");
}

Standardizer::Standardizer(const Eigen::MatrixXd& features) {
  if (features.rows() == 0) throw InvalidArgument("cannot standardize an empty matrix");
  mean_ = features.colwise().mean();
  scale_.resize(features.cols());
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    const double sd = std::sqrt((features.col(j).array() - mean_(j)).square().sum() / static_cast<double>(features.rows()));
    scale_(j) = sd > 1e-12 ? sd : 1.0;
  }
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& features) const {
  if (features.cols() != mean_.size()) throw InvalidArgument("feature count differs from the fitted standardizer");
  return (features.rowwise() - mean_).array().rowwise() / scale_.array();
}

}  // namespace hpo
