#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hpo {

/// Real interval [lo, hi] searched on its native scale.
struct Continuous {
  double lo;
  double hi;
};

/// Real interval whose bounds are given in natural-log units. Native values
/// are exp(log_lo) .. exp(log_hi).
struct LogContinuous {
  double log_lo;
  double log_hi;
};

/// Finite, strictly increasing list of numeric values.
struct DiscreteOrdinal {
  std::vector<double> values;
};

/// Finite list of unique labels.
struct Categorical {
  std::vector<std::string> labels;
};

using DimensionKind = std::variant<Continuous, LogContinuous, DiscreteOrdinal, Categorical>;

/// One named hyperparameter. Construction validates the kind's invariants.
class Dimension {
 public:
  Dimension(std::string name, DimensionKind kind);

  static Dimension continuous(std::string name, double lo, double hi);
  static Dimension log_continuous(std::string name, double log_lo, double log_hi);
  static Dimension discrete(std::string name, std::vector<double> values);
  static Dimension categorical(std::string name, std::vector<std::string> labels);

  const std::string& name() const noexcept { return name_; }
  const DimensionKind& kind() const noexcept { return kind_; }

  /// True for Continuous and LogContinuous.
  bool is_continuous() const noexcept;
  bool is_categorical() const noexcept;

  /// Number of admissible values of a discrete or categorical dimension, 0
  /// for continuous ones.
  std::size_t cardinality() const noexcept;

  /// Smallest and largest native numeric value (categorical: index range).
  double native_lo() const noexcept;
  double native_hi() const noexcept;

 private:
  std::string name_;
  DimensionKind kind_;
};

/// A hyperparameter value: a number, or a label for categorical dimensions.
using Value = std::variant<double, std::string>;

/// One value per dimension, keyed by dimension name.
class Configuration {
 public:
  Configuration() = default;

  void set(const std::string& name, Value value) { values_[name] = std::move(value); }

  bool contains(const std::string& name) const { return values_.count(name) != 0; }
  const Value& at(const std::string& name) const;
  double number(const std::string& name) const;
  const std::string& label(const std::string& name) const;

  std::size_t size() const noexcept { return values_.size(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  friend bool operator==(const Configuration&, const Configuration&) = default;

 private:
  std::map<std::string, Value> values_;
};

/// How configurations are embedded for the surrogate.
///  - Original: native values (LogContinuous in log units, categoricals as index).
///  - Transformed: every coordinate mapped to [0, 1].
enum class SpaceMode { Original, Transformed };

enum class GridScale { Linear, Log };

std::string_view to_string(SpaceMode mode);
SpaceMode parse_space_mode(std::string_view text);

/// An ordered, immutable list of dimensions plus the set of continuous
/// dimensions whose decoded value is rounded to the nearest integer.
class HyperSpace {
 public:
  HyperSpace() = default;
  HyperSpace(std::vector<Dimension> dims, std::set<std::string> int_round = {});

  std::size_t size() const noexcept { return dims_.size(); }
  const std::vector<Dimension>& dims() const noexcept { return dims_; }
  const Dimension& dim(std::size_t i) const { return dims_.at(i); }
  std::optional<std::size_t> index_of(std::string_view name) const;
  bool rounds_to_int(const std::string& name) const { return int_round_.count(name) != 0; }
  const std::set<std::string>& int_round() const noexcept { return int_round_; }

  /// Throws InvalidArgument when `config` is not a valid point of the space.
  void validate(const Configuration& config) const;
  bool contains(const Configuration& config) const;

  /// Bounds of coordinate `i` of the encoded box.
  std::pair<double, double> encoded_bounds(std::size_t i, SpaceMode mode) const;

  Eigen::VectorXd encode(const Configuration& config, SpaceMode mode) const;

  /// Inverse of encode. Discrete and categorical coordinates snap to the
  /// nearest rank (half-up); int_round dimensions round half away from zero.
  /// Throws InvalidArgument for coordinates outside the encoded box.
  Configuration decode(const Eigen::Ref<const Eigen::VectorXd>& coords, SpaceMode mode) const;

  /// encode(decode(x)): the representative of x's snapping cell.
  Eigen::VectorXd snap(const Eigen::Ref<const Eigen::VectorXd>& coords, SpaceMode mode) const;

  /// Encoded coordinate of the rank next to `coord` (direction +1 or -1) for
  /// discrete and categorical dimension `i`; `coord` itself at either end.
  double adjacent_rank(std::size_t i, double coord, int dir, SpaceMode mode) const;

 private:
  double round_to_int(std::size_t i, double value) const;
  void check_length(const Eigen::Ref<const Eigen::VectorXd>& coords) const;
  Value decode_coordinate(std::size_t i, double x, SpaceMode mode) const;
  double encode_value(std::size_t i, const Value& value, SpaceMode mode) const;

  std::vector<Dimension> dims_;
  std::set<std::string> int_round_;
  std::vector<bool> round_flags_;
};

/// `n` configurations with every dimension drawn independently and uniformly:
/// Continuous on [lo, hi], LogContinuous uniform in log units then
/// exponentiated, discrete and categorical uniform over their elements.
/// The k-th configuration does not depend on `n` (prefix property).
std::vector<Configuration> sample_uniform(const HyperSpace& space, std::uint64_t seed, std::size_t n);

/// Cartesian grid. Continuous dimensions need an entry in `points_per_dim`;
/// discrete and categorical dimensions use their full value sets. Scale
/// defaults to Linear for Continuous and Log for LogContinuous. Endpoints are
/// exact. The first dimension varies slowest.
std::vector<Configuration> generate_grid(const HyperSpace& space,
                                         const std::map<std::string, std::size_t>& points_per_dim,
                                         const std::map<std::string, GridScale>& scale = {});

namespace presets {

/// RBF kernel classifier: cost C and bandwidth gamma.
HyperSpace rbf();
/// Gradient-boosted tree space, 13 dimensions.
HyperSpace xgb();
/// Multilayer perceptron space, 12 dimensions.
HyperSpace mlp();

std::vector<std::string> names();
/// Throws InvalidArgument for an unknown name.
HyperSpace by_name(std::string_view name);

}  // namespace presets

}  // namespace hpo
