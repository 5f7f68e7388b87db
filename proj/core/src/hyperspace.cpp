#include "hpo/hyperspace.hpp"

#include "hpo/error.hpp"
#include "hpo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hpo {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Slack allowed on interval membership, relative to the interval width.
constexpr double kRangeTolerance = 1e-9;

[[noreturn]] void fail(const std::string& message) { throw InvalidArgument(message); }

bool within(double v, double lo, double hi) {
  const double slack = kRangeTolerance * std::max(1.0, hi - lo);
  return v >= lo - slack && v <= hi + slack;
}

// Nearest rank of u * (m - 1), half-up.
std::size_t nearest_rank(double unit, std::size_t m) {
  if (m <= 1) return 0;
  const double scaled = std::clamp(unit, 0.0, 1.0) * static_cast<double>(m - 1);
  return std::min(static_cast<std::size_t>(std::floor(scaled + 0.5)), m - 1);
}

// Index of the value nearest to v; ties go to the larger value.
std::size_t nearest_value(const std::vector<double>& values, double v) {
  const auto it = std::lower_bound(values.begin(), values.end(), v);
  if (it == values.begin()) return 0;
  if (it == values.end()) return values.size() - 1;
  const auto hi = static_cast<std::size_t>(it - values.begin());
  return (v - values[hi - 1] < values[hi] - v) ? hi - 1 : hi;
}

// Round half away from zero, stepping back inside the native range if needed.
double round_into(const Dimension& d, double value) {
  double r = std::round(value);
  if (r > d.native_hi()) r = std::floor(d.native_hi());
  if (r < d.native_lo()) r = std::ceil(d.native_lo());
  return r;
}

double unit_of_rank(std::size_t rank, std::size_t m) {
  return m <= 1 ? 0.5 : static_cast<double>(rank) / static_cast<double>(m - 1);
}

std::vector<double> spaced(double lo, double hi, std::size_t count, GridScale scale) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = scale == GridScale::Log ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    return out;
  }
  const double steps = static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / steps;
    out[i] = scale == GridScale::Log ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)))
                                     : lo + t * (hi - lo);
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace

Dimension::Dimension(std::string name, DimensionKind kind) : name_(std::move(name)), kind_(std::move(kind)) {
  if (name_.empty()) fail("dimension name must not be empty");
  std::visit(overloaded{
                 [&](const Continuous& c) {
                   if (!std::isfinite(c.lo) || !std::isfinite(c.hi) || !(c.lo < c.hi))
                     fail("dimension '" + name_ + "': continuous bounds need lo < hi");
                 },
                 [&](const LogContinuous& c) {
                   if (!std::isfinite(c.log_lo) || !std::isfinite(c.log_hi) || !(c.log_lo < c.log_hi))
                     fail("dimension '" + name_ + "': log bounds need log_lo < log_hi");
                 },
                 [&](const DiscreteOrdinal& d) {
                   if (d.values.empty()) fail("dimension '" + name_ + "': discrete values must not be empty");
                   for (std::size_t i = 0; i < d.values.size(); ++i) {
                     if (!std::isfinite(d.values[i])) fail("dimension '" + name_ + "': non-finite discrete value");
                     if (i > 0 && !(d.values[i - 1] < d.values[i]))
                       fail("dimension '" + name_ + "': discrete values must be strictly increasing");
                   }
                 },
                 [&](const Categorical& c) {
                   if (c.labels.empty()) fail("dimension '" + name_ + "': categorical labels must not be empty");
                   std::set<std::string> seen(c.labels.begin(), c.labels.end());
                   if (seen.size() != c.labels.size())
                     fail("dimension '" + name_ + "': categorical labels must be unique");
                 },
             },
             kind_);
}

Dimension Dimension::continuous(std::string name, double lo, double hi) {
  return {std::move(name), Continuous{lo, hi}};
}

Dimension Dimension::log_continuous(std::string name, double log_lo, double log_hi) {
  return {std::move(name), LogContinuous{log_lo, log_hi}};
}

Dimension Dimension::discrete(std::string name, std::vector<double> values) {
  return {std::move(name), DiscreteOrdinal{std::move(values)}};
}

Dimension Dimension::categorical(std::string name, std::vector<std::string> labels) {
  return {std::move(name), Categorical{std::move(labels)}};
}

bool Dimension::is_continuous() const noexcept {
  return std::holds_alternative<Continuous>(kind_) || std::holds_alternative<LogContinuous>(kind_);
}

bool Dimension::is_categorical() const noexcept { return std::holds_alternative<Categorical>(kind_); }

std::size_t Dimension::cardinality() const noexcept {
  if (const auto* d = std::get_if<DiscreteOrdinal>(&kind_)) return d->values.size();
  if (const auto* c = std::get_if<Categorical>(&kind_)) return c->labels.size();
  return 0;
}

double Dimension::native_lo() const noexcept {
  return std::visit(overloaded{
                        [](const Continuous& c) { return c.lo; },
                        [](const LogContinuous& c) { return std::exp(c.log_lo); },
                        [](const DiscreteOrdinal& d) { return d.values.front(); },
                        [](const Categorical&) { return 0.0; },
                    },
                    kind_);
}

double Dimension::native_hi() const noexcept {
  return std::visit(overloaded{
                        [](const Continuous& c) { return c.hi; },
                        [](const LogContinuous& c) { return std::exp(c.log_hi); },
                        [](const DiscreteOrdinal& d) { return d.values.back(); },
                        [](const Categorical& c) { return static_cast<double>(c.labels.size() - 1); },
                    },
                    kind_);
}

const Value& Configuration::at(const std::string& name) const {
  const auto it = values_.find(name);
  if (it == values_.end()) fail("configuration has no value for '" + name + "'");
  return it->second;
}

double Configuration::number(const std::string& name) const {
  const auto* v = std::get_if<double>(&at(name));
  if (v == nullptr) fail("configuration value '" + name + "' is not numeric");
  return *v;
}

const std::string& Configuration::label(const std::string& name) const {
  const auto* v = std::get_if<std::string>(&at(name));
  if (v == nullptr) fail("configuration value '" + name + "' is not a label");
  return *v;
}

std::string_view to_string(SpaceMode mode) {
  return mode == SpaceMode::Original ? "original" : "transformed";
}

SpaceMode parse_space_mode(std::string_view text) {
  if (text == "original") return SpaceMode::Original;
  if (text == "transformed") return SpaceMode::Transformed;
  fail("unknown space mode '" + std::string(text) + "' (expected original|transformed)");
}

HyperSpace::HyperSpace(std::vector<Dimension> dims, std::set<std::string> int_round)
    : dims_(std::move(dims)), int_round_(std::move(int_round)) {
  std::set<std::string> names;
  for (const auto& d : dims_) {
    if (!names.insert(d.name()).second) fail("duplicate dimension name '" + d.name() + "'");
  }
  for (const auto& name : int_round_) {
    const auto i = index_of(name);
    if (!i) fail("int_round names unknown dimension '" + name + "'");
    const auto& d = dims_[*i];
    if (!d.is_continuous()) fail("int_round dimension '" + name + "' is not continuous");
    if (std::ceil(d.native_lo()) > std::floor(d.native_hi()))
      fail("int_round dimension '" + name + "' contains no integer");
  }
  round_flags_.resize(dims_.size());
  for (std::size_t i = 0; i < dims_.size(); ++i) round_flags_[i] = int_round_.count(dims_[i].name()) != 0;
}

std::optional<std::size_t> HyperSpace::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (dims_[i].name() == name) return i;
  }
  return std::nullopt;
}

void HyperSpace::validate(const Configuration& config) const {
  if (config.size() != dims_.size())
    fail("configuration has " + std::to_string(config.size()) + " values, space has " +
         std::to_string(dims_.size()) + " dimensions");
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const auto& d = dims_[i];
    if (!config.contains(d.name())) fail("configuration is missing '" + d.name() + "'");
    const Value& value = config.at(d.name());
    std::visit(overloaded{
                   [&](const Categorical& c) {
                     const auto* label = std::get_if<std::string>(&value);
                     if (label == nullptr || std::find(c.labels.begin(), c.labels.end(), *label) == c.labels.end())
                       fail("value of '" + d.name() + "' is not one of its labels");
                   },
                   [&](const auto& kind) {
                     const auto* number = std::get_if<double>(&value);
                     if (number == nullptr || !std::isfinite(*number)) fail("value of '" + d.name() + "' must be a finite number");
                     using Kind = std::decay_t<decltype(kind)>;
                     if constexpr (std::is_same_v<Kind, Continuous>) {
                       if (!within(*number, kind.lo, kind.hi)) fail("value of '" + d.name() + "' is out of range");
                     } else if constexpr (std::is_same_v<Kind, LogContinuous>) {
                       if (!(*number > 0.0) || !within(std::log(*number), kind.log_lo, kind.log_hi))
                         fail("value of '" + d.name() + "' is out of range");
                     } else {
                       if (!std::binary_search(kind.values.begin(), kind.values.end(), *number))
                         fail("value of '" + d.name() + "' is not one of its discrete values");
                     }
                     if (rounds_to_int(d.name()) && std::round(*number) != *number)
                       fail("value of '" + d.name() + "' must be an integer");
                   },
               },
               d.kind());
  }
}

bool HyperSpace::contains(const Configuration& config) const {
  try {
    validate(config);
    return true;
  } catch (const InvalidArgument&) {
    return false;
  }
}

std::pair<double, double> HyperSpace::encoded_bounds(std::size_t i, SpaceMode mode) const {
  if (mode == SpaceMode::Transformed) return {0.0, 1.0};
  return std::visit(overloaded{
                        [](const Continuous& c) { return std::pair{c.lo, c.hi}; },
                        [](const LogContinuous& c) { return std::pair{c.log_lo, c.log_hi}; },
                        [](const DiscreteOrdinal& d) { return std::pair{d.values.front(), d.values.back()}; },
                        [](const Categorical& c) {
                          return std::pair{0.0, static_cast<double>(c.labels.size() - 1)};
                        },
                    },
                    dims_.at(i).kind());
}

Eigen::VectorXd HyperSpace::encode(const Configuration& config, SpaceMode mode) const {
  validate(config);
  Eigen::VectorXd out(static_cast<Eigen::Index>(dims_.size()));
  for (std::size_t i = 0; i < dims_.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = encode_value(i, config.at(dims_[i].name()), mode);
  return out;
}

double HyperSpace::round_to_int(std::size_t i, double value) const { return round_into(dims_[i], value); }

Value HyperSpace::decode_coordinate(std::size_t i, double x, SpaceMode mode) const {
  const auto& d = dims_[i];
  const bool unit = mode == SpaceMode::Transformed;
  const auto [lo, hi] = encoded_bounds(i, mode);
  if (!std::isfinite(x) || !within(x, lo, hi))
    fail("coordinate " + std::to_string(i) + " ('" + d.name() + "') out of range");
  const double clamped = std::clamp(x, lo, hi);

  Value value = std::visit(
      overloaded{
          [&](const Continuous& c) -> Value {
            return unit ? c.lo + clamped * (c.hi - c.lo) : clamped;
          },
          [&](const LogContinuous& c) -> Value {
            return std::exp(unit ? c.log_lo + clamped * (c.log_hi - c.log_lo) : clamped);
          },
          [&](const DiscreteOrdinal& dv) -> Value {
            const std::size_t rank =
                unit ? nearest_rank(clamped, dv.values.size()) : nearest_value(dv.values, clamped);
            return dv.values[rank];
          },
          [&](const Categorical& c) -> Value {
            const std::size_t m = c.labels.size();
            const std::size_t rank =
                unit ? nearest_rank(clamped, m) : std::min(static_cast<std::size_t>(std::floor(clamped + 0.5)), m - 1);
            return c.labels[rank];
          },
      },
      d.kind());
  // exp() of a log bound can land an ulp outside the native interval.
  if (const auto* lc = std::get_if<LogContinuous>(&d.kind())) {
    value = std::clamp(std::get<double>(value), std::exp(lc->log_lo), std::exp(lc->log_hi));
  }
  if (round_flags_[i]) value = round_to_int(i, std::get<double>(value));
  return value;
}

double HyperSpace::encode_value(std::size_t i, const Value& value, SpaceMode mode) const {
  const bool unit = mode == SpaceMode::Transformed;
  return std::visit(
      overloaded{
          [&](const Continuous& c) {
            const double v = std::get<double>(value);
            return unit ? std::clamp((v - c.lo) / (c.hi - c.lo), 0.0, 1.0) : v;
          },
          [&](const LogContinuous& c) {
            const double v = std::log(std::get<double>(value));
            return unit ? std::clamp((v - c.log_lo) / (c.log_hi - c.log_lo), 0.0, 1.0) : v;
          },
          [&](const DiscreteOrdinal& d) {
            const double v = std::get<double>(value);
            const auto rank =
                static_cast<std::size_t>(std::lower_bound(d.values.begin(), d.values.end(), v) - d.values.begin());
            return unit ? unit_of_rank(rank, d.values.size()) : v;
          },
          [&](const Categorical& c) {
            const auto& label = std::get<std::string>(value);
            const auto rank =
                static_cast<std::size_t>(std::find(c.labels.begin(), c.labels.end(), label) - c.labels.begin());
            return unit ? unit_of_rank(rank, c.labels.size()) : static_cast<double>(rank);
          },
      },
      dims_[i].kind());
}

void HyperSpace::check_length(const Eigen::Ref<const Eigen::VectorXd>& coords) const {
  if (static_cast<std::size_t>(coords.size()) != dims_.size())
    fail("encoded vector has length " + std::to_string(coords.size()) + ", space has " +
         std::to_string(dims_.size()) + " dimensions");
}

Configuration HyperSpace::decode(const Eigen::Ref<const Eigen::VectorXd>& coords, SpaceMode mode) const {
  check_length(coords);
  Configuration config;
  for (std::size_t i = 0; i < dims_.size(); ++i)
    config.set(dims_[i].name(), decode_coordinate(i, coords(static_cast<Eigen::Index>(i)), mode));
  return config;
}

Eigen::VectorXd HyperSpace::snap(const Eigen::Ref<const Eigen::VectorXd>& coords, SpaceMode mode) const {
  check_length(coords);
  Eigen::VectorXd out(coords.size());
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const auto at = static_cast<Eigen::Index>(i);
    out(at) = encode_value(i, decode_coordinate(i, coords(at), mode), mode);
  }
  return out;
}

double HyperSpace::adjacent_rank(std::size_t i, double coord, int dir, SpaceMode mode) const {
  const auto& d = dims_.at(i);
  const std::size_t m = d.cardinality();
  if (m <= 1) return coord;
  std::size_t rank;
  if (mode == SpaceMode::Transformed) {
    rank = nearest_rank(coord, m);
  } else if (const auto* dv = std::get_if<DiscreteOrdinal>(&d.kind())) {
    rank = nearest_value(dv->values, coord);
  } else {
    rank = std::min(static_cast<std::size_t>(std::floor(std::max(coord, 0.0) + 0.5)), m - 1);
  }
  if ((dir < 0 && rank == 0) || (dir > 0 && rank + 1 >= m)) return coord;
  rank = dir > 0 ? rank + 1 : rank - 1;
  if (mode == SpaceMode::Transformed) return unit_of_rank(rank, m);
  if (const auto* dv = std::get_if<DiscreteOrdinal>(&d.kind())) return dv->values[rank];
  return static_cast<double>(rank);
}

std::vector<Configuration> sample_uniform(const HyperSpace& space, std::uint64_t seed, std::size_t n) {
  if (n == 0) fail("sample_uniform needs n >= 1");
  Rng rng(seed);
  std::vector<Configuration> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Configuration config;
    for (std::size_t i = 0; i < space.size(); ++i) {
      const auto& d = space.dim(i);
      Value value = std::visit(overloaded{
                                   [&](const Continuous& c) -> Value { return rng.uniform(c.lo, c.hi); },
                                   [&](const LogContinuous& c) -> Value {
                                     return std::exp(rng.uniform(c.log_lo, c.log_hi));
                                   },
                                   [&](const DiscreteOrdinal& dv) -> Value {
                                     return dv.values[rng.index(dv.values.size())];
                                   },
                                   [&](const Categorical& c) -> Value { return c.labels[rng.index(c.labels.size())]; },
                               },
                               d.kind());
      if (space.rounds_to_int(d.name())) value = round_into(d, std::get<double>(value));
      config.set(d.name(), std::move(value));
    }
    out.push_back(std::move(config));
  }
  return out;
}

std::vector<Configuration> generate_grid(const HyperSpace& space,
                                         const std::map<std::string, std::size_t>& points_per_dim,
                                         const std::map<std::string, GridScale>& scale) {
  std::vector<std::vector<Value>> axes;
  axes.reserve(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& d = space.dim(i);
    std::vector<Value> axis;
    if (d.is_continuous()) {
      const auto count_it = points_per_dim.find(d.name());
      if (count_it == points_per_dim.end()) fail("no grid point count for continuous dimension '" + d.name() + "'");
      if (count_it->second == 0) fail("grid point count for '" + d.name() + "' must be >= 1");
      const bool is_log_dim = std::holds_alternative<LogContinuous>(d.kind());
      const auto scale_it = scale.find(d.name());
      const GridScale s = scale_it != scale.end() ? scale_it->second : (is_log_dim ? GridScale::Log : GridScale::Linear);
      const double lo = d.native_lo();
      const double hi = d.native_hi();
      if (s == GridScale::Log && lo <= 0.0)
        fail("log grid on '" + d.name() + "' needs a strictly positive range");
      for (double v : spaced(lo, hi, count_it->second, s)) {
        if (space.rounds_to_int(d.name())) {
          v = std::clamp(std::round(v), std::ceil(lo), std::floor(hi));
          if (!axis.empty() && std::get<double>(axis.back()) == v) continue;
        }
        axis.emplace_back(v);
      }
    } else if (const auto* dv = std::get_if<DiscreteOrdinal>(&d.kind())) {
      axis.assign(dv->values.begin(), dv->values.end());
    } else {
      const auto& labels = std::get<Categorical>(d.kind()).labels;
      axis.assign(labels.begin(), labels.end());
    }
    axes.push_back(std::move(axis));
  }

  std::size_t total = 1;
  for (const auto& axis : axes) total *= axis.size();
  std::vector<Configuration> out;
  out.reserve(total);
  std::vector<std::size_t> cursor(axes.size(), 0);
  for (std::size_t k = 0; k < total; ++k) {
    Configuration config;
    for (std::size_t i = 0; i < axes.size(); ++i) config.set(space.dim(i).name(), axes[i][cursor[i]]);
    out.push_back(std::move(config));
    for (std::size_t i = axes.size(); i-- > 0;) {
      if (++cursor[i] < axes[i].size()) break;
      cursor[i] = 0;
    }
  }
  return out;
}

namespace presets {

HyperSpace rbf() {
  return HyperSpace({
      Dimension::continuous("C", 1e-3, 2.15),
      Dimension::continuous("gamma", 1.12e-4, 10.0),
  });
}

HyperSpace xgb() {
  return HyperSpace({
      Dimension::categorical("booster", {"gbtree", "gblinear", "dart"}),
      Dimension::continuous("gamma", 0.0, 5.0),
      Dimension::continuous("learning_rate", 0.001, 0.1),
      Dimension::continuous("reg_alpha", 0.0, 1.0),
      Dimension::continuous("reg_lambda", 0.0, 4.5),
      Dimension::discrete("max_delta_step", {0, 1}),
      Dimension::discrete("max_depth", {3, 4, 5, 6, 7, 8, 9, 10}),
      Dimension::discrete("min_child_weight", {1, 2, 3, 4, 5}),
      Dimension::log_continuous("n_estimators", 4.60517, 6.907755),
      Dimension::continuous("colsample_bylevel", 0.7, 1.0),
      Dimension::continuous("colsample_bynode", 0.5, 1.0),
      Dimension::continuous("colsample_bytree", 0.7, 1.0),
      Dimension::continuous("subsample", 0.3, 1.0),
  });
}

HyperSpace mlp() {
  std::vector<double> widths(20);
  std::iota(widths.begin(), widths.end(), 2.0);
  std::vector<double> seeds(10000 - 10 + 1);
  std::iota(seeds.begin(), seeds.end(), 10.0);
  return HyperSpace({
      Dimension::discrete("training_iterations", {50, 100, 250, 500, 1000, 2500}),
      Dimension::discrete("hidden_layers", {1, 2, 3, 4, 5}),
      Dimension::discrete("nodes_per_layer", std::move(widths)),
      Dimension::categorical("activation", {"ELU", "ReLU", "sigmoid", "tanh", "Leaky ReLU"}),
      Dimension::categorical("dropout", {"True", "False"}),
      Dimension::continuous("dropout_input", 0.0, 0.5),
      Dimension::continuous("dropout_hidden", 0.0, 0.5),
      Dimension::categorical("regularization", {"None", "L1", "L2"}),
      Dimension::log_continuous("l1", -11.512925464970229, 0.0),
      Dimension::log_continuous("l2", -11.512925464970229, 0.0),
      Dimension::log_continuous("learning_rate", -11.512925464970229, -2.3025850929940455),
      Dimension::discrete("init_seed", std::move(seeds)),
  });
}

std::vector<std::string> names() { return {"rbf", "xgb", "mlp"}; }

HyperSpace by_name(std::string_view name) {
  if (name == "rbf") return rbf();
  if (name == "xgb") return xgb();
  if (name == "mlp") return mlp();
  fail("unknown space preset '" + std::string(name) + "'");
}

}  // namespace presets

}  // namespace hpo
