#include "hpo/error.hpp"
#include "hpo/hyperspace.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace hpo;

namespace {

// Two-sided Kolmogorov-Smirnov statistic of `u` against Uniform(0, 1).
double ks_uniform(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    d = std::max(d, static_cast<double>(i + 1) / n - u[i]);
    d = std::max(d, u[i] - static_cast<double>(i) / n);
  }
  return d;
}

}  // namespace

TEST(Dimension, RejectsInvalidKinds) {
  EXPECT_THROW(Dimension::continuous("x", 1.0, 1.0), InvalidArgument);
  EXPECT_THROW(Dimension::continuous("x", 2.0, 1.0), InvalidArgument);
  EXPECT_THROW(Dimension::log_continuous("x", 0.0, 0.0), InvalidArgument);
  EXPECT_THROW(Dimension::discrete("x", {}), InvalidArgument);
  EXPECT_THROW(Dimension::discrete("x", {1.0, 1.0}), InvalidArgument);
  EXPECT_THROW(Dimension::discrete("x", {2.0, 1.0}), InvalidArgument);
  EXPECT_THROW(Dimension::categorical("x", {}), InvalidArgument);
  EXPECT_THROW(Dimension::categorical("x", {"a", "a"}), InvalidArgument);
  EXPECT_THROW(Dimension::continuous("", 0.0, 1.0), InvalidArgument);
}

TEST(HyperSpace, RejectsDuplicateNamesAndBadIntRound) {
  EXPECT_THROW(HyperSpace({Dimension::continuous("x", 0, 1), Dimension::continuous("x", 0, 2)}), InvalidArgument);
  EXPECT_THROW(HyperSpace({Dimension::discrete("k", {1, 2})}, {"k"}), InvalidArgument);
  EXPECT_THROW(HyperSpace({Dimension::continuous("x", 0, 1)}, {"missing"}), InvalidArgument);
}

TEST(HyperSpace, ValidateChecksEveryValue) {
  const HyperSpace space({Dimension::continuous("x", 0, 1), Dimension::categorical("c", {"a", "b"})});
  Configuration ok;
  ok.set("x", 0.5);
  ok.set("c", std::string("b"));
  EXPECT_NO_THROW(space.validate(ok));

  Configuration outside = ok;
  outside.set("x", 1.5);
  EXPECT_THROW(space.validate(outside), InvalidArgument);
  Configuration unknown_label = ok;
  unknown_label.set("c", std::string("z"));
  EXPECT_FALSE(space.contains(unknown_label));
  Configuration missing;
  missing.set("x", 0.5);
  EXPECT_FALSE(space.contains(missing));
  Configuration extra = ok;
  extra.set("y", 1.0);
  EXPECT_FALSE(space.contains(extra));
}

TEST(SampleUniform, ReproducibleAndInRange) {
  const HyperSpace space({Dimension::continuous("x", 0.0, 1.0)});
  const auto a = sample_uniform(space, 42, 3);
  const auto b = sample_uniform(space, 42, 3);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a, b);
  for (const auto& c : a) {
    EXPECT_GE(c.number("x"), 0.0);
    EXPECT_LE(c.number("x"), 1.0);
  }
  EXPECT_NE(sample_uniform(space, 43, 3), a);
}

TEST(SampleUniform, PrefixProperty) {
  const auto space = presets::xgb();
  const auto long_run = sample_uniform(space, 9, 100);
  const auto short_run = sample_uniform(space, 9, 50);
  EXPECT_TRUE(std::equal(short_run.begin(), short_run.end(), long_run.begin()));
}

TEST(SampleUniform, LogContinuousWithinExponentiatedBounds) {
  const HyperSpace space({Dimension::log_continuous("n_estimators", 4.60517, 6.907755)});
  for (const auto& c : sample_uniform(space, 7, 2000)) {
    EXPECT_GE(c.number("n_estimators"), 100.0 - 1e-3);
    EXPECT_LE(c.number("n_estimators"), 1000.0 + 1e-3);
  }
}

TEST(SampleUniform, CategoricalFrequencies) {
  const HyperSpace space({Dimension::categorical("booster", {"gbtree", "gblinear", "dart"})});
  std::map<std::string, int> counts;
  for (const auto& c : sample_uniform(space, 2024, 10000)) ++counts[c.label("booster")];
  for (const auto& label : {"gbtree", "gblinear", "dart"}) {
    const double f = counts[label] / 10000.0;
    EXPECT_GE(f, 0.30) << label;
    EXPECT_LE(f, 0.37) << label;
  }
}

TEST(SampleUniform, MarginalsPassKolmogorovSmirnov) {
  const HyperSpace space({Dimension::continuous("a", -3.0, 5.0), Dimension::log_continuous("b", -11.5, 0.0),
                          Dimension::continuous("c", 0.0, 1.0)});
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto samples = sample_uniform(space, seed, 10000);
    std::vector<double> a, b, c;
    for (const auto& s : samples) {
      a.push_back((s.number("a") + 3.0) / 8.0);
      b.push_back((std::log(s.number("b")) + 11.5) / 11.5);
      c.push_back(s.number("c"));
    }
    EXPECT_LT(ks_uniform(a), 0.02);
    EXPECT_LT(ks_uniform(b), 0.02);
    EXPECT_LT(ks_uniform(c), 0.02);
  }
}

TEST(SampleUniform, DiscreteElementsAllReached) {
  const HyperSpace space({Dimension::discrete("d", {3, 4, 5, 6, 7, 8, 9, 10})});
  std::set<double> seen;
  for (const auto& c : sample_uniform(space, 5, 500)) seen.insert(c.number("d"));
  EXPECT_EQ(seen.size(), 8u);
}

TEST(Grid, LogEndpointsForced) {
  const auto grid = generate_grid(presets::rbf(), {{"C", 2}, {"gamma", 1}}, {{"C", GridScale::Log}});
  ASSERT_EQ(grid.size(), 2u);
  EXPECT_EQ(grid[0].number("C"), 1e-3);
  EXPECT_EQ(grid[1].number("C"), 2.15);
}

TEST(Grid, GeometricMidpoint) {
  const HyperSpace space({Dimension::continuous("gamma", 1.12e-4, 10.0)});
  const auto grid = generate_grid(space, {{"gamma", 3}}, {{"gamma", GridScale::Log}});
  ASSERT_EQ(grid.size(), 3u);
  EXPECT_NEAR(grid[1].number("gamma"), 0.0334664, 1e-6);
  EXPECT_NEAR(grid[1].number("gamma"), std::sqrt(1.12e-4 * 10.0), 1e-15);
}

TEST(Grid, ProductCountOrderAndNoDuplicates) {
  const HyperSpace space({Dimension::continuous("a", 0, 1), Dimension::continuous("b", 0, 1)});
  const auto grid = generate_grid(space, {{"a", 2}, {"b", 3}});
  ASSERT_EQ(grid.size(), 6u);
  EXPECT_EQ(grid[0].number("a"), 0.0);
  EXPECT_EQ(grid[2].number("a"), 0.0);
  EXPECT_EQ(grid[3].number("a"), 1.0);
  EXPECT_EQ(grid[1].number("b"), 0.5);
  std::set<std::pair<double, double>> unique;
  for (const auto& c : grid) unique.emplace(c.number("a"), c.number("b"));
  EXPECT_EQ(unique.size(), 6u);
}

TEST(Grid, DiscreteAndCategoricalUseFullSets) {
  const HyperSpace space({Dimension::discrete("k", {1, 2, 3}), Dimension::categorical("c", {"x", "y"}),
                          Dimension::continuous("r", 0, 1)});
  EXPECT_EQ(generate_grid(space, {{"r", 4}}).size(), 24u);
  EXPECT_THROW(generate_grid(space, {}), InvalidArgument);
}

TEST(Grid, RejectsLogScaleOnNonPositiveRange) {
  const HyperSpace space({Dimension::continuous("gamma", 0.0, 5.0)});
  EXPECT_THROW(generate_grid(space, {{"gamma", 3}}, {{"gamma", GridScale::Log}}), InvalidArgument);
  EXPECT_THROW(generate_grid(space, {{"gamma", 0}}), InvalidArgument);
}

TEST(Grid, RbfDefaultGridIsLogSpaced) {
  // Log spacing is pinned for the rbf preset: mid-points are geometric.
  const auto grid = generate_grid(presets::rbf(), {{"C", 3}, {"gamma", 1}},
                                  {{"C", GridScale::Log}, {"gamma", GridScale::Log}});
  EXPECT_NEAR(grid[1].number("C"), std::sqrt(1e-3 * 2.15), 1e-15);
}

TEST(Encode, TransformedExamples) {
  const HyperSpace space({Dimension::continuous("x", 0.0, 10.0), Dimension::discrete("max_depth", {3, 4, 5, 6, 7, 8, 9, 10}),
                          Dimension::log_continuous("l1", -11.512925464970229, 0.0)});
  Configuration c;
  c.set("x", 5.0);
  c.set("max_depth", 6.0);
  c.set("l1", 1.0);
  const auto u = space.encode(c, SpaceMode::Transformed);
  EXPECT_DOUBLE_EQ(u(0), 0.5);
  EXPECT_DOUBLE_EQ(u(1), 3.0 / 7.0);
  EXPECT_DOUBLE_EQ(u(2), 1.0);

  const auto native = space.encode(c, SpaceMode::Original);
  EXPECT_DOUBLE_EQ(native(0), 5.0);
  EXPECT_DOUBLE_EQ(native(1), 6.0);
  EXPECT_DOUBLE_EQ(native(2), 0.0);  // log units
}

TEST(Encode, SingleValueDiscreteSitsAtHalf) {
  const HyperSpace space({Dimension::discrete("k", {4}), Dimension::categorical("c", {"only"})});
  Configuration c;
  c.set("k", 4.0);
  c.set("c", std::string("only"));
  const auto u = space.encode(c, SpaceMode::Transformed);
  EXPECT_EQ(u(0), 0.5);
  EXPECT_EQ(u(1), 0.5);
}

TEST(Encode, RejectsOutOfRange) {
  const HyperSpace space({Dimension::continuous("x", 0.0, 10.0)});
  Configuration c;
  c.set("x", 11.0);
  EXPECT_THROW(space.encode(c, SpaceMode::Transformed), InvalidArgument);
}

TEST(Decode, Examples) {
  const HyperSpace logs({Dimension::log_continuous("l1", -11.512925464970229, 0.0)});
  EXPECT_NEAR(logs.decode(Eigen::VectorXd::Constant(1, 0.0), SpaceMode::Transformed).number("l1"), 1e-5, 1e-9);
  EXPECT_EQ(logs.decode(Eigen::VectorXd::Constant(1, 1.0), SpaceMode::Transformed).number("l1"), 1.0);

  const HyperSpace rounds({Dimension::log_continuous("n_estimators", 4.60517, 6.907755)});
  EXPECT_NEAR(rounds.decode(Eigen::VectorXd::Constant(1, 1.0), SpaceMode::Transformed).number("n_estimators"), 1000.0,
              1e-2);

  const HyperSpace binary({Dimension::discrete("max_delta_step", {0, 1})});
  EXPECT_EQ(binary.decode(Eigen::VectorXd::Constant(1, 0.49), SpaceMode::Transformed).number("max_delta_step"), 0.0);
  EXPECT_EQ(binary.decode(Eigen::VectorXd::Constant(1, 0.5), SpaceMode::Transformed).number("max_delta_step"), 1.0);
}

TEST(Decode, RejectsOutOfBoxCoordinates) {
  const HyperSpace space({Dimension::continuous("x", 0.0, 1.0)});
  EXPECT_THROW(space.decode(Eigen::VectorXd::Constant(1, 1.5), SpaceMode::Transformed), InvalidArgument);
  EXPECT_THROW(space.decode(Eigen::VectorXd::Constant(2, 0.5), SpaceMode::Transformed), InvalidArgument);
}

TEST(Decode, IntRoundHalfAwayFromZero) {
  const HyperSpace space({Dimension::continuous("w", -5.0, 5.0)}, {"w"});
  auto decode = [&](double v) { return space.decode(Eigen::VectorXd::Constant(1, v), SpaceMode::Original).number("w"); };
  EXPECT_EQ(decode(2.5), 3.0);
  EXPECT_EQ(decode(-2.5), -3.0);
  EXPECT_EQ(decode(2.49), 2.0);
  EXPECT_EQ(decode(0.4), 0.0);
}

TEST(Encode, RoundTripOnRandomSpaces) {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const auto space = hpo::testing::random_space(rng);
    for (const auto& config : sample_uniform(space, rng.next_u64(), 5)) {
      for (auto mode : {SpaceMode::Original, SpaceMode::Transformed}) {
        const auto x = space.encode(config, mode);
        const auto back = space.decode(x, mode);
        ASSERT_TRUE(space.contains(back));
        for (const auto& dim : space.dims()) {
          const auto& v = config.at(dim.name());
          if (std::holds_alternative<std::string>(v)) {
            EXPECT_EQ(back.label(dim.name()), std::get<std::string>(v));
          } else {
            const double scale = std::max(1.0, std::abs(std::get<double>(v)));
            EXPECT_NEAR(back.number(dim.name()), std::get<double>(v), 1e-9 * scale) << dim.name();
          }
        }
        if (mode == SpaceMode::Transformed) {
          EXPECT_TRUE((x.array() >= 0.0).all() && (x.array() <= 1.0).all());
        }
      }
    }
  }
}

TEST(Encode, ThousandConfigRoundTripOnPresets) {
  for (const auto& name : presets::names()) {
    const auto space = presets::by_name(name);
    for (const auto& config : sample_uniform(space, 11, 1000)) {
      for (auto mode : {SpaceMode::Original, SpaceMode::Transformed}) {
        const auto back = space.decode(space.encode(config, mode), mode);
        for (const auto& dim : space.dims()) {
          const auto& v = config.at(dim.name());
          if (const auto* d = std::get_if<double>(&v))
            ASSERT_NEAR(back.number(dim.name()), *d, 1e-9 * std::max(1.0, std::abs(*d)));
          else
            ASSERT_EQ(back.label(dim.name()), std::get<std::string>(v));
        }
      }
    }
  }
}

TEST(Snap, IdempotentAndInsideBox) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto space = hpo::testing::random_space(rng);
    Eigen::VectorXd x(static_cast<Eigen::Index>(space.size()));
    for (std::size_t h = 0; h < space.size(); ++h) {
      const auto [lo, hi] = space.encoded_bounds(h, SpaceMode::Transformed);
      x(static_cast<Eigen::Index>(h)) = rng.uniform(lo, hi);
    }
    const auto once = space.snap(x, SpaceMode::Transformed);
    const auto twice = space.snap(once, SpaceMode::Transformed);
    for (Eigen::Index i = 0; i < once.size(); ++i) EXPECT_NEAR(once(i), twice(i), 1e-12);
  }
}

TEST(Presets, XgbMatchesTable) {
  const auto space = presets::xgb();
  ASSERT_EQ(space.size(), 13u);
  const std::vector<std::string> names{"booster",          "gamma",           "learning_rate",  "reg_alpha",
                                       "reg_lambda",       "max_delta_step",  "max_depth",      "min_child_weight",
                                       "n_estimators",     "colsample_bylevel", "colsample_bynode", "colsample_bytree",
                                       "subsample"};
  for (std::size_t h = 0; h < names.size(); ++h) EXPECT_EQ(space.dim(h).name(), names[h]);
  EXPECT_EQ(std::get<Categorical>(space.dim(0).kind()).labels, (std::vector<std::string>{"gbtree", "gblinear", "dart"}));
  const auto& lr = std::get<Continuous>(space.dim(2).kind());
  EXPECT_EQ(lr.lo, 0.001);
  EXPECT_EQ(lr.hi, 0.1);
  const auto& depth = std::get<DiscreteOrdinal>(space.dim(6).kind());
  EXPECT_EQ(depth.values, (std::vector<double>{3, 4, 5, 6, 7, 8, 9, 10}));
  const auto& rounds = std::get<LogContinuous>(space.dim(8).kind());
  EXPECT_EQ(rounds.log_lo, 4.60517);
  EXPECT_EQ(rounds.log_hi, 6.907755);
  const auto& subsample = std::get<Continuous>(space.dim(12).kind());
  EXPECT_EQ(subsample.lo, 0.3);
  EXPECT_EQ(subsample.hi, 1.0);
}

TEST(Presets, MlpMatchesTable) {
  const auto space = presets::mlp();
  ASSERT_EQ(space.size(), 12u);
  EXPECT_EQ(std::get<DiscreteOrdinal>(space.dim(0).kind()).values, (std::vector<double>{50, 100, 250, 500, 1000, 2500}));
  EXPECT_EQ(std::get<DiscreteOrdinal>(space.dim(1).kind()).values, (std::vector<double>{1, 2, 3, 4, 5}));
  const auto& widths = std::get<DiscreteOrdinal>(space.dim(2).kind()).values;
  EXPECT_EQ(widths.front(), 2.0);
  EXPECT_EQ(widths.back(), 21.0);
  EXPECT_EQ(widths.size(), 20u);
  EXPECT_EQ(std::get<Categorical>(space.dim(3).kind()).labels,
            (std::vector<std::string>{"ELU", "ReLU", "sigmoid", "tanh", "Leaky ReLU"}));
  const auto& seeds = std::get<DiscreteOrdinal>(space.dim(11).kind()).values;
  EXPECT_EQ(seeds.front(), 10.0);
  EXPECT_EQ(seeds.back(), 10000.0);
  EXPECT_EQ(seeds.size(), 9991u);
  const auto& l2 = std::get<LogContinuous>(space.dim(9).kind());
  EXPECT_EQ(l2.log_lo, -11.512925464970229);
  EXPECT_EQ(l2.log_hi, 0.0);
  const auto& lr = std::get<LogContinuous>(space.dim(10).kind());
  EXPECT_EQ(lr.log_hi, -2.3025850929940455);
}

TEST(Presets, RbfRanges) {
  const auto space = presets::rbf();
  ASSERT_EQ(space.size(), 2u);
  EXPECT_EQ(std::get<Continuous>(space.dim(0).kind()).lo, 1e-3);
  EXPECT_EQ(std::get<Continuous>(space.dim(0).kind()).hi, 2.15);
  EXPECT_EQ(std::get<Continuous>(space.dim(1).kind()).lo, 1.12e-4);
  EXPECT_EQ(std::get<Continuous>(space.dim(1).kind()).hi, 10.0);
  EXPECT_THROW(presets::by_name("svm"), InvalidArgument);
}

TEST(SpaceMode, ParsesBothSpellings) {
  EXPECT_EQ(parse_space_mode("original"), SpaceMode::Original);
  EXPECT_EQ(parse_space_mode("transformed"), SpaceMode::Transformed);
  EXPECT_THROW(parse_space_mode("unit"), InvalidArgument);
}
