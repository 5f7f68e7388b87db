#include "hpo/cohort.hpp"
#include "hpo/error.hpp"
#include "hpo/features.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

using namespace hpo;

TEST(GeneModules, DefaultsCoverTwentyNineGenes) {
  const auto& modules = default_gene_modules();
  ASSERT_EQ(modules.size(), 6u);
  EXPECT_EQ(modules.front().name, "viral_up");
  const auto order = default_gene_order();
  EXPECT_EQ(order.size(), 29u);
  EXPECT_EQ(std::set<std::string>(order.begin(), order.end()).size(), 29u);
  std::size_t total = 0;
  for (const auto& m : modules) total += m.genes.size();
  EXPECT_EQ(total, 29u);
}

TEST(GeneModules, ParseRoundTripAndErrors) {
  const auto modules = parse_gene_modules("# header\n\nup: A, B ,C\ndown:D\n");
  ASSERT_EQ(modules.size(), 2u);
  EXPECT_EQ(modules[0].genes, (std::vector<std::string>{"A", "B", "C"}));
  EXPECT_EQ(modules[1].name, "down");
  try {
    parse_gene_modules("up: A\nbroken line\n");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_gene_modules("up:\n"), DataError);
  EXPECT_THROW(parse_gene_modules(""), DataError);
}

TEST(ModuleFeatures, GeometricAndArithmeticMeans) {
  Eigen::MatrixXd expr(1, 3);
  expr << 2.0, 8.0, 3.0;
  const auto f = module_features(expr, {{0, 1}, {2}});
  ASSERT_EQ(f.cols(), 3 + 2 + 2);
  EXPECT_EQ(f.row(0).head(3), expr.row(0));
  EXPECT_NEAR(f(0, 3), 4.0, 1e-12);  // sqrt(2 * 8)
  EXPECT_NEAR(f(0, 4), 3.0, 1e-12);
  EXPECT_NEAR(f(0, 5), 5.0, 1e-12);
  EXPECT_NEAR(f(0, 6), 3.0, 1e-12);
}

TEST(ModuleFeatures, GeometricNeverExceedsArithmetic) {
  Eigen::MatrixXd expr = (Eigen::MatrixXd::Random(50, 29).array() * 3.0).exp().matrix();
  const auto idx = module_indices(default_gene_modules(), default_gene_order());
  const auto f = module_features(expr, idx);
  ASSERT_EQ(f.cols(), 41);
  for (Eigen::Index i = 0; i < f.rows(); ++i)
    for (Eigen::Index m = 0; m < 6; ++m) EXPECT_LE(f(i, 29 + m), f(i, 35 + m));
  expr(0, 0) = 0.0;
  EXPECT_THROW(module_features(expr, idx), DataError);
}

TEST(ModuleFeatures, UnknownGeneIsDataError) {
  EXPECT_THROW(module_indices({{"m", {"NOPE"}}}, default_gene_order()), DataError);
}

TEST(Cohort, ShapeGroupsAndLabelCounts) {
  CohortOptions options;
  options.seed = 3;
  const auto ds = generate_synthetic_cohort(options);
  EXPECT_NO_THROW(ds.validate());
  EXPECT_EQ(ds.features.cols(), 41);
  EXPECT_EQ(ds.num_classes, 3);
  const auto groups = ds.distinct_groups();
  EXPECT_EQ(groups.size(), 20u);
  std::map<std::string, std::size_t> sizes;
  for (const auto& g : ds.groups) ++sizes[g];
  for (const auto& [g, s] : sizes) {
    EXPECT_GE(s, 20u);
    EXPECT_LE(s, 40u);
  }
  std::vector<double> counts(3, 0.0);
  for (int y : ds.labels) ++counts[static_cast<std::size_t>(y)];
  const auto rates = class_rates(CohortTask::Bvn, 0.053);
  for (std::size_t c = 0; c < 3; ++c) EXPECT_LE(std::abs(counts[c] - rates[c] * ds.size()), 1.0);
  EXPECT_EQ(std::set<std::string>(ds.sample_ids.begin(), ds.sample_ids.end()).size(), ds.size());
}

TEST(Cohort, MortalityRate) {
  CohortOptions options;
  options.task = CohortTask::Mortality;
  options.seed = 4;
  const auto ds = generate_synthetic_cohort(options);
  EXPECT_EQ(ds.num_classes, 2);
  double events = 0;
  for (int y : ds.labels) events += y;
  EXPECT_LE(std::abs(events - 0.053 * ds.size()), 1.0);
}

TEST(Cohort, DeterministicAndDisjointRanges) {
  CohortOptions options;
  options.seed = 5;
  options.studies = 4;
  const auto a = generate_synthetic_cohort(options);
  const auto b = generate_synthetic_cohort(options);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.labels, b.labels);
  options.first_study = 4;
  const auto held_out = generate_synthetic_cohort(options);
  for (const auto& g : held_out.distinct_groups())
    for (const auto& h : a.distinct_groups()) EXPECT_NE(g, h);
}

TEST(Cohort, BatchEffectScaleZeroRemovesStudyShifts) {
  // Without batch effects, study means of a marker differ only by sampling and
  // composition; with them, the spread grows.
  auto spread = [](double scale) {
    CohortOptions options;
    options.seed = 6;
    options.batch_effect_scale = scale;
    options.composition_concentration = 0.0;
    const auto ds = generate_synthetic_cohort(options);
    std::map<std::string, std::pair<double, double>> sums;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      auto& [s, n] = sums[ds.groups[i]];
      s += std::log(ds.features(static_cast<Eigen::Index>(i), 0));
      n += 1;
    }
    double lo = 1e9, hi = -1e9;
    for (const auto& [g, sn] : sums) {
      lo = std::min(lo, sn.first / sn.second);
      hi = std::max(hi, sn.first / sn.second);
    }
    return hi - lo;
  };
  EXPECT_LT(spread(0.0), spread(3.0));
}

TEST(Cohort, RejectsBadOptions) {
  CohortOptions options;
  options.min_samples = 50;
  options.max_samples = 40;
  EXPECT_THROW(generate_synthetic_cohort(options), InvalidArgument);
  options = {};
  options.studies = 0;
  EXPECT_THROW(generate_synthetic_cohort(options), InvalidArgument);
  EXPECT_THROW(parse_cohort_task("sepsis"), InvalidArgument);
}
