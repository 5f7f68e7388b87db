#include "hpo/acquisition.hpp"
#include "hpo/error.hpp"
#include "hpo/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace hpo;

namespace {

// E[max(Y - threshold, 0)] for Y ~ N(mean, sd^2), by Simpson's rule.
double ei_quadrature(double mean, double sd, double threshold) {
  const double lo = std::max(threshold, mean - 12.0 * sd), hi = mean + 12.0 * sd;
  if (hi <= lo) return 0.0;
  const int n = 20000;
  const double h = (hi - lo) / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double y = lo + h * i;
    const double z = (y - mean) / sd;
    const double f = (y - threshold) * std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
    sum += f * (i == 0 || i == n ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0));
  }
  return sum * h / 3.0;
}

GaussianProcess toy_gp() {
  Eigen::MatrixXd x(4, 1);
  x << 0.1, 0.4, 0.6, 0.9;
  Eigen::VectorXd y(4);
  y << 0.2, 0.9, 0.7, 0.1;
  return GaussianProcess::condition(x, y, KernelParams::shared(1.0, 0.2), 1e-6);
}

}  // namespace

TEST(ExpectedImprovement, KnownValue) {
  EXPECT_NEAR(expected_improvement({1.0, 1.0}, 0.0, 0.0), 1.0833154705876864, 1e-12);
  EXPECT_NEAR(expected_improvement({1.0, 1.0}, 0.0, 0.0), ei_quadrature(1.0, 1.0, 0.0), 1e-6);
}

TEST(ExpectedImprovement, MatchesQuadrature) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const double mean = rng.uniform(-3.0, 3.0), sd = std::exp(rng.uniform(-3.0, 1.0));
    const double best = rng.uniform(-3.0, 3.0), xi = rng.uniform(0.0, 0.1);
    EXPECT_NEAR(expected_improvement({mean, sd * sd}, best, xi), ei_quadrature(mean, sd, best + xi), 1e-6);
  }
}

TEST(ExpectedImprovement, ZeroVarianceAndNonNegativity) {
  EXPECT_EQ(expected_improvement({2.0, 0.0}, 1.0, 0.01), 0.99);
  EXPECT_EQ(expected_improvement({0.5, 0.0}, 1.0, 0.01), 0.0);
  EXPECT_GE(expected_improvement({-40.0, 1e-6}, 1.0, 0.01), 0.0);
}

TEST(ExpectedImprovement, MonotoneInMeanAndSigma) {
  double previous = 0.0;
  for (double mu = -2.0; mu <= 2.0; mu += 0.05) {
    const double ei = expected_improvement({mu, 0.25}, 0.0, 0.01);
    EXPECT_GE(ei, previous);
    previous = ei;
  }
  previous = 0.0;
  for (double sd = 0.01; sd <= 3.0; sd += 0.05) {
    const double ei = expected_improvement({0.0, sd * sd}, 0.0, 0.01);
    EXPECT_GE(ei, previous);
    previous = ei;
  }
}

TEST(UpperConfidenceBound, Formula) {
  EXPECT_EQ(upper_confidence_bound({1.0, 4.0}, 2.0), 5.0);
  EXPECT_EQ(upper_confidence_bound({1.0, 4.0}, 2.0, false), 3.0);
  EXPECT_EQ(upper_confidence_bound({1.0, 0.0}, 0.0), 1.0);
}

TEST(AcquisitionSpec, DefaultsAndValidation) {
  const AcquisitionSpec spec;
  EXPECT_EQ(spec.kind, AcquisitionKind::ExpectedImprovement);
  EXPECT_EQ(spec.xi, 0.01);
  EXPECT_EQ(spec.kappa, 2.0);
  AcquisitionSpec bad;
  bad.xi = -1.0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = {};
  bad.kappa = std::numeric_limits<double>::infinity();
  EXPECT_THROW(bad.validate(), InvalidArgument);
  EXPECT_EQ(parse_acquisition("ucb"), AcquisitionKind::UpperConfidenceBound);
  EXPECT_THROW(parse_acquisition("pi"), InvalidArgument);
}

TEST(AcquisitionFunction, IncumbentFollowsDirection) {
  const auto gp = toy_gp();
  AcquisitionSpec spec;
  EXPECT_EQ(AcquisitionFunction(gp, spec).incumbent(), 0.9);
  spec.maximize_objective = false;
  EXPECT_EQ(AcquisitionFunction(gp, spec).incumbent(), -0.1);
}

TEST(AcquisitionFunction, RowScoresMatchPointScores) {
  const auto gp = toy_gp();
  for (auto kind : {AcquisitionKind::ExpectedImprovement, AcquisitionKind::UpperConfidenceBound}) {
    AcquisitionSpec spec;
    spec.kind = kind;
    const AcquisitionFunction acquisition(gp, spec);
    Eigen::MatrixXd points(5, 1);
    points << 0.0, 0.25, 0.5, 0.75, 1.0;
    const auto scores = acquisition.score_rows(points);
    for (Eigen::Index i = 0; i < 5; ++i) EXPECT_NEAR(scores(i), acquisition(points.row(i).transpose()), 1e-12);
  }
}

TEST(ProposeNext, ReturnsValidConfigurationNearAcquisitionPeak) {
  const auto gp = toy_gp();
  const HyperSpace space({Dimension::continuous("x", 0.0, 1.0)});
  const AcquisitionSpec spec;
  const auto proposal = propose_next(gp, space, SpaceMode::Transformed, spec, 17);
  EXPECT_TRUE(space.contains(proposal.config));
  EXPECT_FALSE(proposal.degenerate);
  EXPECT_GE(proposal.score, proposal.best_candidate_score);

  // Dense scan of the acquisition as an oracle for its maximum.
  const AcquisitionFunction acquisition(gp, spec);
  double best = 0.0;
  for (int i = 0; i <= 100000; ++i) best = std::max(best, acquisition(Eigen::VectorXd::Constant(1, i / 100000.0)));
  EXPECT_GE(proposal.score, best * (1.0 - 1e-3));
  EXPECT_NEAR(proposal.score, acquisition(proposal.encoded), 1e-12);
}

TEST(ProposeNext, DeterministicInSeed) {
  const auto gp = toy_gp();
  const HyperSpace space({Dimension::continuous("x", 0.0, 1.0)});
  const auto a = propose_next(gp, space, SpaceMode::Transformed, {}, 5);
  const auto b = propose_next(gp, space, SpaceMode::Transformed, {}, 5);
  EXPECT_EQ(a.config, b.config);
  EXPECT_EQ(a.score, b.score);
}

TEST(ProposeNext, SnapsDiscreteAndCategorical) {
  const HyperSpace space({Dimension::discrete("k", {1, 2, 4, 8}), Dimension::categorical("c", {"a", "b", "c"})});
  Eigen::MatrixXd x(3, 2);
  x << 0.0, 0.0, 1.0 / 3.0, 0.5, 1.0, 1.0;
  Eigen::VectorXd y(3);
  y << 0.1, 0.5, 0.3;
  const auto gp = GaussianProcess::condition(x, y, KernelParams::shared(1.0, 0.3), 1e-4);
  const auto proposal = propose_next(gp, space, SpaceMode::Transformed, {}, 3);
  EXPECT_TRUE(space.contains(proposal.config));
  const auto snapped = space.snap(proposal.encoded, SpaceMode::Transformed);
  EXPECT_EQ(snapped, proposal.encoded);
}

TEST(ProposeNext, FlatSurfaceIsFlagged) {
  // Noise-dominated GP far from a single observation: every candidate scores alike.
  Eigen::MatrixXd x(1, 1);
  x << 0.5;
  const auto gp = GaussianProcess::condition(x, Eigen::VectorXd::Constant(1, 1.0), KernelParams::shared(1.0, 1e-3), 1.0);
  AcquisitionSpec spec;
  spec.kind = AcquisitionKind::UpperConfidenceBound;
  const HyperSpace wide({Dimension::continuous("x", 10.0, 20.0)});
  const auto proposal = propose_next(gp, wide, SpaceMode::Original, spec, 1);
  EXPECT_TRUE(proposal.degenerate);
  EXPECT_TRUE(wide.contains(proposal.config));
}

TEST(ProposeNext, RejectsDimensionMismatch) {
  const auto gp = toy_gp();
  const HyperSpace space({Dimension::continuous("x", 0, 1), Dimension::continuous("y", 0, 1)});
  EXPECT_THROW(propose_next(gp, space, SpaceMode::Transformed, {}, 1), InvalidArgument);
}
