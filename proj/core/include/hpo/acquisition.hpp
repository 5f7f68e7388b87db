#pragma once

#include "hpo/gp.hpp"
#include "hpo/hyperspace.hpp"

#include <cstdint>
#include <string_view>

namespace hpo {

enum class AcquisitionKind { ExpectedImprovement, UpperConfidenceBound };

std::string_view to_string(AcquisitionKind kind);
AcquisitionKind parse_acquisition(std::string_view text);

struct AcquisitionSpec {
  AcquisitionKind kind = AcquisitionKind::ExpectedImprovement;
  /// Exploration offset for expected improvement.
  double xi = 0.01;
  /// Confidence multiplier for the upper confidence bound.
  double kappa = 2.0;
  bool maximize_objective = true;

  void validate() const;
};

/// Expected improvement over `best_so_far` for a maximization problem:
/// (mu - best - xi) * Phi(z) + sigma * phi(z) with z = (mu - best - xi) / sigma,
/// and max(0, mu - best - xi) when sigma = 0.
double expected_improvement(const PredictiveDistribution& pred, double best_so_far, double xi);

/// mu + kappa * sigma when maximizing, -mu + kappa * sigma when minimizing
/// (higher is always better).
double upper_confidence_bound(const PredictiveDistribution& pred, double kappa, bool maximize_objective = true);

/// Candidate search settings for propose_next.
struct ProposalOptions {
  std::size_t random_candidates = 2048;
  std::size_t refine_starts = 5;
  std::size_t refine_passes = 10;
  /// Initial coordinate step, as a fraction of each coordinate's range.
  double initial_step = 0.1;
};

struct Proposal {
  Configuration config;
  /// Encoded (and snapped) location of `config`.
  Eigen::VectorXd encoded;
  double score = 0.0;
  /// Best score among the raw random candidates, before refinement.
  double best_candidate_score = 0.0;
  /// Acquisition surface was flat; the proposal is effectively random.
  bool degenerate = false;
};

/// Scores a candidate under `spec` against the incumbent of `gp`'s data.
class AcquisitionFunction {
 public:
  AcquisitionFunction(const GaussianProcess& gp, AcquisitionSpec spec);

  double operator()(const PredictiveDistribution& pred) const;
  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const { return (*this)(gp_->predict(x)); }
  /// Scores for each row of `points`.
  Eigen::VectorXd score_rows(const Eigen::MatrixXd& points) const;

  /// Best observed target, in the maximization convention.
  double incumbent() const noexcept { return incumbent_; }

 private:
  const GaussianProcess* gp_;
  AcquisitionSpec spec_;
  double incumbent_;
};

/// Maximizes the acquisition over the encoded box of `space`: uniform random
/// candidates, then coordinate-perturbation refinement with step halving from
/// the best few. Candidates are snapped to valid configurations before they
/// are scored. Ties resolve to the lowest candidate index. Deterministic in
/// `seed`.
Proposal propose_next(const GaussianProcess& gp, const HyperSpace& space, SpaceMode mode,
                      const AcquisitionSpec& spec, std::uint64_t seed, const ProposalOptions& options = {});

}  // namespace hpo
