#include "hpo/acquisition.hpp"

#include "hpo/error.hpp"
#include "hpo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <numbers>
#include <vector>

namespace hpo {
namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace

std::string_view to_string(AcquisitionKind kind) {
  return kind == AcquisitionKind::ExpectedImprovement ? "ei" : "ucb";
}

AcquisitionKind parse_acquisition(std::string_view text) {
  if (text == "ei") return AcquisitionKind::ExpectedImprovement;
  if (text == "ucb") return AcquisitionKind::UpperConfidenceBound;
  throw InvalidArgument("unknown acquisition '" + std::string(text) + "' (expected ei|ucb)");
}

void AcquisitionSpec::validate() const {
  if (!std::isfinite(xi) || xi < 0.0) throw InvalidArgument("xi must be finite and >= 0");
  if (!std::isfinite(kappa) || kappa < 0.0) throw InvalidArgument("kappa must be finite and >= 0");
}

double expected_improvement(const PredictiveDistribution& pred, double best_so_far, double xi) {
  const double gain = pred.mean - best_so_far - xi;
  const double sigma = pred.stddev();
  if (sigma <= 0.0) return std::max(gain, 0.0);
  const double z = gain / sigma;
  return std::max(gain * normal_cdf(z) + sigma * normal_pdf(z), 0.0);
}

double upper_confidence_bound(const PredictiveDistribution& pred, double kappa, bool maximize_objective) {
  const double mean = maximize_objective ? pred.mean : -pred.mean;
  return mean + kappa * pred.stddev();
}

AcquisitionFunction::AcquisitionFunction(const GaussianProcess& gp, AcquisitionSpec spec)
    : gp_(&gp), spec_(spec) {
  spec_.validate();
  incumbent_ = spec_.maximize_objective ? gp.targets().maxCoeff() : (-gp.targets()).maxCoeff();
}

double AcquisitionFunction::operator()(const PredictiveDistribution& pred) const {
  if (spec_.kind == AcquisitionKind::UpperConfidenceBound)
    return upper_confidence_bound(pred, spec_.kappa, spec_.maximize_objective);
  const PredictiveDistribution oriented{spec_.maximize_objective ? pred.mean : -pred.mean, pred.variance};
  return expected_improvement(oriented, incumbent_, spec_.xi);
}

Eigen::VectorXd AcquisitionFunction::score_rows(const Eigen::MatrixXd& points) const {
  Eigen::VectorXd mean, variance;
  gp_->predict(points, mean, variance);
  Eigen::VectorXd out(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) out(i) = (*this)(PredictiveDistribution{mean(i), variance(i)});
  return out;
}

Proposal propose_next(const GaussianProcess& gp, const HyperSpace& space, SpaceMode mode,
                      const AcquisitionSpec& spec, std::uint64_t seed, const ProposalOptions& options) {
  if (gp.dim() != space.size()) throw InvalidArgument("propose_next: surrogate and space dimensionality differ");
  if (options.random_candidates == 0) throw InvalidArgument("propose_next needs at least one candidate");
  const AcquisitionFunction acquisition(gp, spec);
  const auto dims = static_cast<Eigen::Index>(space.size());
  const auto count = static_cast<Eigen::Index>(options.random_candidates);

  Eigen::VectorXd lo(dims), hi(dims);
  for (Eigen::Index h = 0; h < dims; ++h) std::tie(lo(h), hi(h)) = space.encoded_bounds(static_cast<std::size_t>(h), mode);

  Rng rng(seed);
  Eigen::MatrixXd candidates(count, dims);
  for (Eigen::Index i = 0; i < count; ++i) {
    Eigen::VectorXd x(dims);
    for (Eigen::Index h = 0; h < dims; ++h) x(h) = rng.uniform(lo(h), hi(h));
    candidates.row(i) = space.snap(x, mode).transpose();
  }
  const Eigen::VectorXd scores = acquisition.score_rows(candidates);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(count));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return scores(a) > scores(b); });

  Proposal proposal;
  proposal.best_candidate_score = scores(order.front());
  const double spread = scores(order.front()) - scores(order.back());
  proposal.degenerate = !(spread > 1e-12 * (1.0 + std::abs(scores(order.front()))));

  Eigen::VectorXd best = candidates.row(order.front()).transpose();
  double best_score = scores(order.front());

  if (!proposal.degenerate) {
    const std::size_t starts = std::min<std::size_t>(options.refine_starts, order.size());
    Eigen::MatrixXd probe(1, dims);
    for (std::size_t s = 0; s < starts; ++s) {
      Eigen::VectorXd x = candidates.row(order[s]).transpose();
      double score = scores(order[s]);
      Eigen::VectorXd step = options.initial_step * (hi - lo);
      for (std::size_t pass = 0; pass < options.refine_passes; ++pass) {
        bool improved = false;
        for (Eigen::Index h = 0; h < dims; ++h) {
          const auto& dim = space.dim(static_cast<std::size_t>(h));
          for (int dir : {1, -1}) {
            Eigen::VectorXd y = x;
            y(h) = dim.is_continuous() ? std::clamp(x(h) + dir * step(h), lo(h), hi(h))
                                       : space.adjacent_rank(static_cast<std::size_t>(h), x(h), dir, mode);
            y = space.snap(y, mode);
            if (y == x) continue;
            probe.row(0) = y.transpose();
            const double candidate = acquisition.score_rows(probe)(0);
            if (candidate > score) {
              x = std::move(y);
              score = candidate;
              improved = true;
              break;
            }
          }
        }
        if (!improved) step *= 0.5;
      }
      if (score > best_score) {
        best_score = score;
        best = x;
      }
    }
  }

  proposal.config = space.decode(best, mode);
  proposal.encoded = std::move(best);
  proposal.score = best_score;
  return proposal;
}

}  // namespace hpo
