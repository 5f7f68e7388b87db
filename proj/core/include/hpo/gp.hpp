#pragma once

#include <Eigen/Core>
#include <Eigen/Cholesky>

#include <cstddef>
#include <cstdint>

namespace hpo {

/// Matérn-5/2 covariance of a scaled distance r >= 0:
///   k(r) = s2 * (1 + sqrt(5) r + 5/3 r^2) * exp(-sqrt(5) r).
double matern52(double r, double signal_variance);

/// Signal variance plus either one shared lengthscale or one per input
/// dimension (automatic relevance determination).
struct KernelParams {
  double signal_variance = 1.0;
  Eigen::VectorXd lengthscales = Eigen::VectorXd::Ones(1);
  bool ard = false;

  static KernelParams shared(double signal_variance, double lengthscale);
  static KernelParams per_dimension(double signal_variance, Eigen::VectorXd lengthscales);

  /// Throws InvalidArgument unless all parameters are strictly positive and
  /// the lengthscale count is 1 (shared) or `dim` (ARD).
  void validate(std::size_t dim) const;

  double lengthscale(std::size_t h) const { return ard ? lengthscales(static_cast<Eigen::Index>(h)) : lengthscales(0); }

  /// The ARD parameter set with every lengthscale equal to the shared one.
  KernelParams as_ard(std::size_t dim) const;
};

/// r = sqrt(sum_h (x_h - y_h)^2 / l_h^2). Throws InvalidArgument on a length
/// mismatch.
double scaled_distance(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                       const KernelParams& params);

/// Covariance between the rows of `a` and the rows of `b`.
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const KernelParams& params);

/// Lower Cholesky factor of K + (noise + jitter) I.
struct FactoredGram {
  Eigen::MatrixXd lower;
  double jitter = 0.0;
};

/// Factors the noisy Gram matrix of `inputs` (rows are points). On failure
/// the diagonal gets jitter 1e-10 * trace / n, escalating by x10 up to
/// 1e-4 * trace / n; past that SurrogateSingular is thrown.
FactoredGram factor_gram(const Eigen::MatrixXd& inputs, const KernelParams& params, double noise_variance);

struct PredictiveDistribution {
  double mean = 0.0;
  double variance = 0.0;

  double stddev() const;
};

/// Log marginal likelihood of zero-mean `targets` under the Matérn-5/2 GP.
/// When `gradient` is given it receives the derivatives with respect to the
/// log-parameters, ordered [log s2, log l_1 .. log l_L, log noise].
/// Returns -infinity when the Gram matrix cannot be factored.
double log_marginal_likelihood(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                               const KernelParams& params, double noise_variance,
                               Eigen::VectorXd* gradient = nullptr);

struct FitOptions {
  bool ard = false;
  std::uint64_t seed = 0;
  std::size_t restarts = 5;
  std::size_t max_iterations = 100;
  double signal_variance_lo = 1e-6;
  double signal_variance_hi = 1e2;
  double noise_lo = 1e-6;
  double noise_hi = 1e2;
  double lengthscale_lo = 1e-3;
  double lengthscale_hi = 1e2;
};

/// A Gaussian process conditioned on observations. Targets are centred on
/// their mean (the constant prior mean) and scaled to unit variance
/// internally; kernel parameters live in those standardized units and
/// predictions are reported in the original units. Immutable once built.
class GaussianProcess {
 public:
  /// Conditions on (inputs, targets) with fixed kernel parameters.
  static GaussianProcess condition(Eigen::MatrixXd inputs, Eigen::VectorXd targets, KernelParams params,
                                   double noise_variance);

  /// Maximizes the log marginal likelihood over (signal variance,
  /// lengthscales, noise) inside the option bounds from `restarts` starting
  /// points: the median-distance heuristic plus random draws. Falls back to
  /// the heuristic parameters when no start yields a finite likelihood.
  static GaussianProcess fit(Eigen::MatrixXd inputs, Eigen::VectorXd targets, const FitOptions& options);

  PredictiveDistribution predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Predictions for every row of `points`.
  void predict(const Eigen::MatrixXd& points, Eigen::VectorXd& mean, Eigen::VectorXd& variance) const;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(inputs_.cols()); }
  std::size_t size() const noexcept { return static_cast<std::size_t>(inputs_.rows()); }
  const Eigen::MatrixXd& inputs() const noexcept { return inputs_; }
  const Eigen::VectorXd& targets() const noexcept { return targets_; }
  const KernelParams& params() const noexcept { return params_; }
  double noise_variance() const noexcept { return noise_variance_; }
  double jitter() const noexcept { return gram_.jitter; }
  const Eigen::MatrixXd& factor() const noexcept { return gram_.lower; }
  const Eigen::VectorXd& alpha() const noexcept { return alpha_; }
  double target_mean() const noexcept { return target_mean_; }
  double target_scale() const noexcept { return target_scale_; }
  /// Prior variance of the latent function in original units.
  double prior_variance() const noexcept { return params_.signal_variance * target_scale_ * target_scale_; }
  double log_likelihood() const noexcept { return log_likelihood_; }
  bool used_fallback() const noexcept { return used_fallback_; }

 private:
  GaussianProcess() = default;
  void factorize();

  Eigen::MatrixXd inputs_;
  Eigen::VectorXd targets_;
  Eigen::VectorXd standardized_;
  KernelParams params_;
  double noise_variance_ = 0.0;
  double target_mean_ = 0.0;
  double target_scale_ = 1.0;
  FactoredGram gram_;
  Eigen::VectorXd alpha_;
  double log_likelihood_ = 0.0;
  bool used_fallback_ = false;
};

/// Median pairwise Euclidean distance between rows (1 when all coincide).
double median_distance(const Eigen::MatrixXd& inputs);

}  // namespace hpo
