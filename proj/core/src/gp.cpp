#include "hpo/gp.hpp"

#include "bounded_minimizer.hpp"
#include "hpo/error.hpp"
#include "hpo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace hpo {
namespace {

constexpr double kSqrt5 = 2.23606797749978969640917366873127623544;
// A Cholesky pivot below this fraction of the mean diagonal counts as failure.
constexpr double kPivotFloor = 1e-13;
constexpr double kJitterStart = 1e-10;
constexpr double kJitterMax = 1e-4;

bool try_cholesky(const Eigen::MatrixXd& a, Eigen::MatrixXd& lower) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) return false;
  lower = llt.matrixL();
  const double floor = kPivotFloor * a.diagonal().mean();
  return (lower.diagonal().array().square() > floor).all() && lower.allFinite();
}

// In-place inverse of a lower-triangular matrix by recursive 2 x 2 blocking.
// The strictly upper part is zeroed.
void invert_lower(Eigen::Ref<Eigen::MatrixXd> l) {
  const Eigen::Index n = l.rows();
  if (n <= 24) {
    Eigen::MatrixXd inverse = Eigen::MatrixXd::Identity(n, n);
    l.triangularView<Eigen::Lower>().solveInPlace(inverse);
    l = inverse;
    return;
  }
  const Eigen::Index n1 = n / 2, n2 = n - n1;
  invert_lower(l.topLeftCorner(n1, n1));
  invert_lower(l.bottomRightCorner(n2, n2));
  const Eigen::MatrixXd partial = l.bottomLeftCorner(n2, n1) * l.topLeftCorner(n1, n1).triangularView<Eigen::Lower>();
  l.bottomLeftCorner(n2, n1).noalias() = -(l.bottomRightCorner(n2, n2).triangularView<Eigen::Lower>() * partial);
  l.topRightCorner(n1, n2).setZero();
}

// Evaluates the log marginal likelihood and its gradient for one data set.
// Squared coordinate differences are computed once and reused across
// parameter settings: column h of sqdiff_ holds the n x n matrix of squared
// differences along dimension h (one column of squared distances without
// ARD), so scaled distances and lengthscale gradients are matrix-vector
// products.
class LikelihoodSurface {
 public:
  LikelihoodSurface(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets, bool ard)
      : targets_(targets), n_(inputs.rows()) {
    const Eigen::Index dims = inputs.cols();
    sqdiff_.resize(n_ * n_, ard ? dims : 1);
    for (Eigen::Index j = 0; j < n_; ++j)
      for (Eigen::Index i = 0; i < n_; ++i) {
        if (ard) {
          for (Eigen::Index h = 0; h < dims; ++h) {
            const double diff = inputs(i, h) - inputs(j, h);
            sqdiff_(i + j * n_, h) = diff * diff;
          }
        } else {
          sqdiff_(i + j * n_, 0) = (inputs.row(i) - inputs.row(j)).squaredNorm();
        }
      }
  }

  std::size_t lengthscale_count() const { return static_cast<std::size_t>(sqdiff_.cols()); }

  double evaluate(double signal_variance, const Eigen::VectorXd& lengthscales, double noise,
                  Eigen::VectorXd* gradient) const {
    const Eigen::Index count = sqdiff_.cols();
    const Eigen::VectorXd inv_sq = lengthscales.array().square().inverse().matrix();
    const Eigen::VectorXd r2_flat = sqdiff_ * inv_sq;
    const Eigen::Map<const Eigen::MatrixXd> r2(r2_flat.data(), n_, n_);
    const Eigen::ArrayXXd r = r2.array().sqrt();
    const Eigen::ArrayXXd decay = (-kSqrt5 * r).exp();
    const Eigen::MatrixXd k = (signal_variance * (1.0 + kSqrt5 * r + (5.0 / 3.0) * r2.array()) * decay).matrix();

    Eigen::MatrixXd a = k;
    a.diagonal().array() += noise;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    Eigen::MatrixXd lower = llt.matrixL();
    const double floor = kPivotFloor * a.diagonal().mean();
    if (!((lower.diagonal().array().square() > floor).all())) return -std::numeric_limits<double>::infinity();

    const Eigen::VectorXd alpha = llt.solve(targets_);
    const double value = -0.5 * targets_.dot(alpha) - lower.diagonal().array().log().sum() -
                         0.5 * static_cast<double>(n_) * std::log(2.0 * std::numbers::pi);
    if (!std::isfinite(value)) return -std::numeric_limits<double>::infinity();

    if (gradient != nullptr) {
      gradient->resize(count + 2);
      // W = alpha alpha' - K^-1 with K^-1 = L^-T L^-1.
      invert_lower(lower);
      Eigen::MatrixXd w = alpha * alpha.transpose();
      w.noalias() -= lower.transpose() * lower;
      (*gradient)(0) = 0.5 * (w.array() * k.array()).sum();
      // d k / d log l_h = s2 * 5/3 * (1 + sqrt5 r) exp(-sqrt5 r) * d_h^2 / l_h^2
      Eigen::MatrixXd shape = (w.array() * (signal_variance * (5.0 / 3.0) * (1.0 + kSqrt5 * r) * decay)).matrix();
      const Eigen::Map<const Eigen::VectorXd> shape_flat(shape.data(), n_ * n_);
      gradient->segment(1, count) = 0.5 * (sqdiff_.transpose() * shape_flat).cwiseProduct(inv_sq);
      (*gradient)(count + 1) = 0.5 * noise * w.trace();
    }
    return value;
  }

 private:
  Eigen::VectorXd targets_;
  Eigen::Index n_;
  Eigen::MatrixXd sqdiff_;
};

}  // namespace

double matern52(double r, double signal_variance) {
  const double s = kSqrt5 * r;
  return signal_variance * (1.0 + s + (5.0 / 3.0) * r * r) * std::exp(-s);
}

KernelParams KernelParams::shared(double signal_variance, double lengthscale) {
  return {signal_variance, Eigen::VectorXd::Constant(1, lengthscale), false};
}

KernelParams KernelParams::per_dimension(double signal_variance, Eigen::VectorXd lengthscales) {
  return {signal_variance, std::move(lengthscales), true};
}

void KernelParams::validate(std::size_t dim) const {
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance))
    throw InvalidArgument("signal variance must be positive");
  const auto expected = ard ? static_cast<Eigen::Index>(dim) : Eigen::Index{1};
  if (lengthscales.size() != expected)
    throw InvalidArgument("expected " + std::to_string(expected) + " lengthscales, got " +
                          std::to_string(lengthscales.size()));
  if (!(lengthscales.array() > 0.0).all() || !lengthscales.allFinite())
    throw InvalidArgument("lengthscales must be positive");
}

KernelParams KernelParams::as_ard(std::size_t dim) const {
  if (ard) return *this;
  return per_dimension(signal_variance, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dim), lengthscales(0)));
}

double scaled_distance(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                       const KernelParams& params) {
  if (x.size() != y.size())
    throw InvalidArgument("scaled_distance: length mismatch (" + std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()) + ")");
  double sum = 0.0;
  for (Eigen::Index h = 0; h < x.size(); ++h) {
    const double l = params.lengthscale(static_cast<std::size_t>(h));
    const double d = (x(h) - y(h)) / l;
    sum += d * d;
  }
  return std::sqrt(sum);
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const KernelParams& params) {
  if (a.cols() != b.cols()) throw InvalidArgument("kernel_matrix: dimension mismatch");
  Eigen::VectorXd inv(a.cols());
  for (Eigen::Index h = 0; h < a.cols(); ++h) inv(h) = 1.0 / params.lengthscale(static_cast<std::size_t>(h));
  // Row-major scaled copies keep each point contiguous for the inner loop.
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMajor sa = a * inv.asDiagonal();
  const RowMajor sb = b * inv.asDiagonal();
  Eigen::MatrixXd out(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      out(i, j) = matern52((sa.row(i) - sb.row(j)).norm(), params.signal_variance);
  return out;
}

FactoredGram factor_gram(const Eigen::MatrixXd& inputs, const KernelParams& params, double noise_variance) {
  if (inputs.rows() < 1) throw InvalidArgument("factor_gram needs at least one input");
  params.validate(static_cast<std::size_t>(inputs.cols()));
  if (!(noise_variance >= 0.0)) throw InvalidArgument("noise variance must be non-negative");

  Eigen::MatrixXd a(inputs.rows(), inputs.rows());
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = j; i < a.rows(); ++i) {
      a(i, j) = matern52(scaled_distance(inputs.row(i).transpose(), inputs.row(j).transpose(), params),
                         params.signal_variance);
      a(j, i) = a(i, j);
    }
  a.diagonal().array() += noise_variance;

  FactoredGram out;
  if (try_cholesky(a, out.lower)) return out;
  const double base = a.trace() / static_cast<double>(a.rows());
  for (double scale = kJitterStart; scale <= kJitterMax * (1.0 + 1e-9); scale *= 10.0) {
    Eigen::MatrixXd jittered = a;
    jittered.diagonal().array() += scale * base;
    if (try_cholesky(jittered, out.lower)) {
      out.jitter = scale * base;
      return out;
    }
  }
  throw SurrogateSingular("Gram matrix not positive definite after maximum jitter");
}

double PredictiveDistribution::stddev() const { return std::sqrt(std::max(variance, 0.0)); }

double log_marginal_likelihood(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                               const KernelParams& params, double noise_variance, Eigen::VectorXd* gradient) {
  if (inputs.rows() != targets.size()) throw InvalidArgument("inputs and targets differ in length");
  params.validate(static_cast<std::size_t>(inputs.cols()));
  const LikelihoodSurface surface(inputs, targets, params.ard);
  return surface.evaluate(params.signal_variance, params.lengthscales, noise_variance, gradient);
}

double median_distance(const Eigen::MatrixXd& inputs) {
  std::vector<double> distances;
  const Eigen::Index n = inputs.rows();
  distances.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) distances.push_back((inputs.row(i) - inputs.row(j)).norm());
  if (distances.empty()) return 1.0;
  const auto mid = distances.begin() + static_cast<std::ptrdiff_t>(distances.size() / 2);
  std::nth_element(distances.begin(), mid, distances.end());
  return *mid > 0.0 ? *mid : 1.0;
}

GaussianProcess GaussianProcess::condition(Eigen::MatrixXd inputs, Eigen::VectorXd targets, KernelParams params,
                                           double noise_variance) {
  if (inputs.rows() < 1) throw InvalidArgument("a Gaussian process needs at least one observation");
  if (inputs.rows() != targets.size()) throw InvalidArgument("inputs and targets differ in length");
  if (!targets.allFinite()) throw InvalidArgument("targets must be finite");
  params.validate(static_cast<std::size_t>(inputs.cols()));

  GaussianProcess gp;
  gp.inputs_ = std::move(inputs);
  gp.targets_ = std::move(targets);
  gp.target_mean_ = gp.targets_.mean();
  const double spread = std::sqrt((gp.targets_.array() - gp.target_mean_).square().mean());
  gp.target_scale_ = spread > 0.0 && std::isfinite(spread) ? spread : 1.0;
  gp.standardized_ = (gp.targets_.array() - gp.target_mean_) / gp.target_scale_;
  gp.params_ = std::move(params);
  gp.noise_variance_ = noise_variance;
  gp.factorize();
  return gp;
}

void GaussianProcess::factorize() {
  gram_ = factor_gram(inputs_, params_, noise_variance_);
  const Eigen::MatrixXd& lower = gram_.lower;
  alpha_ = lower.triangularView<Eigen::Lower>().transpose().solve(lower.triangularView<Eigen::Lower>().solve(standardized_));
  log_likelihood_ = -0.5 * standardized_.dot(alpha_) - gram_.lower.diagonal().array().log().sum() -
                    0.5 * static_cast<double>(size()) * std::log(2.0 * std::numbers::pi);
}

GaussianProcess GaussianProcess::fit(Eigen::MatrixXd inputs, Eigen::VectorXd targets, const FitOptions& options) {
  if (inputs.rows() < 1) throw InvalidArgument("a Gaussian process needs at least one observation");
  const auto dims = static_cast<std::size_t>(inputs.cols());
  const std::size_t count = options.ard ? dims : 1;

  // Heuristic parameters double as the first start and the fallback.
  const double heuristic_length =
      std::clamp(median_distance(inputs), options.lengthscale_lo, options.lengthscale_hi);
  const double heuristic_noise = std::clamp(1e-2, options.noise_lo, options.noise_hi);
  KernelParams heuristic{std::clamp(1.0, options.signal_variance_lo, options.signal_variance_hi),
                         Eigen::VectorXd::Constant(static_cast<Eigen::Index>(count), heuristic_length), options.ard};

  GaussianProcess gp = condition(inputs, targets, heuristic, heuristic_noise);
  if (gp.size() < 2) return gp;

  const auto p = static_cast<Eigen::Index>(count + 2);
  Eigen::VectorXd lo(p), hi(p);
  lo(0) = std::log(options.signal_variance_lo);
  hi(0) = std::log(options.signal_variance_hi);
  lo.segment(1, static_cast<Eigen::Index>(count)).setConstant(std::log(options.lengthscale_lo));
  hi.segment(1, static_cast<Eigen::Index>(count)).setConstant(std::log(options.lengthscale_hi));
  lo(p - 1) = std::log(options.noise_lo);
  hi(p - 1) = std::log(options.noise_hi);

  const LikelihoodSurface surface(gp.inputs_, gp.standardized_, options.ard);
  auto negative_lml = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
    const Eigen::VectorXd lengths = theta.segment(1, static_cast<Eigen::Index>(count)).array().exp();
    const double value = surface.evaluate(std::exp(theta(0)), lengths, std::exp(theta(p - 1)), &grad);
    if (!std::isfinite(value)) return std::numeric_limits<double>::infinity();
    grad = -grad;
    return -value;
  };

  Rng rng(options.seed);
  Eigen::VectorXd best_theta;
  double best_value = std::numeric_limits<double>::infinity();
  const std::size_t starts = std::max<std::size_t>(options.restarts, 1);
  for (std::size_t s = 0; s < starts; ++s) {
    Eigen::VectorXd start(p);
    if (s == 0) {
      start(0) = std::log(heuristic.signal_variance);
      start.segment(1, static_cast<Eigen::Index>(count)).setConstant(std::log(heuristic_length));
      start(p - 1) = std::log(heuristic_noise);
    } else {
      for (Eigen::Index i = 0; i < p; ++i) start(i) = rng.uniform(lo(i), hi(i));
    }
    const auto result = detail::minimize_bounded(negative_lml, start, lo, hi, options.max_iterations);
    if (std::isfinite(result.value) && result.value < best_value) {
      best_value = result.value;
      best_theta = result.x;
    }
  }

  if (!std::isfinite(best_value)) {
    gp.used_fallback_ = true;
    return gp;
  }
  gp.params_.signal_variance = std::exp(best_theta(0));
  gp.params_.lengthscales = best_theta.segment(1, static_cast<Eigen::Index>(count)).array().exp();
  gp.noise_variance_ = std::exp(best_theta(p - 1));
  gp.factorize();
  return gp;
}

PredictiveDistribution GaussianProcess::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (static_cast<std::size_t>(x.size()) != dim()) throw InvalidArgument("predict: dimension mismatch");
  Eigen::VectorXd cross(inputs_.rows());
  for (Eigen::Index i = 0; i < inputs_.rows(); ++i)
    cross(i) = matern52(scaled_distance(inputs_.row(i).transpose(), x, params_), params_.signal_variance);
  const Eigen::VectorXd v = gram_.lower.triangularView<Eigen::Lower>().solve(cross);
  const double variance = std::max(params_.signal_variance - v.squaredNorm(), 0.0);
  return {target_mean_ + target_scale_ * cross.dot(alpha_), variance * target_scale_ * target_scale_};
}

void GaussianProcess::predict(const Eigen::MatrixXd& points, Eigen::VectorXd& mean, Eigen::VectorXd& variance) const {
  if (static_cast<std::size_t>(points.cols()) != dim()) throw InvalidArgument("predict: dimension mismatch");
  const Eigen::MatrixXd cross = kernel_matrix(inputs_, points, params_);
  mean = (target_mean_ + target_scale_ * (cross.transpose() * alpha_).array()).matrix();
  const Eigen::MatrixXd v = gram_.lower.triangularView<Eigen::Lower>().solve(cross);
  variance = ((params_.signal_variance - v.colwise().squaredNorm().transpose().array()).max(0.0) *
              (target_scale_ * target_scale_))
                 .matrix();
}

}  // namespace hpo
