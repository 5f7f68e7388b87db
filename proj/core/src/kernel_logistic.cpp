#include "hpo/kernel_logistic.hpp"

#include "hpo/error.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace hpo {
namespace {

// log(1 + exp(f)) without overflow.
double softplus(double f) { return f > 0.0 ? f + std::log1p(std::exp(-f)) : std::log1p(std::exp(f)); }

double sigmoid(double f) {
  if (f >= 0.0) return 1.0 / (1.0 + std::exp(-f));
  const double e = std::exp(f);
  return e / (1.0 + e);
}

// log(sigmoid(f)).
double log_sigmoid(double f) { return -softplus(-f); }

double penalized_loss(const Eigen::VectorXd& a, const Eigen::VectorXd& f, const Eigen::VectorXd& t, double C) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) loss += softplus(f(i)) - t(i) * f(i);
  return C * loss + 0.5 * a.dot(f);
}

// Returns the dual coefficients `a` of one binary problem.
Eigen::VectorXd fit_binary(const Eigen::MatrixXd& K, const Eigen::VectorXd& t, double C,
                           const KernelLogisticOptions& options) {
  const Eigen::Index n = K.rows();
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  double objective = penalized_loss(a, f, t, C);
  Eigen::VectorXd p(n), w(n);

  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) {
      p(i) = sigmoid(f(i));
      w(i) = p(i) * (1.0 - p(i));
    }
    // Function-space gradient; the true gradient is K times this vector.
    const Eigen::VectorXd g = a + C * (p - t);
    if (g.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) return a;

    // Newton step: (I + C W K) d = g.
    Eigen::MatrixXd system = C * w.asDiagonal() * K;
    system.diagonal().array() += 1.0;
    const Eigen::VectorXd d = system.partialPivLu().solve(g);
    if (!d.allFinite()) break;
    const Eigen::VectorXd fd = K * d;

    double step = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 50; ++halving, step *= 0.5) {
      const Eigen::VectorXd a_next = a - step * d;
      const Eigen::VectorXd f_next = f - step * fd;
      const double next = penalized_loss(a_next, f_next, t, C);
      if (std::isfinite(next) && next <= objective) {
        a = a_next;
        f = f_next;
        objective = next;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No decrease possible in floating point: accept if already near-stationary.
      if (g.lpNorm<Eigen::Infinity>() < 1e3 * options.gradient_tolerance) return a;
      break;
    }
  }
  throw TrainingFailure("kernel logistic regression did not converge (C=" + std::to_string(C) + ")");
}

class KernelLogisticModel final : public TrainedModel {
 public:
  KernelLogisticModel(Standardizer standardizer, Eigen::MatrixXd support, Eigen::MatrixXd coefficients, double gamma,
                      int num_classes)
      : standardizer_(std::move(standardizer)),
        support_(std::move(support)),
        coefficients_(std::move(coefficients)),
        gamma_(gamma),
        num_classes_(num_classes) {}

  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& features) const override {
    Eigen::MatrixXd k = rbf_kernel(standardizer_.apply(features), support_, gamma_);
    k.array() += 1.0;
    const Eigen::MatrixXd scores = k * coefficients_;
    Eigen::MatrixXd out(features.rows(), num_classes_);
    if (num_classes_ == 2) {
      for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        out(i, 1) = sigmoid(scores(i, 0));
        out(i, 0) = sigmoid(-scores(i, 0));
      }
      return out;
    }
    // One-vs-rest renormalization carried out in the log domain.
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
      double top = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < num_classes_; ++c) top = std::max(top, log_sigmoid(scores(i, c)));
      double total = 0.0;
      for (int c = 0; c < num_classes_; ++c) total += out(i, c) = std::exp(log_sigmoid(scores(i, c)) - top);
      out.row(i) /= total;
    }
    return out;
  }

  int num_classes() const noexcept override { return num_classes_; }

 private:
  Standardizer standardizer_;
  Eigen::MatrixXd support_;
  Eigen::MatrixXd coefficients_;
  double gamma_;
  int num_classes_;
};

}  // namespace

Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double gamma) {
  if (a.cols() != b.cols()) throw InvalidArgument("rbf_kernel: column counts differ");
  Eigen::MatrixXd out(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) out(i, j) = std::exp(-gamma * (a.row(i) - b.row(j)).squaredNorm());
  return out;
}

std::unique_ptr<TrainedModel> train_rbf(const Eigen::MatrixXd& features, std::span<const int> labels, int num_classes,
                                        double C, double gamma, const KernelLogisticOptions& options) {
  if (!(C > 0.0) || !std::isfinite(C)) throw InvalidArgument("C must be positive");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("gamma must be positive");
  if (num_classes < 2) throw InvalidArgument("need at least two classes");
  if (static_cast<std::size_t>(features.rows()) != labels.size()) throw InvalidArgument("features and labels differ in length");
  if (features.rows() < 2) throw InvalidArgument("train_rbf needs at least two samples");

  Standardizer standardizer(features);
  Eigen::MatrixXd support = standardizer.apply(features);
  Eigen::MatrixXd K = rbf_kernel(support, support, gamma);
  K.array() += 1.0;
  K.diagonal().array() += options.jitter;

  const int problems = num_classes == 2 ? 1 : num_classes;
  Eigen::MatrixXd coefficients(features.rows(), problems);
  for (int c = 0; c < problems; ++c) {
    const int positive = num_classes == 2 ? 1 : c;
    Eigen::VectorXd t(features.rows());
    for (Eigen::Index i = 0; i < t.size(); ++i) t(i) = labels[static_cast<std::size_t>(i)] == positive ? 1.0 : 0.0;
    coefficients.col(c) = fit_binary(K, t, C, options);
  }
  return std::make_unique<KernelLogisticModel>(std::move(standardizer), std::move(support), std::move(coefficients),
                                               gamma, num_classes);
}

}  // namespace hpo
