#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <limits>

namespace hpo::detail {

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
};

// Box-constrained quasi-Newton minimization: BFGS on the free variables,
// projected backtracking line search. `objective(x, grad)` returns the value
// and fills grad; a non-finite value marks an infeasible point.
template <class Objective>
MinimizeResult minimize_bounded(Objective&& objective, Eigen::VectorXd x, const Eigen::VectorXd& lo,
                                const Eigen::VectorXd& hi, std::size_t max_iterations,
                                double gradient_tolerance = 1e-6) {
  const Eigen::Index n = x.size();
  x = x.cwiseMax(lo).cwiseMin(hi);
  Eigen::VectorXd grad(n);
  double value = objective(x, grad);
  MinimizeResult result{x, value, 0};
  if (!std::isfinite(value)) return result;

  Eigen::MatrixXd inverse_hessian = Eigen::MatrixXd::Identity(n, n);
  bool first_update = true;
  Eigen::VectorXd next(n);
  Eigen::VectorXd next_grad(n);

  for (std::size_t it = 0; it < max_iterations; ++it) {
    result.iterations = it + 1;
    // Variables pinned at a bound with the gradient pushing outward stay fixed.
    Eigen::VectorXd free_mask = Eigen::VectorXd::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if ((x(i) <= lo(i) && grad(i) > 0.0) || (x(i) >= hi(i) && grad(i) < 0.0)) free_mask(i) = 0.0;
    }
    const Eigen::VectorXd projected_grad = grad.cwiseProduct(free_mask);
    if (projected_grad.lpNorm<Eigen::Infinity>() < gradient_tolerance) break;

    Eigen::VectorXd direction = -(inverse_hessian * projected_grad).cwiseProduct(free_mask);
    if (direction.dot(projected_grad) >= 0.0) {
      inverse_hessian.setIdentity();
      first_update = true;
      direction = -projected_grad;
    }
    // Keep the first trial step within one unit per coordinate.
    const double longest = direction.lpNorm<Eigen::Infinity>();
    double step = longest > 1.0 ? 1.0 / longest : 1.0;

    bool accepted = false;
    double next_value = value;
    for (int halving = 0; halving < 40; ++halving, step *= 0.5) {
      next = (x + step * direction).cwiseMax(lo).cwiseMin(hi);
      next_value = objective(next, next_grad);
      if (std::isfinite(next_value) && next_value <= value + 1e-4 * grad.dot(next - x)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;

    // Curvature pairs are restricted to the free variables so that
    // coordinates pinned at a bound do not distort the update.
    const Eigen::VectorXd s = (next - x).cwiseProduct(free_mask);
    const Eigen::VectorXd y = (next_grad - grad).cwiseProduct(free_mask);
    const double sy = s.dot(y);
    if (sy > 1e-12) {
      if (first_update) {
        inverse_hessian *= sy / y.squaredNorm();
        first_update = false;
      }
      const Eigen::VectorXd hy = inverse_hessian * y;
      const double yhy = y.dot(hy);
      inverse_hessian += ((sy + yhy) / (sy * sy)) * (s * s.transpose()) - (hy * s.transpose() + s * hy.transpose()) / sy;
    }
    const double improvement = value - next_value;
    x = next;
    grad = next_grad;
    value = next_value;
    if (improvement <= 1e-10 * (1.0 + std::abs(value))) break;
  }
  result.x = x;
  result.value = value;
  return result;
}

}  // namespace hpo::detail
