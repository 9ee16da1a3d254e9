#include "mrokit/oracles.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace mrokit {

void ErmRequest::validate() const {
  if (dataset == nullptr || per_sample_weights == nullptr)
    throw std::invalid_argument("erm request: dataset and weights are required");
  if (per_sample_weights->size() != dataset->size())
    throw std::invalid_argument("erm request: weight length mismatch");
  bool any_positive = false;
  for (double w : *per_sample_weights) {
    if (!std::isfinite(w) || w < 0.0)
      throw std::invalid_argument("erm request: weights must be finite and >= 0");
    any_positive = any_positive || w > 0.0;
  }
  if (!any_positive) throw std::invalid_argument("erm request: all composite weights are zero");
  function_class.validate();
}

Hypothesis erm_finite(const ErmRequest& request) {
  request.validate();
  if (request.function_class.kind != FunctionClassKind::finite)
    throw std::invalid_argument("erm_finite needs a finite class");
  const Dataset& data = *request.dataset;
  const std::vector<double>& omega = *request.per_sample_weights;

  std::size_t best = 0;
  double best_value = 0.0;
  for (std::size_t k = 0; k < request.function_class.finite_size(); ++k) {
    const Hypothesis h = Hypothesis::finite(request.function_class, k);
    double value = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const Sample& z = data.sample(i);
      value += omega[i] * request.loss(z.label, h.predict(z));
    }
    if (k == 0 || value < best_value) {
      best = k;
      best_value = value;
    }
  }
  return Hypothesis::finite(request.function_class, best);
}

Hypothesis erm_interval_mean(const ErmRequest& request) {
  request.validate();
  if (request.function_class.kind != FunctionClassKind::interval_constant)
    throw std::invalid_argument("erm_interval_mean needs an interval class");
  if (request.loss.kind != LossKind::squared)
    throw std::invalid_argument("erm_interval_mean needs squared loss");
  const Dataset& data = *request.dataset;
  const std::vector<double>& omega = *request.per_sample_weights;

  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    num += omega[i] * data.sample(i).label;
    den += omega[i];
  }
  const double C = request.function_class.radius;
  const double c = std::clamp(num / den, -C, C);
  return Hypothesis::constant(request.function_class, c);
}

namespace {

// Solves (A + lambda I) beta = b with ||beta|| = r via the eigenbasis of A.
// ||beta(lambda)|| is strictly decreasing, so safeguarded bisection on
// lambda converges fast; tolerance is on the norm residual.
Eigen::VectorXd boundary_least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                       double radius, double tolerance) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
  const Eigen::VectorXd evals = eig.eigenvalues();
  const Eigen::VectorXd c = eig.eigenvectors().transpose() * b;

  const auto norm_at = [&](double lambda) {
    double sq = 0.0;
    for (Eigen::Index k = 0; k < c.size(); ++k) {
      const double denom = evals[k] + lambda;
      const double coord = c[k] / denom;
      sq += coord * coord;
    }
    return std::sqrt(sq);
  };

  double lo = 0.0;
  double hi = std::max(b.norm() / radius, 1e-12);  // ||beta(hi)|| <= ||b||/hi <= r
  while (norm_at(hi) > radius) hi *= 2.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (norm_at(mid) > radius)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < tolerance * tolerance) break;
  }
  const double lambda = hi;
  Eigen::VectorXd coords(c.size());
  for (Eigen::Index k = 0; k < c.size(); ++k) coords[k] = c[k] / (evals[k] + lambda);
  return eig.eigenvectors() * coords;
}

}  // namespace

Hypothesis erm_linear_l2(const ErmRequest& request) {
  request.validate();
  if (request.function_class.kind != FunctionClassKind::linear_l2_ball)
    throw std::invalid_argument("erm_linear_l2 needs an l2 ball class");
  if (request.loss.kind != LossKind::squared)
    throw std::invalid_argument("erm_linear_l2 needs squared loss");
  const Dataset& data = *request.dataset;
  const std::vector<double>& omega = *request.per_sample_weights;
  const std::size_t d = request.function_class.dimension;
  if (data.feature_dim() != d)
    throw std::invalid_argument("erm_linear_l2: feature dimension mismatch");
  const double r = request.function_class.radius;

  Eigen::MatrixXd design(data.size(), d);
  Eigen::VectorXd target(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double s = std::sqrt(omega[i]);
    const Sample& z = data.sample(i);
    for (std::size_t j = 0; j < d; ++j) design(i, j) = s * z.features[j];
    target(i) = s * z.label;
  }

  // Minimal-norm unconstrained solution first.
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
  Eigen::VectorXd beta = cod.solve(target);
  if (beta.norm() > r) {
    const Eigen::MatrixXd A = design.transpose() * design;
    const Eigen::VectorXd b = design.transpose() * target;
    beta = boundary_least_squares(A, b, r, request.tolerance);
  }

  std::vector<double> out(beta.data(), beta.data() + beta.size());
  return Hypothesis::linear(request.function_class, std::move(out), request.tolerance);
}

Hypothesis solve_erm(const ErmRequest& request) {
  switch (request.function_class.kind) {
    case FunctionClassKind::finite:
      return erm_finite(request);
    case FunctionClassKind::interval_constant:
      return erm_interval_mean(request);
    case FunctionClassKind::linear_l2_ball:
      return erm_linear_l2(request);
  }
  throw std::logic_error("unreachable class kind");
}

}  // namespace mrokit
