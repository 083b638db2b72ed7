#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace drawdown {

/// Nodes/weights of the n-point Gauss-Hermite rule for weight exp(-x^2),
/// computed by Golub-Welsch on the Jacobi matrix of the Hermite recurrence.
struct HermiteRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;  // sum to sqrt(pi)
};

inline HermiteRule gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: order must be >= 1");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    double beta = std::sqrt(i / 2.0);
    jacobi(i, i - 1) = beta;
    jacobi(i - 1, i) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  if (es.info() != Eigen::Success) throw std::runtime_error("gauss_hermite: eigensolve failed");
  HermiteRule rule;
  rule.nodes = es.eigenvalues();
  rule.weights.resize(n);
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  for (int i = 0; i < n; ++i) {
    double v0 = es.eigenvectors()(0, i);
    rule.weights(i) = sqrt_pi * v0 * v0;
  }
  return rule;
}

/// Tensorized quadrature for E[f(X)], X ~ N(0, cov): sum_j weights(j) * f(points.row(j)).
/// Points are whitened through the Cholesky factor of cov; weights sum to 1.
struct GaussianQuadrature {
  Eigen::MatrixXd points;   // n_points x d
  Eigen::VectorXd weights;  // n_points, sums to 1
};

inline GaussianQuadrature gaussian_quadrature(const Eigen::MatrixXd& cov, int order_per_dim) {
  const int d = static_cast<int>(cov.rows());
  if (cov.cols() != d) throw std::invalid_argument("gaussian_quadrature: covariance not square");
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("gaussian_quadrature: covariance not positive definite");
  const Eigen::MatrixXd chol = llt.matrixL();

  HermiteRule rule = gauss_hermite(order_per_dim);
  const int n = order_per_dim;
  long total = 1;
  for (int i = 0; i < d; ++i) total *= n;

  GaussianQuadrature quad;
  quad.points.resize(total, d);
  quad.weights.resize(total);
  const double norm = std::pow(std::numbers::pi, -0.5 * d);
  const double sqrt2 = std::numbers::sqrt2;

  Eigen::VectorXd u(d);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    double w = norm;
    for (int i = 0; i < d; ++i) {
      int pos = static_cast<int>(rem % n);
      rem /= n;
      u(i) = rule.nodes(pos);
      w *= rule.weights(pos);
    }
    quad.points.row(idx) = (sqrt2 * (chol * u)).transpose();
    quad.weights(idx) = w;
  }
  return quad;
}

}  // namespace drawdown
