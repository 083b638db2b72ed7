#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "drawdown/market.hpp"

namespace drawdown {

/// Log-density of N(0, Gamma) evaluated through a cached Cholesky factor.
class GaussianLogDensity {
 public:
  explicit GaussianLogDensity(const Eigen::MatrixXd& gamma) : llt_(gamma) {
    if (llt_.info() != Eigen::Success)
      throw std::invalid_argument("GaussianLogDensity: covariance not positive definite");
    const int d = static_cast<int>(gamma.rows());
    double log_det = 0.0;
    for (int i = 0; i < d; ++i) log_det += std::log(llt_.matrixL()(i, i));
    log_norm_ = -0.5 * d * std::log(2.0 * std::numbers::pi) - log_det;
  }

  double operator()(const Eigen::VectorXd& x) const {
    Eigen::VectorXd w = llt_.matrixL().solve(x);
    return log_norm_ - 0.5 * w.squaredNorm();
  }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double log_norm_ = 0.0;
};

/// Weighted atoms approximating the posterior of the drift. Weights are held
/// in log space; products of Gaussian densities over two dozen steps underflow
/// in linear space.
struct ParticleMeasure {
  std::vector<Eigen::VectorXd> atoms;
  Eigen::VectorXd log_weights;
  bool normalized = false;

  int size() const { return static_cast<int>(atoms.size()); }

  /// Normalized weights via max-subtracted exponentiation.
  Eigen::VectorXd weights() const {
    double max_lw = log_weights.maxCoeff();
    Eigen::VectorXd w = (log_weights.array() - max_lw).exp();
    return w / w.sum();
  }

  Eigen::VectorXd mean() const {
    Eigen::VectorXd w = weights();
    Eigen::VectorXd m = Eigen::VectorXd::Zero(atoms.front().size());
    for (int i = 0; i < size(); ++i) m += w(i) * atoms[i];
    return m;
  }

  Eigen::MatrixXd covariance() const {
    Eigen::VectorXd w = weights();
    Eigen::VectorXd m = mean();
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(m.size(), m.size());
    for (int i = 0; i < size(); ++i) {
      Eigen::VectorXd dev = atoms[i] - m;
      c += w(i) * dev * dev.transpose();
    }
    return c;
  }

  /// Standard error of the weighted mean, per coordinate.
  Eigen::VectorXd mean_std_error() const {
    Eigen::VectorXd w = weights();
    Eigen::VectorXd m = mean();
    Eigen::VectorXd v = Eigen::VectorXd::Zero(m.size());
    for (int i = 0; i < size(); ++i)
      v += (w(i) * w(i)) * (atoms[i] - m).cwiseAbs2();
    return v.cwiseSqrt();
  }
};

inline ParticleMeasure particles_from_prior(std::mt19937_64& rng, const Eigen::VectorXd& b0,
                                            const Eigen::MatrixXd& sigma0, int count) {
  if (count < 1) throw std::invalid_argument("particles_from_prior: need at least one atom");
  ParticleMeasure mu;
  mu.atoms.reserve(count);
  Eigen::MatrixXd factor = psd_factor(sigma0);
  for (int i = 0; i < count; ++i) mu.atoms.push_back(sample_mvn(rng, b0, factor));
  mu.log_weights = Eigen::VectorXd::Zero(count);
  mu.normalized = true;
  return mu;
}

inline ParticleMeasure dirac_measure(const Eigen::VectorXd& b0) {
  ParticleMeasure mu;
  mu.atoms.push_back(b0);
  mu.log_weights = Eigen::VectorXd::Zero(1);
  mu.normalized = true;
  return mu;
}

/// Bayes update of the posterior on one observed return: each weight is
/// multiplied by the noise density at R - b_i, then the measure is
/// renormalized. Atoms never move (no resampling by default).
inline ParticleMeasure particle_step(const ParticleMeasure& mu, const ReturnSample& ret,
                                     const Eigen::MatrixXd& gamma) {
  if (!mu.normalized) throw std::invalid_argument("particle_step: measure must be normalized");
  GaussianLogDensity log_g(gamma);
  ParticleMeasure next = mu;
  for (int i = 0; i < mu.size(); ++i)
    next.log_weights(i) += log_g(ret.logret - mu.atoms[i]);
  double max_lw = next.log_weights.maxCoeff();
  if (!std::isfinite(max_lw))
    throw std::runtime_error("particle_step: all weights degenerated to zero");
  double log_norm = max_lw + std::log((next.log_weights.array() - max_lw).exp().sum());
  next.log_weights.array() -= log_norm;
  return next;
}

/// Optional systematic resampling for long horizons; atoms are redrawn in
/// proportion to weight and weights reset to uniform.
inline ParticleMeasure systematic_resample(const ParticleMeasure& mu, std::mt19937_64& rng) {
  const int n = mu.size();
  Eigen::VectorXd w = mu.weights();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u0 = unif(rng) / n;
  ParticleMeasure next;
  next.atoms.reserve(n);
  double cum = w(0);
  int j = 0;
  for (int i = 0; i < n; ++i) {
    double u = u0 + static_cast<double>(i) / n;
    while (u > cum && j + 1 < n) cum += w(++j);
    next.atoms.push_back(mu.atoms[j]);
  }
  next.log_weights = Eigen::VectorXd::Zero(n);
  next.normalized = true;
  return next;
}

}  // namespace drawdown
