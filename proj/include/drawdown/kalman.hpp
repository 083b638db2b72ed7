#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

#include "drawdown/market.hpp"

namespace drawdown {

/// Posterior of the drift after k observed returns, N(bhat, sigma), plus the
/// gain and innovation covariance used to get there.
struct KalmanState {
  int k = 0;
  Eigen::VectorXd bhat;
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd gain;       // K_k = Sigma_{k-1} (Sigma_{k-1} + Gamma)^-1
  Eigen::MatrixXd innov_cov;  // Sigma_{k-1} + Gamma
};

inline KalmanState kalman_init(const Eigen::VectorXd& b0, const Eigen::MatrixXd& sigma0) {
  KalmanState s;
  s.k = 0;
  s.bhat = b0;
  s.sigma = sigma0;
  s.gain = Eigen::MatrixXd::Zero(b0.size(), b0.size());
  s.innov_cov = Eigen::MatrixXd::Zero(b0.size(), b0.size());
  return s;
}

/// Conjugate update on one return observation:
///   K    = Sigma (Sigma + Gamma)^-1
///   bhat' = bhat + K (R - bhat)
///   Sigma' = Sigma - Sigma (Sigma + Gamma)^-1 Sigma, re-symmetrized.
inline KalmanState kalman_step(const KalmanState& prev, const ReturnSample& ret,
                               const Eigen::MatrixXd& gamma) {
  const Eigen::MatrixXd innov_cov = prev.sigma + gamma;
  Eigen::LDLT<Eigen::MatrixXd> solver(innov_cov);
  if (solver.info() != Eigen::Success || !solver.isPositive())
    throw std::runtime_error("kalman_step: singular innovation covariance");
  KalmanState next;
  next.k = prev.k + 1;
  next.gain = solver.solve(prev.sigma).transpose();  // Sigma (Sigma+Gamma)^-1
  next.innov_cov = innov_cov;
  next.bhat = prev.bhat + next.gain * (ret.logret - prev.bhat);
  Eigen::MatrixXd sigma = prev.sigma - next.gain * prev.sigma;
  next.sigma = 0.5 * (sigma + sigma.transpose());
  return next;
}

/// Closed-form posterior covariance: Sigma_k = Sigma_0 (Gamma + k Sigma_0)^-1 Gamma.
inline Eigen::MatrixXd sigma_closed_form(const Eigen::MatrixXd& sigma0,
                                         const Eigen::MatrixXd& gamma, int k) {
  if (k < 0) throw std::invalid_argument("sigma_closed_form: k must be >= 0");
  if (k == 0) return sigma0;
  Eigen::MatrixXd denom = gamma + static_cast<double>(k) * sigma0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(denom);
  if (!lu.isInvertible()) throw std::runtime_error("sigma_closed_form: singular Gamma + k Sigma0");
  Eigen::MatrixXd sigma = sigma0 * lu.solve(gamma);
  return 0.5 * (sigma + sigma.transpose());
}

/// Covariance of the posterior-mean estimator after k steps: Var(bhat_k) =
/// Sigma_0 - Sigma_k. PSD and nondecreasing in k; it is the training
/// distribution of the estimator in the neural solver.
inline Eigen::MatrixXd bhat_marginal(const Eigen::MatrixXd& sigma0, const Eigen::MatrixXd& gamma,
                                     int k) {
  return sigma0 - sigma_closed_form(sigma0, gamma, k);
}

/// Deterministic filter schedule shared by the solvers and the simulator:
/// posterior covariances Sigma_k for k = 0..N and gains K_{k+1} for k = 0..N-1.
/// When dirac is set the prior has no mass to learn: all gains are zero and
/// Sigma_k = 0.
struct KalmanSchedule {
  std::vector<Eigen::MatrixXd> sigma;  // size N+1
  std::vector<Eigen::MatrixXd> gain;   // size N, gain[k] maps innovation k -> k+1
};

inline KalmanSchedule kalman_schedule(const MarketParams& params, bool dirac = false) {
  KalmanSchedule sched;
  const int n = params.n_steps;
  const int d = params.d;
  sched.sigma.reserve(n + 1);
  sched.gain.reserve(n);
  if (dirac) {
    for (int k = 0; k <= n; ++k) sched.sigma.push_back(Eigen::MatrixXd::Zero(d, d));
    for (int k = 0; k < n; ++k) sched.gain.push_back(Eigen::MatrixXd::Zero(d, d));
    return sched;
  }
  KalmanState state = kalman_init(params.b0, params.sigma0);
  sched.sigma.push_back(state.sigma);
  for (int k = 0; k < n; ++k) {
    // Advance with a zero-innovation observation: covariance and gain do not
    // depend on the observed return.
    KalmanState next = kalman_step(state, ReturnSample{state.bhat}, params.gamma);
    sched.gain.push_back(next.gain);
    sched.sigma.push_back(next.sigma);
    state = next;
  }
  return sched;
}

}  // namespace drawdown
