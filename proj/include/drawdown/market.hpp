#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "drawdown/rng.hpp"

namespace drawdown {

/// Slack used when comparing a weight sum against the drawdown budget, to
/// absorb rounding when a policy saturates the constraint.
inline constexpr double kBudgetTol = 1e-12;

/// Per-step model parameters. All quantities are per rebalancing step; the
/// config loader converts annualized inputs before anything touches this.
struct MarketParams {
  int d = 0;                // number of risky assets
  int n_steps = 0;          // rebalancing dates N
  double horizon_years = 1.0;
  double p = 0.5;           // CRRA exponent, utility x^p / p
  double q = 0.5;           // drawdown floor as a fraction of the running max
  Eigen::VectorXd b0;       // prior mean of the drift
  Eigen::MatrixXd sigma0;   // prior covariance of the drift
  Eigen::MatrixXd gamma;    // noise covariance
  double x0 = 1.0;          // initial wealth

  double dt() const { return horizon_years / n_steps; }

  void validate() const {
    if (d < 1) throw std::invalid_argument("MarketParams: d must be >= 1");
    if (n_steps < 1) throw std::invalid_argument("MarketParams: N must be >= 1");
    if (!(horizon_years > 0)) throw std::invalid_argument("MarketParams: T must be > 0");
    if (!(p > 0 && p < 1)) throw std::invalid_argument("MarketParams: p must lie in (0,1)");
    // q = 0 is the no-drawdown limit (plain no-short-sale constraint); it is
    // accepted so the Merton comparisons can be run through the same code.
    if (!(q >= 0 && q < 1)) throw std::invalid_argument("MarketParams: q must lie in [0,1)");
    if (!(x0 > 0)) throw std::invalid_argument("MarketParams: x0 must be > 0");
    if (b0.size() != d) throw std::invalid_argument("MarketParams: b0 has wrong length");
    check_spd(sigma0, "Sigma0", /*allow_singular=*/true);
    check_spd(gamma, "Gamma", /*allow_singular=*/false);
  }

 private:
  static void check_spd(const Eigen::MatrixXd& m, const char* name, bool allow_singular) {
    if (m.rows() != m.cols()) throw std::invalid_argument(std::string(name) + ": not square");
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff()))
      throw std::invalid_argument(std::string(name) + ": not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    double min_ev = es.eigenvalues().minCoeff();
    double floor = allow_singular ? -1e-12 : 0.0;
    if (!(min_ev > floor))
      throw std::invalid_argument(std::string(name) + ": eigenvalues must be strictly positive");
  }
};

/// Wealth together with its running maximum. Valid states satisfy
/// q*z <= x <= z, i.e. ratio() in [q, 1].
struct WealthState {
  double x = 1.0;
  double z = 1.0;
  double ratio() const { return x / z; }
};

struct ReturnSample {
  Eigen::VectorXd logret;
};

/// Largest admissible total weight at floor q and ratio r: 1 - q/r.
/// A weight vector a is admissible iff a >= 0 and sum(a) <= this budget.
inline double admissible_budget(double q, double r) {
  if (q == 0.0) return 1.0;
  if (!(r >= q - kBudgetTol && r <= 1.0 + kBudgetTol))
    throw std::domain_error("admissible_budget: ratio outside [q, 1]");
  double b = 1.0 - q / std::min(r, 1.0);
  return std::max(b, 0.0);
}

/// Clips negatives and rescales so that sum(a) <= budget. Output is exactly
/// feasible; inputs already inside the simplex pass through unchanged.
inline Eigen::VectorXd project_to_budget(Eigen::VectorXd a, double budget) {
  for (int i = 0; i < a.size(); ++i) a(i) = std::max(a(i), 0.0);
  double total = a.sum();
  if (total > budget) {
    if (budget <= 0)
      a.setZero();
    else
      a *= budget / total;
  }
  return a;
}

inline bool is_admissible(const Eigen::VectorXd& a, double q, double r) {
  if ((a.array() < -kBudgetTol).any()) return false;
  return a.sum() <= admissible_budget(q, r) + kBudgetTol;
}

/// One self-financed rebalancing step: x' = x * (1 + a'(e^R - 1)),
/// z' = max(z, x'). Feasible weights keep x' >= q z' for every return
/// realization, which is the drawdown guarantee.
inline WealthState wealth_step(const WealthState& state, const Eigen::VectorXd& a,
                               const ReturnSample& ret, double q) {
  if (!is_admissible(a, q, state.ratio()))
    throw std::invalid_argument("wealth_step: weights violate the drawdown budget");
  if (a.size() != ret.logret.size())
    throw std::invalid_argument("wealth_step: weight/return dimension mismatch");
  double growth = 1.0 + a.dot((ret.logret.array().exp() - 1.0).matrix());
  WealthState next;
  next.x = state.x * growth;
  next.z = std::max(state.z, next.x);
  return next;
}

/// Ratio recursion equivalent to wealth_step: r' = min(1, r * growth).
inline double ratio_step(double r, double growth) { return std::min(1.0, r * growth); }

/// Constrained equally-weighted rule: split the whole budget across assets.
inline Eigen::VectorXd ew_policy(const WealthState& state, double q, int d) {
  double budget = admissible_budget(q, state.ratio());
  return Eigen::VectorXd::Constant(d, budget / d);
}

/// R = drift + eps, eps ~ N(0, Gamma). Deterministic given the generator state.
inline ReturnSample sample_returns(std::mt19937_64& rng, const Eigen::VectorXd& drift,
                                   const Eigen::MatrixXd& gamma) {
  Eigen::LLT<Eigen::MatrixXd> llt(gamma);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("sample_returns: Gamma not positive definite");
  return ReturnSample{drift + Eigen::MatrixXd(llt.matrixL()) *
                                  sample_std_normal(rng, static_cast<int>(drift.size()))};
}

/// Hot-path variant with a precomputed factor (chol or psd_factor of Gamma).
inline ReturnSample sample_returns_factored(std::mt19937_64& rng, const Eigen::VectorXd& drift,
                                            const Eigen::MatrixXd& gamma_factor) {
  return ReturnSample{drift +
                      gamma_factor * sample_std_normal(rng, static_cast<int>(drift.size()))};
}

}  // namespace drawdown
