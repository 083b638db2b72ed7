#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "drawdown/market.hpp"
#include "drawdown/rng.hpp"

using namespace drawdown;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Eigen::MatrixXd random_spd(std::mt19937_64& rng, int d, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = dist(rng);
  return scale * (a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(d, d));
}

}  // namespace

TEST_CASE("admissible budget formula", "[market]") {
  CHECK_THAT(admissible_budget(0.7, 1.0), WithinAbs(0.3, 1e-15));
  CHECK_THAT(admissible_budget(0.7, 0.7), WithinAbs(0.0, 1e-15));
  CHECK_THAT(admissible_budget(0.4, 0.8), WithinAbs(0.5, 1e-15));
  CHECK_THROWS_AS(admissible_budget(0.7, 0.5), std::domain_error);
  CHECK_THROWS_AS(admissible_budget(0.7, 1.2), std::domain_error);
}

TEST_CASE("budget monotone in q and r, homogeneous, convex", "[market]") {
  std::mt19937_64 rng = substream(7, "market-props");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    double q1 = 0.1 + 0.5 * unif(rng);
    double q2 = q1 + (0.99 - q1) * unif(rng) * 0.5;
    double z = 1.0 + 4.0 * unif(rng);
    double x = z * (q2 + (1.0 - q2) * unif(rng));
    double r = x / z;
    // decreasing in q
    CHECK(admissible_budget(q2, r) <= admissible_budget(q1, r) + 1e-15);
    // increasing in x at fixed z
    double x2 = x + (z - x) * unif(rng);
    CHECK(admissible_budget(q1, x2 / z) + 1e-15 >= admissible_budget(q1, r));
    // depends on (x, z) only through the ratio
    double lambda = 0.5 + 4.0 * unif(rng);
    CHECK_THAT(admissible_budget(q1, (lambda * x) / (lambda * z)),
               WithinAbs(admissible_budget(q1, r), 1e-12));
    // convexity: a blend of feasible vectors is feasible
    int d = 3;
    double budget = admissible_budget(q1, r);
    Eigen::VectorXd a1(d), a2(d);
    for (int i = 0; i < d; ++i) {
      a1(i) = unif(rng);
      a2(i) = unif(rng);
    }
    a1 *= budget / std::max(a1.sum(), 1e-12) * unif(rng);
    a2 *= budget / std::max(a2.sum(), 1e-12) * unif(rng);
    double t = unif(rng);
    Eigen::VectorXd blend = t * a1 + (1.0 - t) * a2;
    CHECK(is_admissible(blend, q1, r));
  }
}

TEST_CASE("wealth step arithmetic", "[market]") {
  const double q = 0.7;
  WealthState s{1.0, 1.0};

  SECTION("zero weights leave the state unchanged") {
    ReturnSample ret{Eigen::VectorXd::Constant(2, -3.0)};
    WealthState next = wealth_step(s, Eigen::VectorXd::Zero(2), ret, q);
    CHECK(next.x == 1.0);
    CHECK(next.z == 1.0);
  }

  SECTION("doubling return on a 30% position") {
    ReturnSample ret{Eigen::VectorXd::Constant(1, std::log(2.0))};
    WealthState next = wealth_step(s, Eigen::VectorXd::Constant(1, 0.3), ret, q);
    CHECK_THAT(next.x, WithinAbs(1.3, 1e-15));
    CHECK_THAT(next.z, WithinAbs(1.3, 1e-15));
    CHECK_THAT(next.ratio(), WithinAbs(1.0, 1e-15));
  }

  SECTION("worst-case loss saturates the floor") {
    ReturnSample ret{Eigen::VectorXd::Constant(1, -745.0)};  // e^R == 0 in double
    WealthState next = wealth_step(s, Eigen::VectorXd::Constant(1, 0.3), ret, q);
    CHECK_THAT(next.x, WithinAbs(0.7, 1e-12));
    CHECK(next.x >= q * next.z - 1e-12);
  }

  SECTION("inadmissible weights are rejected") {
    ReturnSample ret{Eigen::VectorXd::Zero(1)};
    CHECK_THROWS_AS(wealth_step(s, Eigen::VectorXd::Constant(1, 0.31), ret, q),
                    std::invalid_argument);
    CHECK_THROWS_AS(wealth_step(s, Eigen::VectorXd::Constant(1, -0.01), ret, q),
                    std::invalid_argument);
  }
}

TEST_CASE("drawdown floor holds for any admissible weights and returns", "[market]") {
  std::mt19937_64 rng = substream(11, "market-floor");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 3.0);
  for (int trial = 0; trial < 500; ++trial) {
    double q = 0.05 + 0.9 * unif(rng);
    double z = 0.5 + 2.0 * unif(rng);
    double x = z * (q + (1.0 - q) * unif(rng));
    WealthState s{x, z};
    int d = 1 + static_cast<int>(unif(rng) * 3);
    Eigen::VectorXd a(d);
    for (int i = 0; i < d; ++i) a(i) = unif(rng);
    a = project_to_budget(a, admissible_budget(q, s.ratio()) * unif(rng) * 1.2);
    Eigen::VectorXd r(d);
    for (int i = 0; i < d; ++i) r(i) = noise(rng);
    WealthState next = wealth_step(s, a, ReturnSample{r}, q);
    CHECK(next.x >= q * next.z - 1e-12 * z);
    CHECK(next.z >= s.z);
    // ratio recursion agrees with the (x, z) bookkeeping
    double growth = 1.0 + a.dot((r.array().exp() - 1.0).matrix());
    CHECK_THAT(next.ratio(), WithinAbs(ratio_step(s.ratio(), growth), 1e-12));
  }
}

TEST_CASE("equally weighted policy splits the budget", "[market]") {
  Eigen::VectorXd w = ew_policy(WealthState{1.0, 1.0}, 0.7, 3);
  REQUIRE(w.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK_THAT(w(i), WithinAbs(0.1, 1e-15));

  Eigen::VectorXd at_floor = ew_policy(WealthState{0.7, 1.0}, 0.7, 4);
  CHECK_THAT(at_floor.cwiseAbs().maxCoeff(), WithinAbs(0.0, 1e-15));

  Eigen::VectorXd mid = ew_policy(WealthState{0.8, 1.0}, 0.4, 2);
  CHECK_THAT(mid(0), WithinAbs(0.25, 1e-15));
  CHECK_THAT(mid(1), WithinAbs(0.25, 1e-15));
}

TEST_CASE("return sampling is deterministic and respects tiny noise", "[market]") {
  Eigen::VectorXd drift(2);
  drift << 0.01, -0.02;
  Eigen::MatrixXd gamma = 1e-18 * Eigen::MatrixXd::Identity(2, 2);
  std::mt19937_64 rng = substream(3, "returns");
  ReturnSample r = sample_returns(rng, drift, gamma);
  CHECK_THAT(r.logret(0), WithinAbs(0.01, 1e-7));
  CHECK_THAT(r.logret(1), WithinAbs(-0.02, 1e-7));

  std::mt19937_64 rng_a = substream(42, "returns");
  std::mt19937_64 rng_b = substream(42, "returns");
  Eigen::MatrixXd g2 = 0.01 * Eigen::MatrixXd::Identity(2, 2);
  ReturnSample ra = sample_returns(rng_a, drift, g2);
  ReturnSample rb = sample_returns(rng_b, drift, g2);
  CHECK(ra.logret == rb.logret);
}

TEST_CASE("sample covariance of draws matches the input covariance", "[market]") {
  // Monte-Carlo check against the generator's own covariance: with n draws the
  // entrywise standard error of the sample covariance is roughly
  // sqrt((g_ii g_jj + g_ij^2) / n).
  Eigen::MatrixXd gamma(3, 3);
  gamma << 0.0064, -0.00032, 0.00352, -0.00032, 0.0016, -0.0022, 0.00352, -0.0022, 0.0484;
  Eigen::VectorXd drift = Eigen::VectorXd::Zero(3);
  const int n = 1000000;
  std::mt19937_64 rng = substream(5, "cov-check");
  Eigen::MatrixXd factor =
      Eigen::LLT<Eigen::MatrixXd>(gamma).matrixL();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(3, 3);
  Eigen::VectorXd mean_sum = Eigen::VectorXd::Zero(3);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x = sample_returns_factored(rng, drift, factor).logret;
    sum += x * x.transpose();
    mean_sum += x;
  }
  Eigen::VectorXd mean = mean_sum / n;
  Eigen::MatrixXd cov = sum / n - mean * mean.transpose();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double se = std::sqrt((gamma(i, i) * gamma(j, j) + gamma(i, j) * gamma(i, j)) / n);
      CHECK_THAT(cov(i, j), WithinAbs(gamma(i, j), 3.0 * se));
    }
}

TEST_CASE("parameter validation", "[market]") {
  MarketParams params;
  params.d = 2;
  params.n_steps = 4;
  params.horizon_years = 1.0;
  params.p = 0.8;
  params.q = 0.7;
  params.x0 = 1.0;
  params.b0 = Eigen::VectorXd::Constant(2, 0.01);
  std::mt19937_64 rng = substream(1, "validate");
  params.sigma0 = random_spd(rng, 2, 1e-4);
  params.gamma = random_spd(rng, 2, 1e-3);
  CHECK_NOTHROW(params.validate());

  MarketParams bad = params;
  bad.p = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = params;
  bad.q = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = params;
  bad.gamma = Eigen::MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = params;
  bad.x0 = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
