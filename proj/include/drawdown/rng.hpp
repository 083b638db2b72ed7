#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>

namespace drawdown {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Independent generator derived from one root seed, a stream name and an
/// index. Every source of randomness in the project goes through here so
/// that components can be re-run in isolation yet reproducibly.
inline std::mt19937_64 substream(std::uint64_t root, std::string_view name,
                                 std::uint64_t index = 0) {
  std::uint64_t s = detail::splitmix64(root ^ detail::fnv1a64(name));
  s = detail::splitmix64(s ^ detail::splitmix64(index));
  return std::mt19937_64(s);
}

inline Eigen::VectorXd sample_std_normal(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out(i) = dist(rng);
  return out;
}

/// Factor A with A*A' = S for a symmetric PSD matrix. Uses an eigendecomposition
/// so singular matrices (e.g. a collapsed prior covariance) are accepted;
/// eigenvalues below -1e-10*scale are rejected as non-PSD.
inline Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& S) {
  if (S.rows() != S.cols()) throw std::invalid_argument("psd_factor: matrix not square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success) throw std::runtime_error("psd_factor: eigendecomposition failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  Eigen::VectorXd root(ev.size());
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) < -1e-10 * scale) throw std::invalid_argument("psd_factor: matrix not PSD");
    root(i) = std::sqrt(std::max(ev(i), 0.0));
  }
  return es.eigenvectors() * root.asDiagonal();
}

/// Draw from N(mean, factor*factor').
inline Eigen::VectorXd sample_mvn(std::mt19937_64& rng, const Eigen::VectorXd& mean,
                                  const Eigen::MatrixXd& factor) {
  return mean + factor * sample_std_normal(rng, static_cast<int>(factor.cols()));
}

}  // namespace drawdown
