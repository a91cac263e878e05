#pragma once

#include "replica_lab/prior.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <random>

namespace replica_lab {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based split: the seed of sample `index` under `master`.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) ^ (index * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
}

/// Index of an atom drawn from `p` by inverse CDF.
inline Eigen::Index sample_atom_index(const Prior& p, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double acc = 0.0;
  for (Eigen::Index i = 0; i + 1 < p.size(); ++i) {
    acc += p.weights()(i);
    if (u < acc) return i;
  }
  return p.size() - 1;
}

inline Eigen::VectorXd sample_spike(const Prior& p, int n, Rng& rng) {
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = p.values()(sample_atom_index(p, rng));
  return x;
}

inline Eigen::VectorXd sample_normal_vector(int n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z(i) = normal(rng);
  return z;
}

/// Symmetric matrix with i.i.d. N(0,1) above the diagonal (row-major draw order) and zero diagonal.
inline Eigen::MatrixXd sample_wigner_offdiag(int n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      w(i, j) = normal(rng);
      w(j, i) = w(i, j);
    }
  }
  return w;
}

}  // namespace replica_lab
