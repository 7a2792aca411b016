#pragma once

#include "eot/measures.hpp"

#include <cstdint>
#include <random>

namespace eot {

/// Independent stream for (seed, index), e.g. one per particle or per generated instance.
inline std::mt19937_64 stream_for(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over both words
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::seed_seq seq{mix(seed), mix(seed ^ mix(index)), mix(index)};
  return std::mt19937_64(seq);
}

/// Flat Dirichlet sample of length n.
template <typename Scalar>
Vector<Scalar> dirichlet_weights(std::mt19937_64& rng, Index n) {
  std::exponential_distribution<double> expo(1.0);
  Vector<Scalar> w(n);
  for (Index i = 0; i < n; ++i) w(i) = Scalar(expo(rng)) + Scalar(1e-12);
  return w / compensated_sum(w);
}

/// n points uniform in [0,1]^d with Dirichlet weights.
template <typename Scalar>
DiscreteMeasure<Scalar> random_measure(std::mt19937_64& rng, Index n, Index d) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix<Scalar> pts(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < d; ++k) pts(i, k) = Scalar(unif(rng));
  }
  Vector<Scalar> w = dirichlet_weights<Scalar>(rng, n);
  return DiscreteMeasure<Scalar>(std::move(pts), std::move(w));
}

template <typename Scalar>
Instance<Scalar> random_instance(std::mt19937_64& rng, Index n, Index m, Scalar epsilon, Index d = 2,
                                 CostKind kind = CostKind::half_sqeuclidean) {
  DiscreteMeasure<Scalar> mu = random_measure<Scalar>(rng, n, d);
  DiscreteMeasure<Scalar> nu = random_measure<Scalar>(rng, m, d);
  return Instance<Scalar>(std::move(mu), std::move(nu), kind, epsilon);
}

/// Random potential with entries uniform in [-scale, scale].
template <typename Scalar>
Vector<Scalar> random_potential(std::mt19937_64& rng, Index m, Scalar scale) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Vector<Scalar> v(m);
  for (Index j = 0; j < m; ++j) v(j) = scale * Scalar(unif(rng));
  return v;
}

}  // namespace eot
