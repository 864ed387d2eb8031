#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace fpsens {

using Rng = std::mt19937_64;

/// Independent generator for batch `stream` of a run seeded with `seed`.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x5eedu};
  return Rng(seq);
}

/// Uniform on the open interval (0, 1); never returns 0 or 1.
inline double uniform_open(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline Eigen::VectorXd standard_normal_vector(Rng& rng, Eigen::Index dim) {
  std::normal_distribution<double> gauss;
  Eigen::VectorXd x(dim);
  for (Eigen::Index i = 0; i < dim; ++i) x[i] = gauss(rng);
  return x;
}

}  // namespace fpsens
