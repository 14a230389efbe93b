#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace onda {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Invalid configuration value or out-of-range parameter.
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Malformed, inconsistent, or non-finite input data.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An optimizer iterate became non-finite.
struct DivergedError : std::runtime_error {
  DivergedError(const std::string& what, int iter)
      : std::runtime_error(what + " (iteration " + std::to_string(iter) + ")"),
        iteration(iter) {}
  int iteration;
};

/// Deterministic seed mixing for derived RNG streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace onda
