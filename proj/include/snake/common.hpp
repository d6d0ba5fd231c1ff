#pragma once

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace snake {

/// A location in the unit hypercube [0,1]^d.
using Point = Eigen::VectorXd;

/// Bad caller input: wrong dimension, out-of-domain point, empty data.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inconsistent or unsupported configuration, rejected before any work starts.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Linear algebra broke down (e.g. Gram matrix not positive definite after jitter).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A request would exceed a memory/size budget.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// splitmix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic seed derivation: child = mix(mix(mix(root) ^ a) ^ b) ...
inline std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix_seed(root);
  for (auto p : path) s = mix_seed(s ^ p);
  return s;
}

inline bool in_unit_cube(const Point& x) {
  return (x.array() >= 0.0).all() && (x.array() <= 1.0).all();
}

inline void require_unit_cube(const Point& x, const char* where) {
  if (!in_unit_cube(x)) throw InputError(std::string(where) + ": point outside [0,1]^d");
}

}  // namespace snake
