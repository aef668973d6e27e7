#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace otra {

inline constexpr const char* kVersion = "0.1.0";

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Thrown when an iterative numeric routine cannot produce a usable result
/// (simplex pivot-count guard tripped, non-finite values encountered, ...).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a stochastic generation protocol exhausts its budget,
/// e.g. rejection sampling of policy-equivalent rewards. Carries the
/// observed acceptance rate when one is meaningful (negative otherwise).
class GenerationError : public std::runtime_error {
 public:
  explicit GenerationError(const std::string& what, double acceptance_rate = -1.0)
      : std::runtime_error(what), acceptance_rate_(acceptance_rate) {}

  double acceptance_rate() const { return acceptance_rate_; }

 private:
  double acceptance_rate_;
};

/// Thrown on malformed configuration; the message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Indexing
// ---------------------------------------------------------------------------

/// Canonical flattening of a (state, action) pair into [0, S*A).
/// Every vectorized reward/measure in the library uses this layout.
inline int flat_index(int state, int action, int num_actions) {
  return state * num_actions + action;
}

// ---------------------------------------------------------------------------
// Log-domain helpers
// ---------------------------------------------------------------------------

/// log(sum_i exp(x_i)) with max subtraction. Returns -inf for empty input
/// or all -inf entries.
double log_sum_exp(const Vector& x);

/// Row-wise log-sum-exp of a matrix, returned as a column vector.
Vector log_sum_exp_rows(const Matrix& m);

// ---------------------------------------------------------------------------
// Deterministic randomness
// ---------------------------------------------------------------------------
//
// All stochastic code in the library draws through Rng so that a seed fully
// determines every produced artifact across platforms. std::mt19937_64 has a
// portable, standard-mandated output sequence; the distributions below are
// hand-rolled because the <random> distribution objects are not portable.

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (always consumes two draws).
  double normal();

  /// Index in [0, weights.size()) with probability proportional to weights.
  /// Weights must be non-negative with a positive sum.
  int categorical(const Vector& weights);

  /// Uniform integer in [0, n).
  int uniform_int(int n) {
    return static_cast<int>(uniform() * static_cast<double>(n));
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace otra
