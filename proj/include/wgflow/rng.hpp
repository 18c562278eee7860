#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Core>

namespace wgf {

/// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for the named sub-stream of a master seed:
///   splitmix64(master ^ splitmix64(fnv1a64(name)))
/// Changing how one subsystem consumes randomness never shifts another subsystem's stream.
std::uint64_t stream_seed(std::uint64_t master, std::string_view name);

/// Seeded random source. Every stochastic operation in the library takes one of these
/// explicitly; nothing reads global state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Child stream derived from a master seed and a name (see stream_seed).
  static Rng stream(std::uint64_t master, std::string_view name) {
    return Rng(stream_seed(master, name));
  }

  double normal() { return normal_(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  Eigen::VectorXd normal_vector(Eigen::Index n);
  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace wgf
