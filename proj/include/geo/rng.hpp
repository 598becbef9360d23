#pragma once

// xoshiro256** with explicit helpers, so sequences are identical across
// standard libraries (std distributions are implementation-defined).

#include <array>
#include <cstdint>
#include <string>

namespace geo {

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next();
  /// Uniform integer in [0, n); n must be > 0.
  std::size_t uniform(std::size_t n);
  /// Uniform real in [0, 1).
  double uniform01();
  double normal(double mean = 0.0, double stddev = 1.0);
  bool bernoulli(double p) { return uniform01() < p; }

  /// Hex state, for persisting a run.
  std::string state() const;
  void set_state(const std::string& hex);

 private:
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace geo
