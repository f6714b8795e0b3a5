#pragma once

#include <cstdint>
#include <random>

#include "faris/common.hpp"

namespace faris {

/// Named sub-streams derived from a master seed. Every random consumer owns
/// its own stream so that adding draws in one place never shifts another.
enum class Stream : std::uint64_t {
  kChannels = 1,
  kInitV = 2,
  kInitSelection = 3,
  kRandomization = 4,
  kCem = 5,
  kInner = 6,
};

/// SplitMix64 finalizer over (seed, stream, index).
std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index = 0);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return unit_(engine_); }
  double normal() { return normal_(engine_); }
  /// Circularly symmetric CN(0, 1): real and imaginary parts each N(0, 1/2).
  Complex complex_normal();
  CVec complex_normal_vector(Eigen::Index n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace faris
