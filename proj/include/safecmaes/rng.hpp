#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "safecmaes/mathkit.hpp"

namespace safecmaes {

/// xoshiro256++ seeded through splitmix64; normals by the Marsaglia polar
/// method. Draw sequences depend only on the seed, never on the platform's
/// <random> distributions.
class RngStream {
 public:
  static constexpr std::string_view kVersionTag = "xoshiro256pp-polar-v1";

  explicit RngStream(std::uint64_t seed);

  /// Seed for an independent child stream, e.g. one per trial.
  static std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t stream = 0);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);

  double normal();

  /// d i.i.d. standard normal draws. Throws ContractViolation when d < 1.
  Vector std_normal(Eigen::Index d);

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace safecmaes
