#pragma once

#include <cstdint>
#include <random>

namespace cghd {

/// splitmix64 step; used to derive independent stream seeds from a master
/// seed and a (stage, i, j) key, so parallel or reordered execution sees the
/// same streams.
std::uint64_t splitmix64(std::uint64_t& state);

enum class Stage : std::uint64_t {
  Scan = 1,
  Trial = 2,
  Bootstrap = 3,
  ClassicalTrial = 4,
  Campaign = 5,
};

std::uint64_t derive_seed(std::uint64_t master, Stage stage, std::uint64_t i,
                          std::uint64_t j = 0);

/// Deterministic random stream: mt19937_64 (bit-exact per the standard) with
/// hand-rolled uniform/normal mappings so the produced doubles are
/// reproducible across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in (0, 1].
  double uniform_pos() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (two uniforms per draw, no cached spare).
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace cghd
