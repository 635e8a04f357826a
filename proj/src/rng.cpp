#include "cghd/rng.hpp"

#include <cmath>

#include "cghd/quadrature.hpp"

namespace cghd {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, Stage stage, std::uint64_t i,
                          std::uint64_t j) {
  std::uint64_t state = master;
  std::uint64_t out = splitmix64(state);
  state ^= static_cast<std::uint64_t>(stage);
  out ^= splitmix64(state);
  state ^= i;
  out ^= splitmix64(state);
  state ^= j;
  out ^= splitmix64(state);
  return out;
}

double Rng::normal() {
  const double u1 = uniform_pos();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection-free modulo is fine here: n is tiny against 2^64, the bias is
  // ~n/2^64 and irrelevant for bootstrap index draws.
  return engine_() % n;
}

}  // namespace cghd
