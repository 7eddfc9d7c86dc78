#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ddrbench {

/// Name recorded in run metadata. std::mt19937_64 output is fixed by the
/// standard; only raw engine output is used (no std distributions), so draws
/// are identical across platforms.
inline constexpr char kRngFamily[] = "mt19937_64+splitmix64";

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Folds a list of integers into one well-mixed seed.
inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (auto p : parts) h = splitmix64(h ^ p);
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, n), n > 0, by rejection.
  std::uint64_t uniform_index(std::uint64_t n) {
    std::uint64_t const limit = std::mt19937_64::max() - std::mt19937_64::max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ddrbench
