#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace lfd {

/// Derives a substream seed from a master seed and a purpose tag so that
/// every consumer of randomness (camera, robot, per-trial sims, CV folds)
/// gets an independent, reproducible stream from the single --seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t index = 0) {
  // FNV-1a over the tag, then splitmix-style finalization.
  std::uint64_t h = 14695981039346656037ull;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  std::uint64_t z = master ^ h ^ (index * 0x9e3779b97f4a7c15ull);
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Thin wrapper around mt19937_64 used everywhere noise is injected.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  double gaussian(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lfd
