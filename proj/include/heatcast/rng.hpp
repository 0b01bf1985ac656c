#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace heatcast {

// splitmix64 finalizer; used to mix seeds and hash keys into streams.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_key(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Deterministic random stream. Draws are generated with explicit bit
// arithmetic (not std:: distributions) so sequences do not depend on the
// standard library implementation.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(mix64(seed)) {}

  std::uint64_t bits() { return gen_(); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1); safe as a quantile-function argument.
  double uniform_open() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Lemire-style rejection to avoid modulo bias.
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = gen_();
      if (r >= threshold) return r % n;
    }
  }

  // Standard normal via Box-Muller; consumes two uniforms per pair.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u = uniform_open();
    const double v = uniform_open();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double theta = 2.0 * 3.14159265358979323846 * v;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Fisher-Yates shuffle.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Fans a single top-level seed out into independent per-purpose streams.
// Stream identity depends only on the key values, never on draw order, so
// components stay reproducible when run in isolation or in parallel.
class SeedSequence {
 public:
  explicit SeedSequence(std::uint64_t master) : master_(master) {}

  std::uint64_t master() const { return master_; }

  std::uint64_t derive_seed(std::string_view purpose, std::uint64_t k1 = 0,
                            std::uint64_t k2 = 0, std::uint64_t k3 = 0) const {
    std::uint64_t s = mix64(master_ ^ hash_key(purpose));
    s = mix64(s ^ k1);
    s = mix64(s ^ k2);
    s = mix64(s ^ k3);
    return s;
  }

  RngStream stream(std::string_view purpose, std::uint64_t k1 = 0,
                   std::uint64_t k2 = 0, std::uint64_t k3 = 0) const {
    return RngStream(derive_seed(purpose, k1, k2, k3));
  }

 private:
  std::uint64_t master_;
};

}  // namespace heatcast
