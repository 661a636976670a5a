#pragma once

#include <cstdint>
#include <cmath>
#include <random>
#include <string_view>

namespace ris {

// splitmix64 finalizer; good avalanche, used to derive child stream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_label(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Deterministic random stream. Gaussian sampling is done by hand
// (Box-Muller) instead of std::normal_distribution so that sequences are
// identical across standard libraries; reproducibility of CSV output is a
// contract of this project, not a nice-to-have.
//
// Child streams derive from the stream id, not the engine state, so the
// substream layout is independent of how much the parent has been consumed.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : id_(seed), engine_(mix64(seed)) {}

  RngStream substream(std::string_view label, std::uint64_t index = 0) const {
    return RngStream(mix64(id_ ^ mix64(hash_label(label) + 0x9e3779b9ULL * (index + 1))));
  }

  std::uint64_t id() const { return id_; }

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller; second value of the pair is cached
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(t);
    have_cached_ = true;
    return r * std::cos(t);
  }

  // uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    // rejection sampling to avoid modulo bias
    const std::uint64_t limit = n * (UINT64_MAX / n);
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return v % n;
  }

 private:
  std::uint64_t id_;
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace ris
