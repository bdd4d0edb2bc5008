#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace qmon {

// Counter-based pseudo-random stream. Each trajectory gets its own stream
// keyed by (seed, stream index), so ensemble results do not depend on the
// number of worker threads or on the iteration schedule.
struct SplitMix64 {
  std::uint64_t state;

  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ULL; }

  result_type operator()() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

inline std::uint64_t substream_key(std::uint64_t seed, std::uint64_t stream) {
  // Feistel-ish mix of the pair; any bijective scramble works here.
  std::uint64_t z = seed ^ (0x9e3779b97f4a7c15ULL + (stream << 1));
  z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdULL;
  z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ULL;
  return z ^ (z >> 33);
}

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream)
      : eng_{substream_key(seed, stream)} {}
  explicit RngStream(std::uint64_t key) : eng_{key} {}

  // uniform in [0,1)
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double exponential(double mean) {
    return -mean * std::log1p(-uniform());
  }

  // standard normal, Box-Muller (no spare cached; streams stay stateless
  // beyond the counter)
  double normal() {
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  // index sampled from an unnormalized nonnegative weight vector whose sum
  // is `total`
  int categorical(std::span<const double> w, double total) {
    const double u = uniform() * total;
    double acc = 0.0;
    const int n = static_cast<int>(w.size());
    for (int i = 0; i < n; ++i) {
      acc += w[i];
      if (u < acc) return i;
    }
    return n - 1;
  }

 private:
  SplitMix64 eng_;
};

}  // namespace qmon
