#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <random>

namespace qpufsim {

// Identifies a reproducible random sequence. The same (seed, stream_id) pair
// always yields the same draws bit-for-bit. child(k) derives a decorrelated
// substream; Monte Carlo loops give trial i the substream child(i), so results
// do not depend on how trials are distributed over worker threads.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  RngStream child(std::uint64_t k) const { return RngStream{seed, mix(stream_id, k)}; }

 private:
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over the pair
    std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
};

// Draw engine. Uniform and Gaussian variates are generated in-house (bit
// decimation and Box-Muller) so the sequence depends only on the mt19937_64
// stream, not on the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(RngStream s) : eng_(make_engine(s)) {}

  std::uint64_t next_u64() { return eng_(); }

  // uniform on [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform on (0, 1]; safe as a log() argument
  double uniform_open() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // re and im are independent N(0,1); one Box-Muller pair per call
  std::complex<double> complex_gaussian() {
    const double r = std::sqrt(-2.0 * std::log(uniform_open()));
    const double theta = 2.0 * M_PI * uniform();
    return {r * std::cos(theta), r * std::sin(theta)};
  }

  double gaussian() { return complex_gaussian().real(); }

  // unbiased integer on [0, n)
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  void fill_bytes(std::uint8_t* out, std::size_t n) {
    std::size_t i = 0;
    while (i < n) {
      std::uint64_t w = next_u64();
      const std::size_t take = std::min<std::size_t>(8, n - i);
      std::memcpy(out + i, &w, take);
      i += take;
    }
  }

 private:
  static std::mt19937_64 make_engine(RngStream s) {
    // seed_seq's generate() is fully specified by the standard, so seeding is
    // reproducible across implementations
    std::seed_seq seq{
        static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32),
        static_cast<std::uint32_t>(s.stream_id), static_cast<std::uint32_t>(s.stream_id >> 32)};
    return std::mt19937_64(seq);
  }

  std::mt19937_64 eng_;
};

}  // namespace qpufsim
