#pragma once

#include <array>
#include <cstdint>

namespace eqlab {

// Philox4x64-10 block function (Salmon et al., Random123).
using PhiloxCounter = std::array<std::uint64_t, 4>;
using PhiloxKey = std::array<std::uint64_t, 2>;
PhiloxCounter philox4x64(PhiloxCounter counter, PhiloxKey key);

// Independent, reproducible substream addressed by (seed, domain, a, b).
// `domain` separates unrelated consumers (generation, proxy relabelling)
// so two of them never read the same counter blocks. Words are produced by
// incrementing the first counter word; the remaining words hold (a, b).
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t domain, std::uint64_t a,
                std::uint64_t b);

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on (0, 1).
  double uniform_open();
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double lognormal(double log_mean, double log_sd);
  // Marsaglia-Tsang; shape > 0.
  double gamma(double shape);
  double beta(double a, double b);
  bool bernoulli(double p) { return uniform() < p; }

 private:
  void refill();

  PhiloxKey key_;
  PhiloxCounter counter_;
  PhiloxCounter block_{};
  int used_ = 4;
};

}  // namespace eqlab
