#pragma once

#include <cstdint>
#include <vector>

namespace faqtor {

// PCG32 (XSH-RR variant, 64-bit state / 32-bit output).
// Streams: episode k of a run seeded with `seed` uses
// pcg32(seed, seed ^ k), so datasets are reproducible record-for-record
// across platforms and languages that implement the same generator.
class Pcg32 {
 public:
  Pcg32() : Pcg32(0x853c49e6748fea9bULL, 0xda3e39cb94b95bdbULL) {}

  Pcg32(std::uint64_t seed, std::uint64_t stream) {
    state_ = 0u;
    inc_ = (stream << 1u) | 1u;
    next_u32();
    state_ += seed;
    next_u32();
  }

  std::uint32_t next_u32() {
    std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    std::uint32_t xorshifted =
        static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
  }

  // Uniform double in [0, 1) with 32 bits of resolution: u32 * 2^-32.
  double next_double() {
    return next_u32() * 0x1p-32;
  }

  // Index into `probs` by CDF walk over a single uniform draw.
  // The final bucket absorbs any rounding slack.
  int next_categorical(const std::vector<double>& probs) {
    double u = next_double();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
  }

 private:
  std::uint64_t state_;
  std::uint64_t inc_;
};

}  // namespace faqtor
