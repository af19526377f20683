#ifndef TOHM_RNG_HPP
#define TOHM_RNG_HPP

#include <cstdint>

namespace tohm {

// SplitMix64.  Small, fast, and good enough for Monte Carlo streams; chosen
// over std::mt19937_64 so that the byte-level output of every simulation is
// pinned by this header alone and not by the standard library in use.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double strictly inside (0, 1): 53 random bits plus a half-ulp
  // offset, so downstream quantile transforms never see 0 or 1.
  double uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

 private:
  std::uint64_t state_;
};

// Pure derivation of per-stream seeds from a master seed.  Replicate k of a
// simulation always draws from derive_stream(master, k) no matter which
// thread runs it, which is what makes results independent of --threads.
inline std::uint64_t derive_stream(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master ^ ((index + 0x632be59bd9b4e019ULL) * 0x9e3779b97f4a7c15ULL);
  for (int round = 0; round < 2; ++round) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
  }
  return z;
}

}  // namespace tohm

#endif
