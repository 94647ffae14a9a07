#ifndef VARFORM_RNG_HPP_
#define VARFORM_RNG_HPP_

#include <cstdint>

namespace varform {

// splitmix64 step; used to derive independent stream seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic sub-stream seed for (master, a, b), e.g. (seed, cell, replication).
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t a,
                                    std::uint64_t b = 0) {
  std::uint64_t s = master;
  std::uint64_t x = splitmix64(s) ^ (a * 0xd1342543de82ef95ULL);
  std::uint64_t y = splitmix64(x) ^ (b * 0xaf251af3b0f025b5ULL);
  return splitmix64(y);
}

// xoshiro256++ with splitmix64 seeding. The output sequence is fully specified
// by the seed, independent of platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe under log().
  double uniform_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal draw, ziggurat method (Doornik layout, 128 layers).
  double normal();

  // Standard normal draw, Marsaglia polar method. Slower; retained as an
  // independent cross-check of the ziggurat tables.
  double normal_polar();

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  double normal_tail(bool negative);

  std::uint64_t state_[4];
};

}  // namespace varform

#endif  // VARFORM_RNG_HPP_
