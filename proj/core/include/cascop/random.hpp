#pragma once

#include <cstdint>

namespace cascop {

// splitmix64 (Steele, Lea, Flood 2014). Used for seeding and key mixing.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// xoshiro256++ (Blackman, Vigna 2019). All simulation randomness flows
// through this engine, so results do not depend on the standard library.
class Engine {
 public:
  using result_type = std::uint64_t;

  explicit Engine(std::uint64_t seed = 0) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    // Recommended seeding: fill the state with splitmix64 outputs.
    std::uint64_t x = seed;
    for (auto& w : s_) {
      x += 0x9E3779B97F4A7C15ULL;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
      w = z ^ (z >> 31);
    }
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ULL; }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform double in (0, 1]; safe as an argument to log().
  double uniform_pos() { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

// Unbiased uniform integer in [0, bound) by rejection.
inline std::uint64_t uniform_below(Engine& eng, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = eng();
    if (r >= threshold) return r % bound;
  }
}

// Counter-based key derivation for the cascade tree. Every tree node owns a
// key derived from its parent's key and its child index, so expanding the
// tree in any order (or in parallel) realizes the same cascade.
struct PathKey {
  std::uint64_t v;

  PathKey child(std::uint64_t index) const {
    return PathKey{splitmix64(v ^ splitmix64(index + 0x51ED2701A4D7E1F3ULL))};
  }
  // Independent sub-streams of one node: atom masses vs ball placement.
  // Keeping them separate makes the realized cascade identical no matter
  // how many balls are thrown on it.
  Engine atom_engine() const { return Engine(splitmix64(v ^ 0xA70A70A70A70A70AULL)); }
  Engine ball_engine() const { return Engine(splitmix64(v ^ 0xB411B411B411B411ULL)); }
};

inline PathKey root_key(std::uint64_t seed, std::uint64_t replica = 0) {
  return PathKey{splitmix64(splitmix64(seed) ^ splitmix64(replica * 0xD1B54A32D192ED03ULL + 1))};
}

}  // namespace cascop
