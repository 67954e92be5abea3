#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace sslab {

// SplitMix64 step: bijective avalanche on 64-bit words.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a of a tag string; used to key independent streams by purpose.
inline constexpr std::uint64_t purpose_tag(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Counter-based stream addressing: the key is a pure function of
// (seed, replication index, purpose), so any replication can be generated
// in isolation, in any order, on any thread.
inline constexpr std::uint64_t stream_key(std::uint64_t seed,
                                          std::uint64_t replication,
                                          std::uint64_t tag) {
  return mix64(mix64(mix64(seed) ^ replication) ^ tag);
}

// xoshiro256++ seeded from one 64-bit key through SplitMix64.
class Rng {
 public:
  explicit Rng(std::uint64_t key) {
    std::uint64_t sm = key;
    for (auto& w : s_) {
      sm += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = sm;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      w = z ^ (z >> 31);
    }
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  std::uint64_t next() {
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

  // Strictly inside (0,1): 53-bit draw offset by half an ulp.
  double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller pair; the second variate is cached, so normals consume
  // exactly two uniforms per pair regardless of call pattern.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sslab
