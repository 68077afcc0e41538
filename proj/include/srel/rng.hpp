#ifndef SREL_RNG_HPP
#define SREL_RNG_HPP

#include <cmath>
#include <cstdint>

namespace srel {

inline std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer (Steele, Lea, Flood 2014)
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based splitmix64 stream: output i is a pure function of (key, i),
// so any substream can be regenerated independently of thread scheduling.
// Substreams for path j of a run with seed s use key = mix64(s ^ mix64(j)),
// which keeps streams decorrelated across both seeds and path indices.
struct CounterRng {
  std::uint64_t key = 0;
  std::uint64_t ctr = 0;
  bool has_spare = false;
  double spare = 0.0;

  explicit CounterRng(std::uint64_t k) : key(k) {}

  static CounterRng substream(std::uint64_t seed, std::uint64_t stream) {
    return CounterRng(mix64(seed ^ mix64(stream + 0x6A09E667F3BCC909ULL)));
  }

  std::uint64_t next_u64() {
    ctr += 0x9E3779B97F4A7C15ULL;
    std::uint64_t x = key + ctr;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  // uniform on (0,1]
  double next_u01() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // standard normal via Box-Muller; deterministic draw count per pair
  double next_normal() {
    if (has_spare) {
      has_spare = false;
      return spare;
    }
    const double u1 = next_u01();
    const double u2 = next_u01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare = r * std::sin(a);
    has_spare = true;
    return r * std::cos(a);
  }
};

}  // namespace srel

#endif
