#ifndef CRITLIM_RNG_HPP
#define CRITLIM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace critlim {

// Counter-based generator (Philox2x64, 10 rounds).  A stream is fully
// determined by its 64-bit key, so independent substreams are obtained by
// hashing (root_seed, tag, component, replicate) into a key.  Draw i of a
// stream never depends on other streams or on scheduling order.
class Philox {
 public:
  using result_type = std::uint64_t;

  explicit Philox(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<std::uint64_t>::max();
  }

  result_type operator()() {
    if (have_) {
      have_ = false;
      return spare_;
    }
    auto [a, b] = block(counter_++);
    spare_ = b;
    have_ = true;
    return a;
  }

  // Uniform on (0,1]; never 0, so logs are safe.
  double uniform() {
    return (static_cast<double>((*this)() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; consumes exactly two uniforms per pair.
  double normal() {
    if (have_normal_) {
      have_normal_ = false;
      return spare_normal_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_normal_ = r * std::sin(a);
    have_normal_ = true;
    return r * std::cos(a);
  }

 private:
  std::pair<std::uint64_t, std::uint64_t> block(std::uint64_t ctr) const {
    std::uint64_t x0 = ctr, x1 = 0, k = key_;
    for (int round = 0; round < 10; ++round) {
      const unsigned __int128 prod =
          static_cast<unsigned __int128>(kMul) * x0;
      const std::uint64_t hi = static_cast<std::uint64_t>(prod >> 64);
      const std::uint64_t lo = static_cast<std::uint64_t>(prod);
      x0 = hi ^ k ^ x1;
      x1 = lo;
      k += kWeyl;
    }
    return {x0, x1};
  }

  static constexpr std::uint64_t kMul = 0xD2B74407B1CE6E93ULL;
  static constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ULL;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::uint64_t spare_ = 0;
  bool have_ = false;
  double spare_normal_ = 0.0;
  bool have_normal_ = false;
};

// SplitMix64 finalizer, used only to mix stream tags into Philox keys.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t stream_key(std::uint64_t root, std::uint64_t tag,
                                std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t k = mix64(root);
  k = mix64(k ^ tag);
  k = mix64(k ^ a);
  k = mix64(k ^ b);
  return k;
}

// Stream tags; keep them distinct so substreams never collide by purpose.
namespace stream_tag {
constexpr std::uint64_t process_x = 0x5831;
constexpr std::uint64_t process_xt = 0x5832;
constexpr std::uint64_t assumptions = 0xA55E;
constexpr std::uint64_t limit_law = 0x11A7;
constexpr std::uint64_t generic = 0x6E6E;
}  // namespace stream_tag

inline Philox make_stream(std::uint64_t root, std::uint64_t tag,
                          std::uint64_t a = 0, std::uint64_t b = 0) {
  return Philox(stream_key(root, tag, a, b));
}

}  // namespace critlim

#endif  // CRITLIM_RNG_HPP
