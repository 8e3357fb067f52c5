#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace ulmc {

// Counter-based random stream: draw i is a pure function of (seed, stream, i),
// so chains can replay or pre-draw their noise and parallel chains use
// disjoint streams without shared state.
namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t draw_at(std::uint64_t key, std::uint64_t counter) {
  return mix64(key + (counter + 1) * 0x9E3779B97F4A7C15ULL);
}

}  // namespace detail

class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : key_(detail::mix64(seed ^ detail::mix64(stream_id + 0x632BE59BD9B4E019ULL))) {}

  // Uniform on the open interval (0,1); never returns 0 or 1.
  double uniform01() {
    const std::uint64_t bits = next() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; consumes exactly two counter slots so a
  // draw index always maps to the same value.
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  std::vector<double> normal_vector(std::size_t n) {
    std::vector<double> out(n);
    for (auto& x : out) x = normal();
    return out;
  }

  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t uniform_below(std::uint64_t bound) { return next() % bound; }

  std::uint64_t position() const { return counter_; }
  void seek(std::uint64_t counter) { counter_ = counter; }

 private:
  std::uint64_t next() { return detail::draw_at(key_, counter_++); }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace ulmc
