#pragma once
#include <cmath>
#include <cstdint>
#include <numbers>

#include <Eigen/Core>

namespace grankin {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// counter-based stream: value k of stream (seed, id) is a pure function of the triple
struct CounterRng {
  std::uint64_t key;
  std::uint64_t ctr = 0;
  CounterRng(std::uint64_t seed, std::uint64_t id) : key(splitmix64(seed ^ splitmix64(id + 0x632BE59BD9B4E019ull))) {}
  std::uint64_t next() { return splitmix64(key + 0x9E3779B97F4A7C15ull * ++ctr); }
  // uniform in (0, 1)
  double uniform() { return (double(next() >> 11) + 0.5) * 0x1.0p-53; }
  double normal() {
    const double u = uniform(), v = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
  }
};

// uniformly distributed rotation (unit quaternion from three uniforms)
inline Eigen::Matrix3d random_rotation(CounterRng& rng) {
  const double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1), t2 = 2.0 * std::numbers::pi * u2,
               t3 = 2.0 * std::numbers::pi * u3;
  const double x = a * std::sin(t2), y = a * std::cos(t2), z = b * std::sin(t3), w = b * std::cos(t3);
  Eigen::Matrix3d r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w),  //
      2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w),   //
      2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y);
  return r;
}

}  // namespace grankin
