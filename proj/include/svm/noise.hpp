#pragma once

// Counter-based Gaussian noise. Every variate is a pure function of
// (seed, trajectory index, stream, counter), so results do not depend on
// evaluation order or thread count.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace svm {

// Philox4x32-10 block cipher.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                                std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
  constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += w0;
    key[1] += w1;
  }
  return ctr;
}

enum class Stream : std::uint32_t { forward = 1, backward = 2, initial = 3 };

class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint64_t trajectory, Stream stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        traj_lo_(static_cast<std::uint32_t>(trajectory)),
        traj_hi_(static_cast<std::uint32_t>(trajectory >> 32) ^
                 (static_cast<std::uint32_t>(stream) << 24)) {}

  // Two independent uniforms in (0, 1] from block `counter`.
  std::array<double, 2> uniforms(std::uint64_t counter) const {
    const auto r = philox4x32({static_cast<std::uint32_t>(counter),
                               static_cast<std::uint32_t>(counter >> 32), traj_lo_, traj_hi_},
                              key_);
    return {to_unit(r[0], r[1]), to_unit(r[2], r[3])};
  }

  // Two independent standard normals from block `counter` (Box-Muller).
  std::array<double, 2> normals(std::uint64_t counter) const {
    const auto u = uniforms(counter);
    const double radius = std::sqrt(-2.0 * std::log(u[0]));
    const double angle = 2.0 * std::numbers::pi * u[1];
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  // The k-th standard normal of the stream.
  double normal(std::uint64_t k) const { return normals(k / 2)[k % 2]; }

 private:
  static double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint32_t traj_lo_;
  std::uint32_t traj_hi_;
};

}  // namespace svm
