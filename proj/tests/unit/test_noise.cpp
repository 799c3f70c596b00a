#include <doctest.h>

#include <cmath>
#include <vector>

#include "svm/noise.hpp"

using namespace svm;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using Block = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("Wiener increments: moments and independence") {
  constexpr std::size_t n = 1'000'000;
  const double dt = 0.01;
  const double sq = std::sqrt(dt);
  const NoiseStream fwd(42, 0, Stream::forward), bwd(42, 0, Stream::backward);
  const NoiseStream other(42, 1, Stream::forward);
  double sum = 0, sum2 = 0, cross_traj = 0, cross_dir = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dw = sq * fwd.normal(k);
    sum += dw;
    sum2 += dw * dw;
    cross_traj += fwd.normal(k) * other.normal(k);
    cross_dir += fwd.normal(k) * bwd.normal(k);
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 4.0 * std::sqrt(dt / n));
  CHECK(std::abs(var - dt) < 5.0 * dt / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(cross_traj / n) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(cross_dir / n) < 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("noise streams are pure functions of their key") {
  const NoiseStream a(7, 3, Stream::forward), b(7, 3, Stream::forward);
  const NoiseStream c(8, 3, Stream::forward), d(7, 3, Stream::initial);
  for (std::uint64_t k : {0ull, 1ull, 17ull, 123456789ull}) {
    CHECK(a.normal(k) == b.normal(k));
    CHECK(a.normal(k) != c.normal(k));
    CHECK(a.normal(k) != d.normal(k));
  }
  // Reading out of order gives the same values.
  std::vector<double> forward, reverse(100);
  for (std::uint64_t k = 0; k < 100; ++k) forward.push_back(a.normal(k));
  for (std::uint64_t k = 100; k-- > 0;) reverse[k] = a.normal(k);
  CHECK(forward == reverse);
  for (std::uint64_t k = 0; k < 1000; ++k) {
    const auto u = a.uniforms(k);
    CHECK(u[0] > 0.0);
    CHECK(u[0] <= 1.0);
  }
}
