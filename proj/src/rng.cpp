#include "vlsf/rng.hpp"

#include <cmath>
#include <numbers>

namespace vlsf {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

// 53 random bits mapped to the centre of their bin: never exactly 0 or 1.
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

CounterRng::CounterRng(std::uint64_t seed)
    : seed_(seed),
      key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

std::array<double, 2> CounterRng::uniforms(Stream stream, std::uint64_t trial,
                                           std::uint64_t index) const {
  const PhiloxCounter ctr{
      static_cast<std::uint32_t>(index),
      static_cast<std::uint32_t>(index >> 32),
      static_cast<std::uint32_t>(trial),
      (static_cast<std::uint32_t>(stream) << 24) |
          (static_cast<std::uint32_t>(trial >> 32) & 0x00FFFFFFu),
  };
  const PhiloxCounter out = philox4x32_10(ctr, key_);
  return {to_open_unit(out[0], out[1]), to_open_unit(out[2], out[3])};
}

std::array<double, 2> CounterRng::normals(Stream stream, std::uint64_t trial,
                                          std::uint64_t index) const {
  const auto [u1, u2] = uniforms(stream, trial, index);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace vlsf
