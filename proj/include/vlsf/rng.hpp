#pragma once

// Counter-based random numbers (Philox4x32-10). Every variate is a pure
// function of (seed, stream, trial, index), so trials can run on any worker
// in any order and still see identical draws.

#include <array>
#include <cstdint>

namespace vlsf {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

enum class Stream : std::uint32_t {
  channel = 1,     // transmitted symbol and noise
  competitor = 2,  // competing-minimum recursion
  codebook = 3,    // explicit codebook in validation runs
  guess = 4,       // tie-breaking guesses
};

class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  /// Two uniforms on the open interval (0, 1).
  std::array<double, 2> uniforms(Stream stream, std::uint64_t trial, std::uint64_t index) const;
  /// Two independent standard normals (Box-Muller on the pair above).
  std::array<double, 2> normals(Stream stream, std::uint64_t trial, std::uint64_t index) const;

private:
  std::uint64_t seed_;
  PhiloxKey key_;
};

}  // namespace vlsf
