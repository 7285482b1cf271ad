#ifndef COSA_RNG_HPP
#define COSA_RNG_HPP

#include <array>
#include <cstdint>
#include <utility>

#include "cosa/matrix.hpp"

namespace cosa {

/// One SplitMix64 step from an explicit state word. The state is advanced
/// by the golden-ratio increment and the mixed value returned.
std::uint64_t splitmix64_next(std::uint64_t& state);

/// Stateless fan-out: the SplitMix64 output at offset `index` from `base`.
/// derive_seed(s, 0), derive_seed(s, 1), ... reproduce the SplitMix64
/// stream seeded with s, so published test vectors apply directly.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// xoshiro256++ with the published rotation/shift constants, seeded from
/// four successive SplitMix64 outputs. Single-owner mutable state; use
/// derive_seed fan-out for parallelism instead of sharing a stream.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t origin_seed() const { return origin_seed_; }

  std::uint64_t next_u64();

  /// Uniform in [0, 1), 53-bit resolution.
  double next_unit();

  /// Uniform in (0, 1]; safe as the log argument in Box-Muller.
  double next_unit_positive();

  /// Box-Muller pair of independent standard normals.
  std::pair<double, double> next_gaussian_pair();

private:
  std::array<std::uint64_t, 4> state_;
  std::uint64_t origin_seed_;
};

/// Matrix of i.i.d. N(0,1) entries, filled row-major from the stream seeded
/// with `seed`. Same seed gives bit-identical output on every platform, and
/// the first k entries do not depend on the requested shape.
Matrix gaussian_matrix(std::uint64_t seed, std::size_t rows, std::size_t cols);

}  // namespace cosa

#endif
