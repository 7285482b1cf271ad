#include "cosa/rng.hpp"

#include <cmath>
#include <numbers>

namespace cosa {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += kGolden);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t state = base + index * kGolden;
  return splitmix64_next(state);
}

RngStream::RngStream(std::uint64_t seed) : origin_seed_(seed) {
  std::uint64_t sm = seed;
  for (auto& word : state_) word = splitmix64_next(sm);
  // SplitMix64 never yields four zero words in a row, so the xoshiro
  // all-zero fixed point is unreachable; guard anyway.
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = kGolden;
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_unit_positive() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

std::pair<double, double> RngStream::next_gaussian_pair() {
  const double u1 = next_unit_positive();
  const double u2 = next_unit();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

Matrix gaussian_matrix(std::uint64_t seed, std::size_t rows, std::size_t cols) {
  Matrix out(rows, cols);
  RngStream stream(seed);
  auto data = out.data();
  std::size_t i = 0;
  while (i + 1 < data.size()) {
    const auto [z1, z2] = stream.next_gaussian_pair();
    data[i++] = z1;
    data[i++] = z2;
  }
  if (i < data.size()) {
    data[i] = stream.next_gaussian_pair().first;
  }
  return out;
}

}  // namespace cosa
