#include "cosa/sparse.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "cosa/rng.hpp"

namespace cosa {

SparseVector sample_sparse_vector(std::uint64_t seed, std::size_t dim, std::size_t s) {
  if (s == 0 || s > dim) {
    throw std::invalid_argument("sample_sparse_vector: need 1 <= s <= dim");
  }
  RngStream stream(seed);

  // Partial Fisher-Yates: the first s slots end up a uniform subset.
  std::vector<std::size_t> indices(dim);
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  for (std::size_t k = 0; k < s; ++k) {
    const std::size_t pick = k + static_cast<std::size_t>(stream.next_u64() % (dim - k));
    std::swap(indices[k], indices[pick]);
  }
  SparseVector out;
  out.dim = dim;
  out.support.assign(indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(s));
  std::sort(out.support.begin(), out.support.end());

  out.values.resize(s);
  std::size_t k = 0;
  while (k + 1 < s) {
    const auto [z1, z2] = stream.next_gaussian_pair();
    out.values[k++] = z1;
    out.values[k++] = z2;
  }
  if (k < s) out.values[k] = stream.next_gaussian_pair().first;
  return out;
}

}  // namespace cosa
