#ifndef COSA_SPARSE_HPP
#define COSA_SPARSE_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cosa {

/// s-sparse coefficient vector over a dim-sized space. Support indices are
/// sorted and distinct; values align with support positionally.
struct SparseVector {
  std::size_t dim = 0;
  std::vector<std::size_t> support;
  std::vector<double> values;

  std::size_t sparsity() const { return support.size(); }
  double squared_norm() const {
    double acc = 0.0;
    for (double v : values) acc += v * v;
    return acc;
  }
};

/// Support drawn uniformly without replacement (partial Fisher-Yates),
/// values i.i.d. N(0,1), everything from the stream seeded with `seed`.
SparseVector sample_sparse_vector(std::uint64_t seed, std::size_t dim, std::size_t s);

}  // namespace cosa

#endif
