#include "cosa/projection.hpp"

#include <cmath>
#include <string>

#include "cosa/errors.hpp"
#include "cosa/rng.hpp"

namespace cosa {

namespace {

// Modified Gram-Schmidt with one reorthogonalization pass over the columns.
void orthonormalize_columns(Matrix& m) {
  const std::size_t cols = m.cols();
  for (std::size_t j = 0; j < cols; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        double dot = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) dot += m(i, k) * m(i, j);
        for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) -= dot * m(i, k);
      }
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) norm += m(i, j) * m(i, j);
    norm = std::sqrt(norm);
    if (norm == 0.0) {
      throw numerical_error("orthonormalize: degenerate column");
    }
    for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) /= norm;
  }
}

}  // namespace

ProjectionPair make_projection_pair(std::uint64_t seed, std::size_t m, std::size_t n,
                                    std::size_t a, std::size_t b,
                                    bool orthonormalize) {
  if (a < 1 || b < 1 || a > m || b > n) {
    throw std::invalid_argument("make_projection_pair: need 1 <= a <= m and 1 <= b <= n, got a=" +
                                std::to_string(a) + " m=" + std::to_string(m) +
                                " b=" + std::to_string(b) + " n=" + std::to_string(n));
  }
  ProjectionPair pair;
  pair.m = m;
  pair.n = n;
  pair.a = a;
  pair.b = b;
  pair.seed = seed;
  pair.left = gaussian_matrix(derive_seed(seed, 0), m, a);
  pair.right = gaussian_matrix(derive_seed(seed, 1), b, n);
  pair.orthonormalized = orthonormalize;
  if (orthonormalize) {
    orthonormalize_columns(pair.left);
    Matrix rt = transpose(pair.right);
    orthonormalize_columns(rt);
    pair.right = transpose(rt);
  }
  return pair;
}

DictionaryView make_dictionary_view(ProjectionPair pair) {
  DictionaryView view;
  // Raw Gaussian columns have norm ~ sqrt(mn), so 1/sqrt(mn) brings them near
  // unit length. Orthonormalized pairs already have exactly unit columns
  // (|col(L)| = |row(R)| = 1), so they are left unscaled and the dictionary
  // is an exact isometry.
  view.normalization =
      pair.orthonormalized
          ? 1.0
          : 1.0 / std::sqrt(static_cast<double>(pair.m) * static_cast<double>(pair.n));
  view.gram_left = matmul(transpose(pair.left), pair.left);
  view.gram_right = matmul(pair.right, transpose(pair.right));
  view.left_col_norms.resize(pair.a);
  for (std::size_t i = 0; i < pair.a; ++i) {
    view.left_col_norms[i] = std::sqrt(view.gram_left(i, i));
  }
  view.right_row_norms.resize(pair.b);
  for (std::size_t j = 0; j < pair.b; ++j) {
    view.right_row_norms[j] = std::sqrt(view.gram_right(j, j));
  }
  view.pair = std::move(pair);
  return view;
}

Matrix apply_dictionary(const DictionaryView& view, const SparseVector& alpha) {
  if (alpha.dim != view.core_dim()) {
    throw shape_error("apply_dictionary: coefficient dim " + std::to_string(alpha.dim) +
                      " != a*b = " + std::to_string(view.core_dim()));
  }
  const auto& pair = view.pair;
  // Support-restricted L*Y: each nonzero (i, j, v) adds v * col_i(L) to
  // column j of the intermediate m x b block.
  Matrix lv(pair.m, pair.b);
  for (std::size_t k = 0; k < alpha.support.size(); ++k) {
    const std::size_t i = view.row_index(alpha.support[k]);
    const std::size_t j = view.col_index(alpha.support[k]);
    const double v = alpha.values[k];
    for (std::size_t row = 0; row < pair.m; ++row) {
      lv(row, j) += v * pair.left(row, i);
    }
  }
  return scale(matmul(lv, pair.right), view.normalization);
}

Matrix apply_dictionary(const DictionaryView& view, std::span<const double> alpha) {
  if (alpha.size() != view.core_dim()) {
    throw shape_error("apply_dictionary: coefficient dim " + std::to_string(alpha.size()) +
                      " != a*b = " + std::to_string(view.core_dim()));
  }
  const auto& pair = view.pair;
  Matrix core(pair.a, pair.b);
  for (std::size_t p = 0; p < alpha.size(); ++p) {
    core(view.row_index(p), view.col_index(p)) = alpha[p];
  }
  return scale(matmul(matmul(pair.left, core), pair.right), view.normalization);
}

double coherence(const DictionaryView& view) {
  if (view.core_dim() < 2) {
    throw std::invalid_argument("coherence: needs at least two dictionary columns");
  }
  double best = 0.0;
  const auto& gl = view.gram_left;
  for (std::size_t i = 0; i + 1 < view.pair.a; ++i) {
    for (std::size_t k = i + 1; k < view.pair.a; ++k) {
      const double cosine = std::fabs(gl(i, k)) /
                            (view.left_col_norms[i] * view.left_col_norms[k]);
      best = std::max(best, cosine);
    }
  }
  const auto& gr = view.gram_right;
  for (std::size_t j = 0; j + 1 < view.pair.b; ++j) {
    for (std::size_t l = j + 1; l < view.pair.b; ++l) {
      const double cosine = std::fabs(gr(j, l)) /
                            (view.right_row_norms[j] * view.right_row_norms[l]);
      best = std::max(best, cosine);
    }
  }
  return best;
}

Matrix correlation_map(const DictionaryView& view, const Matrix& e) {
  if (e.rows() != view.pair.m || e.cols() != view.pair.n) {
    throw shape_error("correlation_map: expected " + std::to_string(view.pair.m) + "x" +
                      std::to_string(view.pair.n) + ", got " + std::to_string(e.rows()) +
                      "x" + std::to_string(e.cols()));
  }
  return scale(matmul(matmul(transpose(view.pair.left), e), transpose(view.pair.right)),
               view.normalization);
}

double column_norm(const DictionaryView& view, std::size_t i, std::size_t j) {
  return view.normalization * view.left_col_norms[i] * view.right_row_norms[j];
}

}  // namespace cosa
