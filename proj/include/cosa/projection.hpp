#ifndef COSA_PROJECTION_HPP
#define COSA_PROJECTION_HPP

#include <cstdint>

#include "cosa/matrix.hpp"
#include "cosa/sparse.hpp"

namespace cosa {

/// Frozen projection pair. L is m x a, R is b x n; both regenerate exactly
/// from the stored seed (L from derive_seed(seed, 0), R from
/// derive_seed(seed, 1)) unless orthonormalized.
struct ProjectionPair {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t a = 0;
  std::size_t b = 0;
  std::uint64_t seed = 0;
  Matrix left;   // L, m x a
  Matrix right;  // R, b x n
  bool orthonormalized = false;
};

ProjectionPair make_projection_pair(std::uint64_t seed, std::size_t m, std::size_t n,
                                    std::size_t a, std::size_t b,
                                    bool orthonormalize = false);

/// The pair viewed as the implicit Kronecker dictionary, never materialized.
/// Column (j, i) of the dictionary is normalization * (row_j(R) (x) col_i(L))
/// under column-major vectorization; flat coefficient index p maps to
/// (i, j) = (p mod a, p div a).
///
/// Precomputed Gram factors let isometry ratios and atom inner products be
/// evaluated in O(s^2) via <u (x) v, u' (x) v'> = <u, u'> <v, v'>.
struct DictionaryView {
  ProjectionPair pair;
  double normalization = 0.0;           // 1/sqrt(m*n), or 1 when orthonormalized
  Matrix gram_left;                     // L^T L, a x a
  Matrix gram_right;                    // R R^T, b x b
  std::vector<double> left_col_norms;   // a entries
  std::vector<double> right_row_norms;  // b entries

  std::size_t core_dim() const { return pair.a * pair.b; }
  std::size_t row_index(std::size_t flat) const { return flat % pair.a; }
  std::size_t col_index(std::size_t flat) const { return flat / pair.a; }
};

DictionaryView make_dictionary_view(ProjectionPair pair);

/// Synthesize the m x n signal (L * Y * R) / sqrt(mn) with Y the a x b
/// column-major reshape of the coefficients.
Matrix apply_dictionary(const DictionaryView& view, const SparseVector& alpha);
Matrix apply_dictionary(const DictionaryView& view, std::span<const double> alpha);

/// Mutual coherence of the implicit dictionary, exact via the factorization
/// mu = max(mu_L over column pairs of L, mu_R over row pairs of R).
double coherence(const DictionaryView& view);

/// Raw atom correlations (L^T E R^T) / sqrt(mn); entry (i, j) is the inner
/// product of column (j, i) with vec(E), before column-norm division.
Matrix correlation_map(const DictionaryView& view, const Matrix& e);

/// Unnormalized norm of dictionary column (j, i):
/// normalization * |col_i(L)| * |row_j(R)|.
double column_norm(const DictionaryView& view, std::size_t i, std::size_t j);

}  // namespace cosa

#endif
