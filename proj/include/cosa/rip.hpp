#ifndef COSA_RIP_HPP
#define COSA_RIP_HPP

#include <cstdint>
#include <vector>

#include "cosa/projection.hpp"
#include "cosa/sparse.hpp"

namespace cosa {

/// Monte-Carlo isometry statistics for one (dictionary, s) pair.
struct RipEstimate {
  std::size_t s = 0;
  std::size_t num_samples = 0;
  double delta = 0.0;         // percentile_95 of |r_i - 1|
  std::uint64_t base_seed = 0;
  std::vector<double> ratios;  // retained only when requested, capped
};

/// Parameters of the delta_s <= C * sqrt(s * ln(n) / m_eff) bound. The paper
/// never pins m_eff and n_ambient for the Kronecker case, so both are
/// caller-configurable; defaults follow the dictionary shape (m_eff = m*n,
/// n_ambient = a*b).
struct RipTheoryConfig {
  double c = 1.0;
  std::size_t m_eff = 1;
  std::size_t n_ambient = 2;
  double eta = 0.01;  // failure-probability bookkeeping, reported only
};

struct RipStudyRow {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t s = 0;
  double delta_mean = 0.0;
  double delta_std = 0.0;  // population std across matrix seeds
  double coherence_mean = 0.0;
  double bound = 0.0;
  double conservative_factor = 0.0;
};

struct RipStudyReport {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t num_samples = 0;
  std::vector<std::uint64_t> matrix_seeds;
  std::vector<RipStudyRow> rows;
};

/// |Psi alpha|^2 / |alpha|^2, evaluated in O(s^2) through the cached Gram
/// factors: |L Y R|_F^2 = sum_{k,l} v_k v_l (L^T L)(i_k,i_l) (R R^T)(j_k,j_l).
double isometry_ratio(const DictionaryView& view, const SparseVector& alpha);

/// Sample i draws its sparse vector from derive_seed(base_seed, i), so the
/// result is identical for any thread count.
RipEstimate estimate_rip(const DictionaryView& view, std::size_t s, std::size_t num_samples,
                         std::uint64_t base_seed, unsigned threads = 1,
                         bool keep_ratios = false);

double theoretical_bound(const RipTheoryConfig& cfg, std::size_t s);

/// bound / delta; +infinity when delta underflows to zero.
double conservative_factor(const RipEstimate& empirical, double bound);

struct RipStudyOptions {
  std::size_t num_samples = 1000;
  unsigned threads = 1;
  bool orthonormalize = false;  // exact-isometry fixture pairs
  double bound_c = 1.0;
  // 0 means "derive from the dictionary shape" (m*n and a*b respectively).
  std::size_t bound_m_eff = 0;
  std::size_t bound_n_ambient = 0;
};

RipStudyReport run_rip_study(const std::vector<std::pair<std::size_t, std::size_t>>& configs,
                             const std::vector<std::size_t>& sparsities,
                             std::size_t m, std::size_t n,
                             const std::vector<std::uint64_t>& matrix_seeds,
                             const RipStudyOptions& opts = {});

/// Greedy orthogonal matching pursuit against the implicit dictionary.
/// Returns coefficients on the selected support; an all-zero target yields
/// an empty support.
SparseVector omp_recover(const DictionaryView& view, const Matrix& target, std::size_t s);

}  // namespace cosa

#endif
