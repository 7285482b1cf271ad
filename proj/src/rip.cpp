#include "cosa/rip.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "cosa/errors.hpp"
#include "cosa/numerics.hpp"
#include "cosa/rng.hpp"

namespace cosa {

namespace {

constexpr std::size_t kRatioRetainCap = 100000;

// Static chunking over [0, count); results land in caller-owned slots
// indexed by the loop variable, so the schedule cannot affect the output.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const unsigned workers = std::min<unsigned>(threads, static_cast<unsigned>(count));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = static_cast<std::size_t>(w) * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([begin, end, &fn] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// Cholesky solve of a symmetric positive-definite system, in place.
std::vector<double> solve_spd(Matrix g, std::vector<double> rhs) {
  const std::size_t k = g.rows();
  for (std::size_t j = 0; j < k; ++j) {
    double diag = g(j, j);
    for (std::size_t p = 0; p < j; ++p) diag -= g(j, p) * g(j, p);
    if (diag <= 0.0) {
      throw numerical_error("omp_recover: Gram matrix not positive definite");
    }
    g(j, j) = std::sqrt(diag);
    for (std::size_t i = j + 1; i < k; ++i) {
      double off = g(i, j);
      for (std::size_t p = 0; p < j; ++p) off -= g(i, p) * g(j, p);
      g(i, j) = off / g(j, j);
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t p = 0; p < i; ++p) rhs[i] -= g(i, p) * rhs[p];
    rhs[i] /= g(i, i);
  }
  for (std::size_t i = k; i-- > 0;) {
    for (std::size_t p = i + 1; p < k; ++p) rhs[i] -= g(p, i) * rhs[p];
    rhs[i] /= g(i, i);
  }
  return rhs;
}

}  // namespace

double isometry_ratio(const DictionaryView& view, const SparseVector& alpha) {
  if (alpha.dim != view.core_dim()) {
    throw shape_error("isometry_ratio: coefficient dim " + std::to_string(alpha.dim) +
                      " != a*b = " + std::to_string(view.core_dim()));
  }
  const double denom = alpha.squared_norm();
  if (denom == 0.0) {
    throw std::invalid_argument("isometry_ratio: zero coefficient vector");
  }
  const std::size_t s = alpha.sparsity();
  double num = 0.0;
  for (std::size_t k = 0; k < s; ++k) {
    const std::size_t ik = view.row_index(alpha.support[k]);
    const std::size_t jk = view.col_index(alpha.support[k]);
    for (std::size_t l = 0; l < s; ++l) {
      const std::size_t il = view.row_index(alpha.support[l]);
      const std::size_t jl = view.col_index(alpha.support[l]);
      num += alpha.values[k] * alpha.values[l] * view.gram_left(ik, il) *
             view.gram_right(jk, jl);
    }
  }
  num *= view.normalization * view.normalization;
  return num / denom;
}

RipEstimate estimate_rip(const DictionaryView& view, std::size_t s, std::size_t num_samples,
                         std::uint64_t base_seed, unsigned threads, bool keep_ratios) {
  if (num_samples < 100) {
    throw std::invalid_argument("estimate_rip: need at least 100 samples");
  }
  std::vector<double> ratios(num_samples);
  const std::size_t dim = view.core_dim();
  parallel_for(num_samples, threads, [&](std::size_t i) {
    const SparseVector alpha = sample_sparse_vector(derive_seed(base_seed, i), dim, s);
    ratios[i] = isometry_ratio(view, alpha);
  });
  std::vector<double> deviations(num_samples);
  for (std::size_t i = 0; i < num_samples; ++i) deviations[i] = std::fabs(ratios[i] - 1.0);

  RipEstimate est;
  est.s = s;
  est.num_samples = num_samples;
  est.base_seed = base_seed;
  est.delta = percentile(deviations, 0.95);
  if (keep_ratios) {
    ratios.resize(std::min(num_samples, kRatioRetainCap));
    est.ratios = std::move(ratios);
  }
  return est;
}

double theoretical_bound(const RipTheoryConfig& cfg, std::size_t s) {
  return cfg.c * std::sqrt(static_cast<double>(s) *
                           std::log(static_cast<double>(cfg.n_ambient)) /
                           static_cast<double>(cfg.m_eff));
}

double conservative_factor(const RipEstimate& empirical, double bound) {
  if (empirical.delta == 0.0) return std::numeric_limits<double>::infinity();
  return bound / empirical.delta;
}

RipStudyReport run_rip_study(const std::vector<std::pair<std::size_t, std::size_t>>& configs,
                             const std::vector<std::size_t>& sparsities,
                             std::size_t m, std::size_t n,
                             const std::vector<std::uint64_t>& matrix_seeds,
                             const RipStudyOptions& opts) {
  if (configs.empty() || sparsities.empty() || matrix_seeds.empty()) {
    throw std::invalid_argument("run_rip_study: configs, sparsities and seeds must be non-empty");
  }
  RipStudyReport report;
  report.m = m;
  report.n = n;
  report.num_samples = opts.num_samples;
  report.matrix_seeds = matrix_seeds;

  for (const auto& [a, b] : configs) {
    std::vector<DictionaryView> views;
    views.reserve(matrix_seeds.size());
    for (std::uint64_t seed : matrix_seeds) {
      views.push_back(make_dictionary_view(
          make_projection_pair(seed, m, n, a, b, opts.orthonormalize)));
    }
    double coherence_sum = 0.0;
    for (const auto& view : views) coherence_sum += coherence(view);
    const double coherence_mean = coherence_sum / static_cast<double>(views.size());

    RipTheoryConfig bound_cfg;
    bound_cfg.c = opts.bound_c;
    bound_cfg.m_eff = opts.bound_m_eff != 0 ? opts.bound_m_eff : m * n;
    bound_cfg.n_ambient = opts.bound_n_ambient != 0 ? opts.bound_n_ambient : a * b;

    for (std::size_t s : sparsities) {
      std::vector<double> deltas;
      deltas.reserve(views.size());
      for (std::size_t v = 0; v < views.size(); ++v) {
        // One sampling stream per (matrix seed, s) cell.
        const std::uint64_t base = derive_seed(matrix_seeds[v], s);
        deltas.push_back(
            estimate_rip(views[v], s, opts.num_samples, base, opts.threads).delta);
      }
      double mean = 0.0;
      for (double d : deltas) mean += d;
      mean /= static_cast<double>(deltas.size());
      double var = 0.0;
      for (double d : deltas) var += (d - mean) * (d - mean);
      var /= static_cast<double>(deltas.size());

      RipStudyRow row;
      row.a = a;
      row.b = b;
      row.s = s;
      row.delta_mean = mean;
      row.delta_std = std::sqrt(var);
      row.coherence_mean = coherence_mean;
      row.bound = theoretical_bound(bound_cfg, s);
      row.conservative_factor =
          mean > 0.0 ? row.bound / mean : std::numeric_limits<double>::infinity();
      report.rows.push_back(row);
    }
  }
  return report;
}

SparseVector omp_recover(const DictionaryView& view, const Matrix& target, std::size_t s) {
  if (s > view.core_dim()) {
    throw std::invalid_argument("omp_recover: s exceeds dictionary size");
  }
  SparseVector result;
  result.dim = view.core_dim();
  if (target.is_zero() || s == 0) return result;

  std::vector<std::size_t> picked;  // flat atom indices, selection order
  std::vector<double> coeffs;
  Matrix residual = target;

  for (std::size_t iter = 0; iter < s; ++iter) {
    const Matrix corr = correlation_map(view, residual);
    double best_score = 0.0;
    std::size_t best_flat = 0;
    bool found = false;
    for (std::size_t p = 0; p < view.core_dim(); ++p) {
      if (std::find(picked.begin(), picked.end(), p) != picked.end()) continue;
      const std::size_t i = view.row_index(p);
      const std::size_t j = view.col_index(p);
      const double score = std::fabs(corr(i, j)) / column_norm(view, i, j);
      if (!found || score > best_score) {
        best_score = score;
        best_flat = p;
        found = true;
      }
    }
    if (!found || best_score == 0.0) break;
    picked.push_back(best_flat);

    // Least squares on the selected atoms via the factor-product Gram system.
    const std::size_t k = picked.size();
    Matrix gram(k, k);
    std::vector<double> rhs(k);
    const Matrix target_corr = correlation_map(view, target);
    const double norm2 = view.normalization * view.normalization;
    for (std::size_t p = 0; p < k; ++p) {
      const std::size_t ip = view.row_index(picked[p]);
      const std::size_t jp = view.col_index(picked[p]);
      rhs[p] = target_corr(ip, jp);
      for (std::size_t q = 0; q < k; ++q) {
        const std::size_t iq = view.row_index(picked[q]);
        const std::size_t jq = view.col_index(picked[q]);
        gram(p, q) = norm2 * view.gram_left(ip, iq) * view.gram_right(jp, jq);
      }
    }
    if (k > 1 && condition_number(gram) > 1e12) {
      throw numerical_error("omp_recover: selected atoms are too coherent (Gram condition > 1e12)");
    }
    coeffs = solve_spd(gram, rhs);

    SparseVector current;
    current.dim = view.core_dim();
    current.support = picked;
    current.values = coeffs;
    residual = subtract(target, apply_dictionary(view, current));
  }

  // Re-sort the support ascending, keeping values aligned.
  std::vector<std::size_t> order(picked.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return picked[x] < picked[y]; });
  for (std::size_t i = 0; i < order.size(); ++i) {
    result.support.push_back(picked[order[i]]);
    result.values.push_back(coeffs[order[i]]);
  }
  return result;
}

}  // namespace cosa
