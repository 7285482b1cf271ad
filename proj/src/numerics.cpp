#include "cosa/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cosa/errors.hpp"

namespace cosa {

double percentile(std::span<const double> values, double q) {
  if (values.empty()) {
    throw std::invalid_argument("percentile: empty input");
  }
  if (q < 0.0 || q > 1.0) {
    throw std::invalid_argument("percentile: q must lie in [0, 1]");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double rank = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(rank);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

namespace {

constexpr std::size_t kMaxSide = 4096;
constexpr int kMaxSweeps = 60;
constexpr double kOffDiagTol = 1e-12;

struct ColumnPairStats {
  double app;
  double aqq;
  double apq;
};

ColumnPairStats gram_entries(const Matrix& b, std::size_t p, std::size_t q) {
  ColumnPairStats st{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < b.rows(); ++i) {
    const double x = b(i, p);
    const double y = b(i, q);
    st.app += x * x;
    st.aqq += y * y;
    st.apq += x * y;
  }
  return st;
}

void rotate_columns(Matrix& m, std::size_t p, std::size_t q, double c, double s) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double x = m(i, p);
    const double y = m(i, q);
    m(i, p) = c * x - s * y;
    m(i, q) = s * x + c * y;
  }
}

}  // namespace

SvdResult jacobi_svd(const Matrix& a, bool want_factors) {
  if (a.rows() > kMaxSide || a.cols() > kMaxSide) {
    throw std::invalid_argument("jacobi_svd: matrix exceeds 4096 per side");
  }
  const bool transposed = a.rows() < a.cols();
  Matrix b = transposed ? transpose(a) : a;
  const std::size_t k = b.cols();
  Matrix v = Matrix::identity(k);

  double residual = 0.0;
  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    converged = true;
    residual = 0.0;
    for (std::size_t p = 0; p + 1 < k; ++p) {
      for (std::size_t q = p + 1; q < k; ++q) {
        const auto st = gram_entries(b, p, q);
        const double denom = std::sqrt(st.app * st.aqq);
        if (denom == 0.0 || std::fabs(st.apq) <= kOffDiagTol * denom) continue;
        residual = std::max(residual, std::fabs(st.apq) / denom);
        converged = false;
        const double tau = (st.aqq - st.app) / (2.0 * st.apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        rotate_columns(b, p, q, c, s);
        rotate_columns(v, p, q, c, s);
      }
    }
  }
  if (!converged) {
    throw numerical_error("jacobi_svd: no convergence after 60 sweeps, residual " +
                          std::to_string(residual));
  }

  std::vector<double> sigma(k);
  for (std::size_t j = 0; j < k; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < b.rows(); ++i) acc += b(i, j) * b(i, j);
    sigma[j] = std::sqrt(acc);
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  SvdResult out;
  out.singular_values.resize(k);
  for (std::size_t j = 0; j < k; ++j) out.singular_values[j] = sigma[order[j]];

  if (want_factors) {
    Matrix u(b.rows(), k);
    Matrix vr(k, k);
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t src = order[j];
      const double inv = sigma[src] > 0.0 ? 1.0 / sigma[src] : 0.0;
      for (std::size_t i = 0; i < b.rows(); ++i) u(i, j) = b(i, src) * inv;
      for (std::size_t i = 0; i < k; ++i) vr(i, j) = v(i, src);
    }
    if (transposed) {
      out.left = std::move(vr);
      out.right = std::move(u);
    } else {
      out.left = std::move(u);
      out.right = std::move(vr);
    }
  }
  return out;
}

double condition_number(const Matrix& a) {
  if (a.is_zero()) {
    throw std::invalid_argument("condition_number: zero matrix");
  }
  const auto svd = jacobi_svd(a);
  const double smax = svd.singular_values.front();
  const double smin = svd.singular_values.back();
  if (smin < 1e-14 * smax) {
    return std::numeric_limits<double>::infinity();
  }
  return smax / smin;
}

}  // namespace cosa
