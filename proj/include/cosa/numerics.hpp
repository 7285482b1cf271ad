#ifndef COSA_NUMERICS_HPP
#define COSA_NUMERICS_HPP

#include <optional>
#include <span>
#include <vector>

#include "cosa/matrix.hpp"

namespace cosa {

struct SvdResult {
  std::vector<double> singular_values;  // sorted descending, all >= 0
  std::optional<Matrix> left;           // rows x k
  std::optional<Matrix> right;          // cols x k
};

/// Linear-interpolation percentile at rank q*(N-1) ("type 7").
double percentile(std::span<const double> values, double q);

/// One-sided Jacobi SVD. Rotates column pairs until every off-diagonal
/// Gram entry is below 1e-12 relative; throws numerical_error if that
/// has not happened after 60 sweeps. Desk-scale guard: sides <= 4096.
SvdResult jacobi_svd(const Matrix& a, bool want_factors = false);

/// sigma_max / sigma_min. Returns +infinity when sigma_min < 1e-14 * sigma_max.
double condition_number(const Matrix& a);

}  // namespace cosa

#endif
