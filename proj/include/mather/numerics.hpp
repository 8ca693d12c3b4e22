#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mather {

/// Pairwise (cascade) summation in index order.
double pairwise_sum(std::span<const double> terms);

/// Sum that depends only on the multiset of terms: sorts, then sums pairwise.
/// Used for every reduction over grid indices so cyclic relabelling of the
/// grid cannot change a result by even one ulp.
double invariant_sum(std::vector<double> terms);

/// Floor division for possibly negative numerators.
inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline std::int64_t floor_mod(std::int64_t a, std::int64_t b) { return a - floor_div(a, b) * b; }

}  // namespace mather
