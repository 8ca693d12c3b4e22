#include "mather/numerics.hpp"

#include <algorithm>

namespace mather {

double pairwise_sum(std::span<const double> terms) {
  constexpr std::size_t kBlock = 16;
  if (terms.size() <= kBlock) {
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
  }
  const std::size_t half = terms.size() / 2;
  return pairwise_sum(terms.first(half)) + pairwise_sum(terms.subspan(half));
}

double invariant_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  return pairwise_sum(terms);
}

}  // namespace mather
