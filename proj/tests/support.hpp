#pragma once

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mather/errors.hpp"
#include "mather/hull.hpp"

namespace test {

inline constexpr double kGolden = 0.6180339887498949;

template <class F>
mather::Errc error_code_of(F&& f) {
  try {
    f();
  } catch (const mather::Error& e) {
    return e.code();
  }
  FAIL("expected mather::Error");
  return mather::Errc::invalid_argument;
}

inline mather::HullFunction shifted_identity(std::size_t N, double c) {
  std::vector<double> v(N);
  for (std::size_t k = 0; k < N; ++k) v[k] = static_cast<double>(k) / static_cast<double>(N) + c;
  return mather::HullFunction::from_values(v);
}

/// Arbitrary grid values, not necessarily monotone.
inline mather::HullFunction random_hull(std::size_t N, std::mt19937_64& rng, double spread = 1.0) {
  std::uniform_real_distribution<double> u(-spread, spread);
  std::vector<double> v(N);
  for (double& x : v) x = u(rng);
  return mather::HullFunction::from_values(v);
}

inline bool ordered(const mather::HullFunction& lo, const mather::HullFunction& hi, double slack) {
  for (double d : mather::HullFunction::difference(hi, lo))
    if (d < -slack) return false;
  return true;
}

inline bool bit_equal(const mather::HullFunction& a, const mather::HullFunction& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (!(a.entry(k) == b.entry(k))) return false;
  return true;
}

}  // namespace test
