#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mather/lifted.hpp"

namespace mather {

/// Hull function sampled on the grid theta_k = k / N, k = 0..N-1, extended to
/// all integers by the lift rule h_{k+N} = h_k + 1.
///
/// Entries are stored as Lifted values so that integer translates and cyclic
/// rotations are exact. The monotone flag is computed on construction and
/// reports membership in the cone of non-decreasing hulls.
class HullFunction {
 public:
  HullFunction() = default;
  explicit HullFunction(std::vector<Lifted> entries);

  static HullFunction from_values(std::span<const double> values);
  static HullFunction identity(std::size_t N);

  std::size_t size() const { return entries_.size(); }
  bool monotone() const { return monotone_; }

  /// h(k / N) for 0 <= k < N.
  double operator[](std::size_t k) const { return entries_[k].value(); }
  const Lifted& entry(std::size_t k) const { return entries_[k]; }
  std::span<const Lifted> entries() const { return entries_; }

  /// h(k / N) for any integer k, with lift carries.
  Lifted lifted(std::int64_t k) const;
  double at(std::int64_t k) const { return lifted(k).value(); }

  std::vector<double> values() const;

  /// h + n, exact.
  HullFunction plus_integer(std::int64_t n) const;
  /// h o T_{p/N}, i.e. k -> h_{k+p}, exact.
  HullFunction rotated(std::int64_t p) const;
  /// Adds scale * delta[k] to the remainder of every entry, keeping integer parts.
  HullFunction displaced(std::span<const double> delta, double scale = 1.0) const;

  /// h_k - g_k computed with integer parts cancelled first.
  static std::vector<double> difference(const HullFunction& h, const HullFunction& g);

 private:
  std::vector<Lifted> entries_;
  bool monotone_ = true;
};

struct Gap {
  std::size_t index = 0;  // gap between grid points index and index + 1
  double size = 0.0;
};

struct GapReport {
  std::vector<Gap> gaps;  // sizes above threshold, descending
  double largest_gap = 0.0;
  double total_variation_in_jumps = 0.0;
};

/// Left-continuous piecewise-constant evaluation: returns h at grid index
/// ceil(theta * N). Arguments within 1e-9 (relative) of a grid point snap to it.
Lifted eval_lifted(const HullFunction& h, double theta);
double eval(const HullFunction& h, double theta);

/// Grid index that eval uses for theta.
std::int64_t grid_index(std::size_t N, double theta);

HullFunction meet(const HullFunction& h, const HullFunction& g);
HullFunction join(const HullFunction& h, const HullFunction& g);

/// Hausdorff distance of the closed graphs over one period. Each graph is the
/// polyline through the grid points (vertical segments at jumps), densified
/// to arc-length spacing 1/(4N); the distance is between those point sets.
double graph_distance(const HullFunction& h, const HullFunction& g);

/// k -> min_{j >= k} h_j; the largest monotone hull below h.
HullFunction monotone_envelope(const HullFunction& h);

/// Least-squares projection onto the monotone cone with the wrap constraint
/// h_{N-1} <= h_0 + 1, by pool-adjacent-violators on an unrolled period.
HullFunction project_monotone(const HullFunction& h);

/// h o T_{p/N} for the largest p with h_p <= 0: afterwards h_0 <= 0 < h_1.
HullFunction normalize(const HullFunction& h);
/// The p used by normalize.
std::int64_t normalization_shift(const HullFunction& h);

/// Consecutive differences above threshold, including the wrap difference
/// h_0 + 1 - h_{N-1} (reported with index N-1). largest_gap is the maximum
/// difference regardless of threshold.
GapReport detect_gaps(const HullFunction& h, double threshold);

/// Sup-norm distance between grid values.
double sup_distance(const HullFunction& h, const HullFunction& g);

/// Random strictly increasing hull: i.i.d. exponential increments rescaled to
/// one period, plus a uniform offset in [-0.5, 0.5).
HullFunction random_monotone(std::size_t N, std::mt19937_64& rng);

}  // namespace mather
