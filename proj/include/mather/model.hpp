#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mather {

using TwoSiteFn = std::function<double(double, double)>;

/// One two-site energy H(u, v) with its first and second partials.
struct InteractionTerm {
  std::string label;
  TwoSiteFn energy;
  TwoSiteFn d1;
  TwoSiteFn d2;
  TwoSiteFn d11;
  TwoSiteFn d12;
  TwoSiteFn d22;
};

/// Family of interaction terms, one per lattice direction.
struct Model {
  std::string name;
  std::vector<InteractionTerm> terms;

  std::size_t dim() const { return terms.size(); }
};

struct ValidationReport {
  double h1_defect = 0.0;             // max |H(u+1,v+1) - H(u,v)|
  double twist_bound = 0.0;           // max of d12 over samples, must be < 0
  double lower_bound_estimate = 0.0;  // min sampled energy
  double lipschitz_M = 1.0;           // max(1, sup |d1|, |d2|) over the band
  double curvature_bound = 0.0;       // sum over terms of sup(|d11| + |d22| + 2|d12|)
};

/// Samples every term on u in [0,1), v in [u-2, u+2] and checks periodicity
/// and twist. Throws Errc::twist_violation / Errc::periodicity_violation.
ValidationReport validate_model(const Model& model, int samples_per_axis = 64);

/// Like validate_model but never throws; the caller inspects the report.
ValidationReport sample_model(const Model& model, int samples_per_axis = 64);

/// Standard Frenkel-Kontorova chain,
///   H(u, v) = (v-u)^2 / 2 + K / (4 pi^2) (1 - cos 2 pi u),
/// replicated over `dim` directions with the on-site part split evenly.
Model standard_fk(double K, int dim = 1);

/// Frequency vector (or cocycle values, one per term) and its rational grid
/// approximants m_j / N.
struct ShiftSet {
  std::vector<double> omega;
  std::int64_t grid_size = 0;
  std::vector<std::int64_t> approximants;
  double approx_error = 0.0;
  bool degenerate_subperiod = false;  // d=1 only: gcd(m, N) > 1

  std::size_t dim() const { return omega.size(); }
  /// m_j / N, the frequency the grid problem actually realizes.
  std::vector<double> grid_omega() const;
};

/// Rounds each omega_j * N to the nearest integer. Throws
/// Errc::degenerate_shift when some m_j is a multiple of N (the shift would be
/// a whole period), and Errc::invalid_argument when N < 2 or omega is empty.
ShiftSet make_shiftset(std::vector<double> omega, std::int64_t N);

}  // namespace mather
