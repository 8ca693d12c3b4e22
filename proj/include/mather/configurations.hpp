#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mather/hull.hpp"
#include "mather/lifted.hpp"
#include "mather/model.hpp"

namespace mather {

using Site = std::vector<std::int64_t>;

/// Values u_i on the box |i|_inf <= radius in Z^dim.
class ConfigurationWindow {
 public:
  ConfigurationWindow() = default;
  /// Values in flat order (see index()). Throws Errc::invalid_argument on a
  /// size mismatch or a non-finite entry.
  ConfigurationWindow(std::size_t dim, std::int64_t radius, std::vector<Lifted> values,
                      std::optional<std::vector<double>> omega_hint = std::nullopt);

  /// u_i = f(i) on the box.
  template <class F>
  static ConfigurationWindow generate(std::size_t dim, std::int64_t radius, F&& f) {
    const std::size_t count = box_size(dim, radius);
    std::vector<Lifted> v(count);
    Site i;
    for (std::size_t n = 0; n < count; ++n) {
      i = site_of(dim, radius, n);
      v[n] = Lifted::from_double(f(std::as_const(i)));
    }
    return ConfigurationWindow(dim, radius, std::move(v));
  }

  std::size_t dim() const { return dim_; }
  std::int64_t radius() const { return radius_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<Lifted>& values() const { return values_; }
  const std::optional<std::vector<double>>& omega_hint() const { return omega_hint_; }

  bool contains(std::span<const std::int64_t> i) const;
  /// Flat index: first coordinate varies fastest.
  std::size_t index(std::span<const std::int64_t> i) const;
  Site site(std::size_t flat) const { return site_of(dim_, radius_, flat); }

  const Lifted& lifted(std::span<const std::int64_t> i) const { return values_[index(i)]; }
  double at(std::span<const std::int64_t> i) const { return lifted(i).value(); }

  static std::size_t box_size(std::size_t dim, std::int64_t radius);
  static Site site_of(std::size_t dim, std::int64_t radius, std::size_t flat);

 private:
  std::size_t dim_ = 0;
  std::int64_t radius_ = 0;
  std::vector<Lifted> values_;
  std::optional<std::vector<double>> omega_hint_;
};

enum class CertificateKind { birkhoff, omega_birkhoff, ground_state, discrete_el };

const char* to_string(CertificateKind k) noexcept;

/// A violating (k, l, i) triple, or a perturbation descriptor for
/// ground-state tests (kind "random_trial" / "coordinate_descent").
struct Witness {
  std::string kind;
  Site k;
  std::int64_t l = 0;
  Site site;
  std::int64_t trial = -1;
  double value = 0.0;
};

struct CertificateReport {
  CertificateKind kind = CertificateKind::birkhoff;
  bool passed = true;                // witnesses.empty()
  std::vector<Witness> witnesses;    // at most kMaxWitnesses are kept
  double margin = 0.0;
  std::string scope;                 // the finite ranges that were checked

  static constexpr std::size_t kMaxWitnesses = 100;
};

/// u_i = h(phase + omega . i) on the box.
ConfigurationWindow sample_configuration(const HullFunction& h, std::span<const double> omega,
                                         std::int64_t radius, double phase);

struct RotationEstimate {
  std::vector<double> omega_hat;
  double max_deviation = 0.0;  // max |u_j - u_i - omega_hat . (j - i)| over site pairs
};

/// Throws Errc::window_too_small if radius < 4.
RotationEstimate rotation_vector(const ConfigurationWindow& u);

/// For each |k|_inf <= k_range and |l| <= l_range, u_{i+k} + l - u_i must
/// not take both signs across valid i. margin: smallest mixed-sign magnitude.
CertificateReport birkhoff_check(const ConfigurationWindow& u, std::int64_t k_range,
                                 std::int64_t l_range);

/// omega . k + l >= 0 must imply u_{i+k} + l >= u_i - tol, and <= 0 must
/// imply u_{i+k} + l <= u_i + tol. margin: largest violation beyond tol.
CertificateReport omega_birkhoff_check(const ConfigurationWindow& u, std::span<const double> omega,
                                       std::int64_t k_range, std::int64_t l_range, double tol);

struct HullReconstruction {
  HullFunction hull;           // normalized
  double phase = 0.0;          // u_i = hull(phase + omega . i) + offset
  std::int64_t offset = 0;     // integer part of u_0
};

/// Monotone left-continuous step hull through the points
/// (frac(omega . i), u_i - floor(omega . i) - offset). Sampling the result
/// at the window phases reproduces u exactly when those phases are grid
/// points. Throws Errc::not_omega_birkhoff if the points are not monotone.
HullReconstruction hull_from_configuration(const ConfigurationWindow& u,
                                           std::span<const double> omega, std::int64_t N);

/// Left side of the discrete Euler-Lagrange equation at site i, evaluated
/// with the same pair reduction as el_residual.
double discrete_el_residual(const Model& model, const ConfigurationWindow& u,
                            std::span<const std::int64_t> i);

/// discrete_el_residual at every site whose neighbors are in the window.
CertificateReport discrete_el_check(const Model& model, const ConfigurationWindow& u, double tol);

/// Finite-box class-A test: random perturbations supported in |i|_inf < box,
/// then coordinate descent on those sites. Passes iff the smallest action
/// change seen is >= -1e-10; margin is that change.
CertificateReport ground_state_test(const Model& model, const ConfigurationWindow& u,
                                    std::int64_t box, int trials, double amplitude,
                                    std::uint64_t seed);

}  // namespace mather
