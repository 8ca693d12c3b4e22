#include "mather/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "mather/errors.hpp"

namespace mather {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

ValidationReport sample_model(const Model& model, int samples_per_axis) {
  if (samples_per_axis < 16) {
    throw Error(Errc::invalid_argument, "samples_per_axis must be at least 16");
  }
  if (model.terms.empty()) {
    throw Error(Errc::invalid_argument, "model has no interaction terms");
  }
  ValidationReport report;
  report.twist_bound = -std::numeric_limits<double>::infinity();
  report.lower_bound_estimate = std::numeric_limits<double>::infinity();
  const int n = samples_per_axis;
  for (const auto& term : model.terms) {
    double curvature = 0.0;
    for (int a = 0; a < n; ++a) {
      const double u = static_cast<double>(a) / n;
      // v covers the band |v - u| <= 2 used for the Lipschitz constant M.
      for (int b = 0; b <= n; ++b) {
        const double v = u - 2.0 + 4.0 * static_cast<double>(b) / n;
        const double e = term.energy(u, v);
        const double up = term.energy(u + 1.0, v + 1.0);
        const double down = term.energy(u - 1.0, v - 1.0);
        report.h1_defect = std::max({report.h1_defect, std::abs(up - e), std::abs(down - e)});
        report.lower_bound_estimate = std::min(report.lower_bound_estimate, e);
        const double twist = term.d12(u, v);
        report.twist_bound = std::max(report.twist_bound, twist);
        report.lipschitz_M =
            std::max({report.lipschitz_M, std::abs(term.d1(u, v)), std::abs(term.d2(u, v))});
        curvature = std::max(curvature, std::abs(term.d11(u, v)) + std::abs(term.d22(u, v)) +
                                            2.0 * std::abs(twist));
      }
    }
    report.curvature_bound += curvature;
  }
  return report;
}

ValidationReport validate_model(const Model& model, int samples_per_axis) {
  ValidationReport report = sample_model(model, samples_per_axis);
  if (!(report.twist_bound < 0.0)) {
    throw Error(Errc::twist_violation,
                "max d12 = " + std::to_string(report.twist_bound) + " is not negative");
  }
  if (report.h1_defect > 1e-9) {
    throw Error(Errc::periodicity_violation,
                "H(u+1,v+1) differs from H(u,v) by " + std::to_string(report.h1_defect));
  }
  return report;
}

Model standard_fk(double K, int dim) {
  if (!(K >= 0.0)) throw Error(Errc::invalid_argument, "K must be non-negative");
  if (dim < 1) throw Error(Errc::invalid_argument, "dimension must be at least 1");
  const double amp = K / (kTwoPi * kTwoPi) / dim;
  const double slope = K / kTwoPi / dim;
  const double curv = K / dim;

  Model model;
  model.name = "standard_fk";
  for (int j = 0; j < dim; ++j) {
    InteractionTerm t;
    t.label = "fk_" + std::to_string(j);
    t.energy = [amp](double u, double v) {
      const double w = v - u;
      return 0.5 * w * w + amp * (1.0 - std::cos(kTwoPi * u));
    };
    t.d1 = [slope](double u, double v) { return -(v - u) + slope * std::sin(kTwoPi * u); };
    t.d2 = [](double u, double v) { return v - u; };
    t.d11 = [curv](double u, double) { return 1.0 + curv * std::cos(kTwoPi * u); };
    t.d12 = [](double, double) { return -1.0; };
    t.d22 = [](double, double) { return 1.0; };
    model.terms.push_back(std::move(t));
  }
  return model;
}

std::vector<double> ShiftSet::grid_omega() const {
  std::vector<double> out;
  out.reserve(approximants.size());
  for (auto m : approximants) out.push_back(static_cast<double>(m) / static_cast<double>(grid_size));
  return out;
}

ShiftSet make_shiftset(std::vector<double> omega, std::int64_t N) {
  if (N < 2) throw Error(Errc::invalid_argument, "grid size N must be at least 2");
  if (omega.empty()) throw Error(Errc::invalid_argument, "omega must be non-empty");
  ShiftSet s;
  s.grid_size = N;
  for (double w : omega) {
    if (!std::isfinite(w)) throw Error(Errc::invalid_argument, "omega entries must be finite");
    const auto m = static_cast<std::int64_t>(std::llround(w * static_cast<double>(N)));
    // A shift by a whole number of periods pairs h(theta) with h(theta) + n.
    if (m % N == 0) {
      throw Error(Errc::degenerate_shift, "approximant " + std::to_string(m) + "/" +
                                              std::to_string(N) + " is a whole period");
    }
    s.approximants.push_back(m);
    s.approx_error =
        std::max(s.approx_error, std::abs(w - static_cast<double>(m) / static_cast<double>(N)));
  }
  if (omega.size() == 1) s.degenerate_subperiod = std::gcd(s.approximants[0], N) > 1;
  s.omega = std::move(omega);
  return s;
}

}  // namespace mather
