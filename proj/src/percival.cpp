#include "mather/percival.hpp"

#include <cmath>

#include "mather/errors.hpp"
#include "mather/numerics.hpp"

namespace mather {

namespace {

void check_shapes(const Model& model, const ShiftSet& shifts, const HullFunction& h) {
  if (static_cast<std::int64_t>(h.size()) != shifts.grid_size) {
    throw Error(Errc::grid_mismatch, "hull has " + std::to_string(h.size()) +
                                         " samples but the shift set uses N = " +
                                         std::to_string(shifts.grid_size));
  }
  if (shifts.approximants.size() != model.dim()) {
    throw Error(Errc::grid_mismatch, "shift set has " + std::to_string(shifts.dim()) +
                                         " frequencies for a model of dimension " +
                                         std::to_string(model.dim()));
  }
}

}  // namespace

double energy(const Model& model, const ShiftSet& shifts, const HullFunction& h) {
  check_shapes(model, shifts, h);
  const auto n = static_cast<std::int64_t>(h.size());
  std::vector<double> terms(h.size());
  for (std::int64_t k = 0; k < n; ++k) {
    const Lifted& base = h.entry(static_cast<std::size_t>(k));
    double t = 0.0;
    for (std::size_t j = 0; j < model.dim(); ++j) {
      const double v = base.reduce(h.lifted(k + shifts.approximants[j]));
      t += model.terms[j].energy(base.frac, v);
    }
    terms[static_cast<std::size_t>(k)] = t;
  }
  return invariant_sum(std::move(terms)) / static_cast<double>(n);
}

ResidualField el_residual(const Model& model, const ShiftSet& shifts, const HullFunction& h) {
  check_shapes(model, shifts, h);
  const auto n = static_cast<std::int64_t>(h.size());
  std::vector<double> x(h.size());
  for (std::int64_t k = 0; k < n; ++k) {
    const Lifted& here = h.entry(static_cast<std::size_t>(k));
    double s = 0.0;
    for (std::size_t j = 0; j < model.dim(); ++j) {
      const std::int64_t m = shifts.approximants[j];
      const auto& term = model.terms[j];
      s += term.d1(here.frac, here.reduce(h.lifted(k + m)));
      const Lifted behind = h.lifted(k - m);
      s += term.d2(behind.frac, behind.reduce(here));
    }
    x[static_cast<std::size_t>(k)] = s;
  }
  return make_residual_field(std::move(x));
}

ResidualField make_residual_field(std::vector<double> values) {
  ResidualField f;
  f.N = values.size();
  std::vector<double> sq(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    f.sup_norm = std::max(f.sup_norm, std::abs(values[k]));
    sq[k] = values[k] * values[k];
  }
  if (!values.empty()) f.l2_norm = std::sqrt(invariant_sum(std::move(sq)) / static_cast<double>(f.N));
  f.values = std::move(values);
  return f;
}

double submodularity_defect(const Model& model, const ShiftSet& shifts, const HullFunction& h,
                            const HullFunction& g) {
  const HullFunction lo = meet(h, g);
  const HullFunction hi = join(h, g);
  return energy(model, shifts, lo) + energy(model, shifts, hi) - energy(model, shifts, h) -
         energy(model, shifts, g);
}

}  // namespace mather
