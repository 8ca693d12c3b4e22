#pragma once

#include <vector>

#include "mather/hull.hpp"
#include "mather/model.hpp"

namespace mather {

/// Euler-Lagrange field X(h) sampled on the grid.
struct ResidualField {
  std::size_t N = 0;
  std::vector<double> values;
  double sup_norm = 0.0;
  double l2_norm = 0.0;  // sqrt((1/N) sum values^2)
};

/// (1/N) sum_k sum_j H_j(h_k, h_{k+m_j}). Each pair is evaluated after
/// subtracting the integer part of h_k from both arguments.
double energy(const Model& model, const ShiftSet& shifts, const HullFunction& h);

/// X(h)_k = sum_j d1_j(h_k, h_{k+m_j}) + d2_j(h_{k-m_j}, h_k); equals
/// N times the gradient of energy().
ResidualField el_residual(const Model& model, const ShiftSet& shifts, const HullFunction& h);

/// energy(h ^ g) + energy(h v g) - energy(h) - energy(g); non-positive under
/// the twist condition.
double submodularity_defect(const Model& model, const ShiftSet& shifts, const HullFunction& h,
                            const HullFunction& g);

/// Builds the residual summary (norms) from raw grid values.
ResidualField make_residual_field(std::vector<double> values);

}  // namespace mather
