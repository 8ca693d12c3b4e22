#pragma once

#include <string>
#include <vector>

#include "mather/hull.hpp"
#include "mather/model.hpp"
#include "mather/solvers.hpp"

namespace mather {

struct StrictOrderReport {
  bool ordered = false;
  double strict_fraction = 0.0;  // fraction of grid points with h+ - h- > 1e-10
};

/// Flows both hulls for t_probe and checks that their order survives.
/// Throws Errc::not_comparable if h_minus <= h_plus fails on the grid.
StrictOrderReport check_strict_order(const Model& model, const ShiftSet& shifts,
                                     const HullFunction& h_minus, const HullFunction& h_plus,
                                     double t_probe, const SolveOptions& flow = {});

struct MountainPassOptions {
  int s_grid = 11;            // uniform interpolation parameters, endpoints included
  double T_flow = 200.0;      // flow time standing in for t -> infinity
  int refine_rounds = 60;
  double residual_tol = 1e-6;
  double barrier_tol = 1e-9;  // energies within this of the minimum count as minimal
  double stall_rate = 1e-12;  // |dE/dt| below this ends a profile flow
  double max_flow_time = 2e4; // cap for flows that classify basins
  SolveOptions flow;          // integrator settings (dt, reprojection)
};

enum class PassCase { barrier_positive, degenerate };

/// What the flows looked like when no barrier was detected.
enum class DegeneratePattern {
  none,           // barrier was positive
  alternative_a,  // some trajectory approached both h- and h+
  alternative_b,  // every interpolant converged to h- or h+
  continuum,      // interpolants converged to other rest points of equal energy
};

const char* to_string(PassCase c) noexcept;
const char* to_string(DegeneratePattern p) noexcept;

struct ProfilePoint {
  double s = 0.0;
  double limiting_energy = 0.0;
};

struct CriticalPointResult {
  HullFunction hull;
  double energy = 0.0;
  double residual_sup = 0.0;
  double barrier = 0.0;         // limiting-energy maximum minus energy(h-)
  double s_star = 0.0;
  double strict_fraction = 0.0; // fraction of grid with h- < h0 < h+ (by 1e-10)
  PassCase pass_case = PassCase::degenerate;
  DegeneratePattern pattern = DegeneratePattern::none;
  bool converged = false;       // residual_sup <= residual_tol
  std::vector<ProfilePoint> profile;  // sorted by s
};

/// Max-min construction between two ordered minimizers: flow every
/// interpolant s h+ + (1-s) h-, locate the largest limiting energy or a
/// boundary between basins, track that boundary, and return the
/// lowest-residual iterate that stays above the minimum energy.
/// Throws Errc::not_comparable or Errc::degenerate_pair.
CriticalPointResult mountain_pass(const Model& model, const ShiftSet& shifts,
                                  const HullFunction& h_minus, const HullFunction& h_plus,
                                  const MountainPassOptions& opts = {});

}  // namespace mather
