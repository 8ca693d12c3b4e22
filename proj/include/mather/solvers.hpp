#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mather/hull.hpp"
#include "mather/model.hpp"

namespace mather {

enum class Method { flow, projected_descent, lattice_descent };

const char* to_string(Method m) noexcept;
Method parse_method(const std::string& name);

struct SolveOptions {
  Method method = Method::flow;
  int max_steps = 200000;
  double residual_tol = 1e-8;  // target for sup |X(h)|
  double dt_init = 0.1;
  int reproject_every = 10;  // 0 disables monotone reprojection
  std::uint64_t seed = 0;
  double dt_max = 0.0;  // 0: 1 / (curvature bound of the model)
  // lattice_descent: pool size for minimize() and the energy band above the
  // pool minimum inside which pairs are combined.
  int pool_size = 6;
  double lattice_band = std::numeric_limits<double>::infinity();
  // minimize(): after converging, flow from this many smooth perturbations of
  // the result and keep any lower-energy endpoint. Symmetric starting hulls
  // can otherwise settle on a symmetric saddle.
  int escape_trials = 1;
};

struct HistoryEntry {
  int step = 0;
  double time = 0.0;
  double energy = 0.0;
  double residual_sup = 0.0;
};

struct MinimizerResult {
  HullFunction hull;
  double energy = 0.0;
  double residual_sup = 0.0;
  int steps_taken = 0;
  bool converged = false;
  std::vector<HistoryEntry> history;
  double time = 0.0;               // flow time reached
  double reprojection_total = 0.0; // sum of sup-norm corrections by reprojection
};

/// Largest step used by the flow integrators for this model.
double stable_dt(const Model& model);

struct StepOutcome {
  HullFunction hull;
  double dt_used = 0.0;
  double energy = 0.0;
};

/// One RK4 step of dh/dt = -X(h), halving dt until the energy does not
/// increase. `residual` may carry X(h) to save one evaluation. Throws
/// Errc::step_rejected if dt falls below 1e-15.
StepOutcome flow_step_adaptive(const Model& model, const ShiftSet& shifts, const HullFunction& h,
                               double dt, double energy_before,
                               std::span<const double> residual = {});

HullFunction flow_step(const Model& model, const ShiftSet& shifts, const HullFunction& h,
                       double dt);

/// Flows until time T, residual_tol, or max_steps. Pass T = infinity to run
/// to convergence. Not converging is reported through `converged`.
MinimizerResult integrate_flow(const Model& model, const ShiftSet& shifts, const HullFunction& h0,
                               double T, const SolveOptions& opts);

/// Projected gradient descent on the monotone cone with Armijo backtracking.
MinimizerResult projected_descent(const Model& model, const ShiftSet& shifts,
                                  const HullFunction& h0, const SolveOptions& opts);

/// Combines pool members by meets and joins (never raising the pool
/// minimum) until the pool stabilizes, then takes the monotone envelope of
/// the best member and normalizes it.
MinimizerResult lattice_descent(const Model& model, const ShiftSet& shifts,
                                std::vector<HullFunction> candidates, const SolveOptions& opts);

/// Minimizes over the discretized hull space; the output is normalized. The
/// default start is the identity hull raised by a quarter grid cell, which
/// breaks the reflection symmetry of the identity.
MinimizerResult minimize(const Model& model, const ShiftSet& shifts,
                         std::optional<HullFunction> h0, const SolveOptions& opts);

struct SweepRecord {
  double K = 0.0;
  double energy = 0.0;
  double residual_sup = 0.0;
  double largest_gap = 0.0;
  bool converged = false;
  int steps = 0;
  HullFunction hull;
};

using ModelFamily = std::function<Model(double)>;

/// Continuation in K (ascending), warm-starting each solve from the previous
/// minimizer.
std::vector<SweepRecord> sweep(const ModelFamily& family, std::span<const double> K_grid,
                               const ShiftSet& shifts, const SolveOptions& opts,
                               std::optional<HullFunction> h0 = std::nullopt);

}  // namespace mather
