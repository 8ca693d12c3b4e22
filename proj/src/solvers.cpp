#include "mather/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mather/errors.hpp"
#include "mather/numerics.hpp"
#include "mather/percival.hpp"

namespace mather {

namespace {

constexpr double kEnergySlack = 1e-14;
constexpr double kMinStep = 1e-15;

void check_options(const SolveOptions& opts) {
  if (!(opts.residual_tol > 0.0)) throw Error(Errc::invalid_argument, "residual_tol must be > 0");
  if (!(opts.dt_init > 0.0)) throw Error(Errc::invalid_argument, "dt_init must be > 0");
  if (opts.max_steps < 1) throw Error(Errc::invalid_argument, "max_steps must be >= 1");
}

double resolve_dt_max(const Model& model, const SolveOptions& opts) {
  return opts.dt_max > 0.0 ? opts.dt_max : stable_dt(model);
}

std::vector<double> rk4_increment(const std::vector<double>& k1, const std::vector<double>& k2,
                                  const std::vector<double>& k3, const std::vector<double>& k4) {
  std::vector<double> out(k1.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
  }
  return out;
}

HullFunction default_start(std::size_t n) {
  std::vector<double> lift(n, 0.25 / static_cast<double>(n));
  return HullFunction::identity(n).displaced(lift);
}

// sin(2 pi (theta + phase)) on the grid: a perturbation that the flow
// damps quickly, so escape checks stay cheap.
std::vector<double> smooth_bump(std::size_t n, double phase) {
  std::vector<double> b(n);
  for (std::size_t k = 0; k < n; ++k) {
    b[k] = std::sin(2.0 * std::numbers::pi * (static_cast<double>(k) / static_cast<double>(n) + phase));
  }
  return b;
}

MinimizerResult finish(const Model& model, const ShiftSet& shifts, HullFunction h,
                       MinimizerResult r, double tol) {
  r.energy = energy(model, shifts, h);
  r.residual_sup = el_residual(model, shifts, h).sup_norm;
  r.converged = r.residual_sup <= tol;
  r.hull = std::move(h);
  return r;
}

}  // namespace

const char* to_string(Method m) noexcept {
  switch (m) {
    case Method::flow: return "flow";
    case Method::projected_descent: return "projected_descent";
    case Method::lattice_descent: return "lattice_descent";
  }
  return "flow";
}

Method parse_method(const std::string& name) {
  if (name == "flow") return Method::flow;
  if (name == "projected_descent") return Method::projected_descent;
  if (name == "lattice_descent") return Method::lattice_descent;
  throw Error(Errc::invalid_argument, "unknown method '" + name + "'");
}

double stable_dt(const Model& model) {
  const ValidationReport r = sample_model(model, 32);
  return r.curvature_bound > 0.0 ? 1.0 / r.curvature_bound : 1.0;
}

StepOutcome flow_step_adaptive(const Model& model, const ShiftSet& shifts, const HullFunction& h,
                               double dt, double energy_before, std::span<const double> residual) {
  if (!(dt > 0.0)) throw Error(Errc::invalid_argument, "dt must be > 0");
  std::vector<double> k1 = residual.empty() ? el_residual(model, shifts, h).values
                                            : std::vector<double>(residual.begin(), residual.end());
  while (dt >= kMinStep) {
    const auto k2 = el_residual(model, shifts, h.displaced(k1, -0.5 * dt)).values;
    const auto k3 = el_residual(model, shifts, h.displaced(k2, -0.5 * dt)).values;
    const auto k4 = el_residual(model, shifts, h.displaced(k3, -dt)).values;
    HullFunction next = h.displaced(rk4_increment(k1, k2, k3, k4), -dt);
    const double e = energy(model, shifts, next);
    if (e <= energy_before + kEnergySlack) return {std::move(next), dt, e};
    dt *= 0.5;
  }
  throw Error(Errc::step_rejected, "step size underflow while enforcing energy decrease");
}

HullFunction flow_step(const Model& model, const ShiftSet& shifts, const HullFunction& h,
                       double dt) {
  return flow_step_adaptive(model, shifts, h, dt, energy(model, shifts, h)).hull;
}

MinimizerResult integrate_flow(const Model& model, const ShiftSet& shifts, const HullFunction& h0,
                               double T, const SolveOptions& opts) {
  check_options(opts);
  if (!(T > 0.0)) throw Error(Errc::invalid_argument, "flow time T must be > 0");
  const double dt_max = resolve_dt_max(model, opts);

  MinimizerResult r;
  HullFunction h = h0;
  double e = energy(model, shifts, h);
  ResidualField x = el_residual(model, shifts, h);
  double dt = std::min(opts.dt_init, dt_max);
  double t = 0.0;
  int steps = 0;
  r.history.push_back({0, 0.0, e, x.sup_norm});

  while (x.sup_norm > opts.residual_tol && t < T && steps < opts.max_steps) {
    const double dt_try = std::min(dt, T - t);
    StepOutcome step = flow_step_adaptive(model, shifts, h, dt_try, e, x.values);
    t = (step.dt_used == T - t) ? T : t + step.dt_used;
    if (step.dt_used < dt_try) {
      dt = step.dt_used;
    } else if (dt_try == dt) {
      dt = std::min(1.25 * dt, dt_max);
    }
    h = std::move(step.hull);
    e = step.energy;
    ++steps;
    if (opts.reproject_every > 0 && steps % opts.reproject_every == 0 && !h.monotone()) {
      HullFunction p = project_monotone(h);
      r.reprojection_total += sup_distance(h, p);
      h = std::move(p);
      e = energy(model, shifts, h);
    }
    x = el_residual(model, shifts, h);
    r.history.push_back({steps, t, e, x.sup_norm});
  }
  r.steps_taken = steps;
  r.time = t;
  r.energy = e;
  r.residual_sup = x.sup_norm;
  r.converged = x.sup_norm <= opts.residual_tol;
  r.hull = std::move(h);
  return r;
}

MinimizerResult projected_descent(const Model& model, const ShiftSet& shifts,
                                  const HullFunction& h0, const SolveOptions& opts) {
  check_options(opts);
  // Spectral projected gradient: Barzilai-Borwein step lengths, projected
  // onto the cone, accepted by an Armijo test against the largest of the
  // last kMemory energies.
  constexpr std::size_t kMemory = 10;
  const double dt_max = resolve_dt_max(model, opts);
  const double alpha_max = 1e3 * dt_max;
  const double inv_n = 1.0 / static_cast<double>(h0.size());

  MinimizerResult r;
  HullFunction h = project_monotone(h0);
  double e = energy(model, shifts, h);
  ResidualField x = el_residual(model, shifts, h);
  double alpha = std::min(opts.dt_init, dt_max);
  std::vector<double> recent{e};
  int steps = 0;
  r.history.push_back({0, 0.0, e, x.sup_norm});

  while (x.sup_norm > opts.residual_tol && steps < opts.max_steps) {
    const double reference = *std::max_element(recent.begin(), recent.end());
    double lambda = alpha;
    bool accepted = false;
    HullFunction trial;
    double e_trial = e;
    std::vector<double> moved;
    while (lambda >= kMinStep) {
      trial = project_monotone(h.displaced(x.values, -lambda));
      moved = HullFunction::difference(h, trial);
      std::vector<double> dots(moved.size());
      for (std::size_t k = 0; k < moved.size(); ++k) dots[k] = x.values[k] * moved[k];
      const double predicted = invariant_sum(std::move(dots)) * inv_n;
      e_trial = energy(model, shifts, trial);
      if (e_trial <= reference - 1e-4 * predicted + kEnergySlack) {
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) break;
    ResidualField x_trial = el_residual(model, shifts, trial);
    double ss = 0.0, sy = 0.0;
    for (std::size_t k = 0; k < moved.size(); ++k) {
      const double y = x_trial.values[k] - x.values[k];
      ss += moved[k] * moved[k];
      sy += -moved[k] * y;
    }
    alpha = sy > 0.0 ? std::clamp(ss / sy, kMinStep, alpha_max) : alpha_max;
    h = std::move(trial);
    e = e_trial;
    x = std::move(x_trial);
    ++steps;
    r.time += lambda;
    r.history.push_back({steps, r.time, e, x.sup_norm});
    recent.push_back(e);
    if (recent.size() > kMemory) recent.erase(recent.begin());
  }
  r.steps_taken = steps;
  r.energy = e;
  r.residual_sup = x.sup_norm;
  r.converged = x.sup_norm <= opts.residual_tol;
  r.hull = std::move(h);
  return r;
}

MinimizerResult lattice_descent(const Model& model, const ShiftSet& shifts,
                                std::vector<HullFunction> candidates, const SolveOptions& opts) {
  check_options(opts);
  if (candidates.empty()) throw Error(Errc::invalid_argument, "candidate pool is empty");
  for (const auto& c : candidates) {
    if (c.size() != candidates.front().size()) {
      throw Error(Errc::grid_mismatch, "candidates live on different grids");
    }
  }
  std::vector<double> energies;
  energies.reserve(candidates.size());
  for (const auto& c : candidates) energies.push_back(energy(model, shifts, c));

  MinimizerResult r;
  int replacements = 0;
  for (int pass = 0; pass < opts.max_steps; ++pass) {
    bool changed = false;
    const double floor_energy = *std::min_element(energies.begin(), energies.end());
    for (std::size_t a = 0; a < candidates.size(); ++a) {
      for (std::size_t b = a + 1; b < candidates.size(); ++b) {
        if (energies[a] > floor_energy + opts.lattice_band ||
            energies[b] > floor_energy + opts.lattice_band) {
          continue;
        }
        HullFunction lo = meet(candidates[a], candidates[b]);
        HullFunction hi = join(candidates[a], candidates[b]);
        const double e_lo = energy(model, shifts, lo);
        const double e_hi = energy(model, shifts, hi);
        const double before = energies[a] + energies[b];
        const double pair_min = std::min(energies[a], energies[b]);
        // Submodularity makes the pair sum non-increasing; also keep the
        // pool minimum from rising.
        if (e_lo + e_hi < before - 1e-13 && std::min(e_lo, e_hi) <= pair_min) {
          if (e_lo <= e_hi) {
            candidates[a] = std::move(lo);
            candidates[b] = std::move(hi);
            energies[a] = e_lo;
            energies[b] = e_hi;
          } else {
            candidates[a] = std::move(hi);
            candidates[b] = std::move(lo);
            energies[a] = e_hi;
            energies[b] = e_lo;
          }
          changed = true;
          ++replacements;
        }
      }
    }
    const double best = *std::min_element(energies.begin(), energies.end());
    r.history.push_back({pass + 1, 0.0, best, 0.0});
    if (!changed) break;
  }

  const auto best_it = std::min_element(energies.begin(), energies.end());
  const auto best = static_cast<std::size_t>(best_it - energies.begin());
  HullFunction limit = candidates[best];
  if (!limit.monotone()) {
    HullFunction env = monotone_envelope(limit);
    if (energy(model, shifts, env) <= *best_it + 1e-12) limit = std::move(env);
  }
  if (limit.monotone()) limit = normalize(limit);
  r.steps_taken = replacements;
  return finish(model, shifts, std::move(limit), std::move(r), opts.residual_tol);
}

MinimizerResult minimize(const Model& model, const ShiftSet& shifts,
                         std::optional<HullFunction> h0, const SolveOptions& opts) {
  check_options(opts);
  const auto n = static_cast<std::size_t>(shifts.grid_size);
  HullFunction start = h0 ? std::move(*h0) : default_start(n);
  constexpr double kForever = std::numeric_limits<double>::infinity();

  MinimizerResult r;
  switch (opts.method) {
    case Method::flow:
      r = integrate_flow(model, shifts, start, kForever, opts);
      break;
    case Method::projected_descent:
      r = projected_descent(model, shifts, start, opts);
      break;
    case Method::lattice_descent: {
      std::mt19937_64 rng(opts.seed);
      std::vector<HullFunction> pool;
      SolveOptions relax = opts;
      relax.max_steps = std::min(opts.max_steps, 2000);
      pool.push_back(integrate_flow(model, shifts, start, 20.0, relax).hull);
      for (int i = 1; i < opts.pool_size; ++i) {
        HullFunction c = random_monotone(start.size(), rng);
        pool.push_back(integrate_flow(model, shifts, c, 20.0, relax).hull);
      }
      MinimizerResult pooled = lattice_descent(model, shifts, std::move(pool), opts);
      r = integrate_flow(model, shifts, pooled.hull, kForever, opts);
      r.steps_taken += pooled.steps_taken;
      break;
    }
  }
  if (r.converged) {
    std::mt19937_64 rng(opts.seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> phase(0.0, 1.0);
    for (int trial = 0; trial < opts.escape_trials; ++trial) {
      MinimizerResult alt =
          integrate_flow(model, shifts, r.hull.displaced(smooth_bump(n, phase(rng)), 1e-3), kForever, opts);
      if (alt.converged && alt.energy < r.energy - 1e-12) {
        alt.steps_taken += r.steps_taken;
        r = std::move(alt);
      }
    }
  }
  if (r.hull.monotone()) r.hull = normalize(r.hull);
  return r;
}

std::vector<SweepRecord> sweep(const ModelFamily& family, std::span<const double> K_grid,
                               const ShiftSet& shifts, const SolveOptions& opts,
                               std::optional<HullFunction> h0) {
  if (K_grid.empty()) throw Error(Errc::invalid_argument, "parameter grid is empty");
  if (!std::is_sorted(K_grid.begin(), K_grid.end())) {
    throw Error(Errc::invalid_argument, "parameter grid must be ascending");
  }
  std::vector<SweepRecord> records;
  std::optional<HullFunction> warm = std::move(h0);
  for (double K : K_grid) {
    const Model model = family(K);
    validate_model(model);
    MinimizerResult res = minimize(model, shifts, warm, opts);
    SweepRecord rec;
    rec.K = K;
    rec.energy = res.energy;
    rec.residual_sup = res.residual_sup;
    rec.largest_gap = detect_gaps(res.hull, 0.0).largest_gap;
    rec.converged = res.converged;
    rec.steps = res.steps_taken;
    rec.hull = res.hull;
    warm = std::move(res.hull);
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace mather
