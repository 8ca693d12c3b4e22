#include "mather/critical.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include "mather/errors.hpp"
#include "mather/parallel.hpp"
#include "mather/percival.hpp"

namespace mather {

namespace {

constexpr double kOrderSlack = 1e-12;
constexpr double kStrictGap = 1e-10;
constexpr double kEnergyMismatch = 1e-6;
constexpr double kSettleResidual = 1e-7;
constexpr double kSameLimit = 1e-3;
constexpr double kEdgeChunk = 10.0;
constexpr double kEdgeLost = 1e-3;      // flowed pair further apart than this: edge lost
constexpr double kPolishOffset = 1e-4;  // half-width of the pair that restarts tracking
constexpr double kPolishRefine = 1e-9;
constexpr int kEdgePatience = 40;

void check_pair(const HullFunction& lo, const HullFunction& hi) {
  if (lo.size() != hi.size()) throw Error(Errc::grid_mismatch, "hulls on different grids");
  if (lo.size() == 0) throw Error(Errc::invalid_argument, "empty hull");
}

double strict_fraction_of(const std::vector<double>& diff) {
  std::size_t strict = 0;
  for (double d : diff) strict += d > kStrictGap ? 1 : 0;
  return static_cast<double>(strict) / static_cast<double>(diff.size());
}

// mean of g - h over the grid
double mean_offset(const HullFunction& h, const HullFunction& g) {
  const auto d = HullFunction::difference(g, h);
  double s = 0.0;
  for (double x : d) s += x;
  return s / static_cast<double>(d.size());
}

// h- + s (h+ - h-), built on the integer parts of h-. s = 0 and s = 1
// reproduce the endpoints exactly.
HullFunction interpolant(const HullFunction& lo, const HullFunction& hi, double s) {
  if (s == 0.0) return lo;
  if (s == 1.0) return hi;
  std::vector<Lifted> e(lo.size());
  for (std::size_t k = 0; k < e.size(); ++k) {
    const Lifted& a = lo.entry(k);
    e[k] = {a.frac + s * a.offset_to(hi.entry(k)), a.whole};
  }
  return HullFunction(std::move(e));
}

bool same_entries(const HullFunction& a, const HullFunction& b) {
  return std::equal(a.entries().begin(), a.entries().end(), b.entries().begin());
}
struct Candidate {
  HullFunction hull;
  double energy = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  double s = 0.0;
};

void keep_better(std::optional<Candidate>& into, const std::optional<Candidate>& c) {
  if (c && (!into || c->residual < into->residual)) into = c;
}

// One trajectory of the adaptive RK4 flow.
struct FlowState {
  HullFunction h;
  double e = 0.0;
  ResidualField x;
  double dt = 0.0;
  double t = 0.0;
  int steps = 0;
};

struct Trajectory {
  double s = 0.0;
  double limiting_energy = 0.0;  // energy at T_flow, or where the flow stopped earlier
  HullFunction final_hull;
  double final_residual = 0.0;
  double closest_minus = std::numeric_limits<double>::infinity();
  double closest_plus = std::numeric_limits<double>::infinity();
  std::optional<Candidate> best;
};

enum class Mode { profile, classify };

struct Runner {
  const Model& model;
  const ShiftSet& shifts;
  const HullFunction& lo;
  const HullFunction& hi;
  const MountainPassOptions& opts;
  double e_min;
  double dt_max;

  bool above(double e) const { return e > e_min + opts.barrier_tol; }

  FlowState start(HullFunction h) const {
    FlowState f;
    f.e = energy(model, shifts, h);
    f.x = el_residual(model, shifts, h);
    f.h = std::move(h);
    f.dt = std::min(opts.flow.dt_init, dt_max);
    return f;
  }

  // Steps until t_end or until visit returns false. visit sees every iterate,
  // the starting one included.
  void advance(FlowState& f, double t_end, const std::function<bool(const FlowState&)>& visit) const {
    if (!visit(f)) return;
    while (f.t < t_end && f.steps < opts.flow.max_steps) {
      const double dt_try = std::min(f.dt, t_end - f.t);
      StepOutcome step = flow_step_adaptive(model, shifts, f.h, dt_try, f.e, f.x.values);
      f.t = (step.dt_used == t_end - f.t) ? t_end : f.t + step.dt_used;
      if (step.dt_used < dt_try) {
        f.dt = step.dt_used;
      } else if (dt_try == f.dt) {
        f.dt = std::min(1.25 * f.dt, dt_max);
      }
      f.h = std::move(step.hull);
      f.e = step.energy;
      ++f.steps;
      if (opts.flow.reproject_every > 0 && f.steps % opts.flow.reproject_every == 0 &&
          !f.h.monotone()) {
        f.h = project_monotone(f.h);
        f.e = energy(model, shifts, f.h);
      }
      f.x = el_residual(model, shifts, f.h);
      if (!visit(f)) return;
    }
  }

  void note(std::optional<Candidate>& best, const FlowState& f, double s) const {
    if (above(f.e) && (!best || f.x.sup_norm < best->residual)) {
      best = Candidate{f.h, f.e, f.x.sup_norm, s};
    }
  }

  // profile: flow to T_flow or a stall. classify: flow until settled at a
  // minimum-level rest point, to learn which basin s belongs to.
  Trajectory run(double s, Mode mode) const {
    Trajectory tr;
    tr.s = s;
    FlowState f = start(interpolant(lo, hi, s));
    bool have_limit = false;
    const double t_stop = mode == Mode::profile ? opts.T_flow : opts.max_flow_time;
    advance(f, t_stop, [&](const FlowState& g) {
      note(tr.best, g, s);
      tr.closest_minus = std::min(tr.closest_minus, sup_distance(g.h, lo));
      tr.closest_plus = std::min(tr.closest_plus, sup_distance(g.h, hi));
      if (!have_limit && g.t >= opts.T_flow) {
        tr.limiting_energy = g.e;
        have_limit = true;
      }
      // |dE/dt| is the mean of X^2
      if (mode == Mode::profile) return g.x.l2_norm * g.x.l2_norm >= opts.stall_rate;
      return above(g.e) || g.x.sup_norm > kSettleResidual;
    });
    if (!have_limit) tr.limiting_energy = f.e;
    tr.final_residual = f.x.sup_norm;
    tr.final_hull = std::move(f.h);
    return tr;
  }

  // Edge tracking: a and b start on opposite sides of a basin boundary. Both
  // are flowed in chunks; when they drift further apart than `refine` the
  // chunk start is bisected again, so the pair follows the boundary towards
  // the critical point that attracts it. Returns the lowest-residual iterate
  // seen above the minimum.
  std::optional<Candidate> edge(HullFunction a, HullFunction b, double s, double refine) const {
    std::optional<Candidate> best;
    auto chunk = [&](const HullFunction& h) {
      FlowState f = start(h);
      advance(f, kEdgeChunk, [&](const FlowState& g) {
        note(best, g, s);
        return true;
      });
      return f;
    };
    auto settled = [&](const FlowState& f) {
      return !above(f.e) && f.x.sup_norm <= kSettleResidual;
    };
    double best_seen = std::numeric_limits<double>::infinity();
    int stale = 0;
    for (double t = 0.0; t < opts.max_flow_time; t += kEdgeChunk) {
      FlowState fa = chunk(a);
      FlowState fb = chunk(b);
      for (int round = 0; round < 64 && sup_distance(fa.h, fb.h) > refine; ++round) {
        std::vector<Lifted> mid(a.size());
        for (std::size_t k = 0; k < mid.size(); ++k) {
          const Lifted& x = a.entry(k);
          mid[k] = {x.frac + 0.5 * x.offset_to(b.entry(k)), x.whole};
        }
        HullFunction c(std::move(mid));
        if (same_entries(c, a) || same_entries(c, b)) break;
        FlowState fc = chunk(c);
        if (sup_distance(fc.h, fa.h) <= sup_distance(fc.h, fb.h)) {
          a = std::move(c);
          fa = std::move(fc);
        } else {
          b = std::move(c);
          fb = std::move(fc);
        }
      }
      // apart: the edge was lost; both at rest on the minimum level: no edge
      if (sup_distance(fa.h, fb.h) > kEdgeLost || (settled(fa) && settled(fb))) break;
      a = std::move(fa.h);
      b = std::move(fb.h);
      if (best && best->residual <= 1e-3 * opts.residual_tol) break;
      if (best && best->residual < 0.9 * best_seen) {
        best_seen = best->residual;
        stale = 0;
      } else if (++stale >= kEdgePatience) {
        break;
      }
    }
    return best;
  }
};

}  // namespace

const char* to_string(PassCase c) noexcept {
  switch (c) {
    case PassCase::barrier_positive: return "barrier_positive";
    case PassCase::degenerate: return "degenerate";
  }
  return "degenerate";
}

const char* to_string(DegeneratePattern p) noexcept {
  switch (p) {
    case DegeneratePattern::none: return "none";
    case DegeneratePattern::alternative_a: return "alternative_a";
    case DegeneratePattern::alternative_b: return "alternative_b";
    case DegeneratePattern::continuum: return "continuum";
  }
  return "none";
}

StrictOrderReport check_strict_order(const Model& model, const ShiftSet& shifts,
                                     const HullFunction& h_minus, const HullFunction& h_plus,
                                     double t_probe, const SolveOptions& flow) {
  check_pair(h_minus, h_plus);
  if (!(t_probe >= 0.0)) throw Error(Errc::invalid_argument, "t_probe must be >= 0");
  const auto before = HullFunction::difference(h_plus, h_minus);
  for (double d : before) {
    if (d < -kOrderSlack) throw Error(Errc::not_comparable, "h_minus <= h_plus fails");
  }
  HullFunction a = h_minus;
  HullFunction b = h_plus;
  if (t_probe > 0.0) {
    SolveOptions o = flow;
    o.residual_tol = std::numeric_limits<double>::min();
    a = integrate_flow(model, shifts, h_minus, t_probe, o).hull;
    b = integrate_flow(model, shifts, h_plus, t_probe, o).hull;
  }
  const auto after = HullFunction::difference(b, a);
  StrictOrderReport r;
  r.ordered = std::all_of(after.begin(), after.end(), [](double d) { return d >= -kOrderSlack; });
  r.strict_fraction = strict_fraction_of(after);
  return r;
}

CriticalPointResult mountain_pass(const Model& model, const ShiftSet& shifts,
                                  const HullFunction& h_minus, const HullFunction& h_plus,
                                  const MountainPassOptions& opts) {
  check_pair(h_minus, h_plus);
  if (opts.s_grid < 3) throw Error(Errc::invalid_argument, "s_grid must be >= 3");
  if (!(opts.T_flow > 0.0)) throw Error(Errc::invalid_argument, "T_flow must be > 0");
  if (opts.refine_rounds < 0) throw Error(Errc::invalid_argument, "refine_rounds must be >= 0");
  if (!(opts.residual_tol > 0.0)) throw Error(Errc::invalid_argument, "residual_tol must be > 0");
  const auto gap = HullFunction::difference(h_plus, h_minus);
  for (double d : gap) {
    if (d < -kOrderSlack) throw Error(Errc::not_comparable, "h_minus <= h_plus fails");
  }
  if (std::none_of(gap.begin(), gap.end(), [](double d) { return d > kStrictGap; })) {
    throw Error(Errc::not_comparable, "h_minus and h_plus coincide");
  }
  const double e_minus = energy(model, shifts, h_minus);
  const double e_plus = energy(model, shifts, h_plus);
  if (std::abs(e_minus - e_plus) > kEnergyMismatch) {
    throw Error(Errc::degenerate_pair, "endpoint energies differ by more than 1e-6");
  }

  const Runner runner{model, shifts, h_minus, h_plus, opts, std::min(e_minus, e_plus),
                      opts.flow.dt_max > 0.0 ? opts.flow.dt_max : stable_dt(model)};

  const int n_grid = opts.s_grid;
  std::vector<Trajectory> grid(static_cast<std::size_t>(n_grid));
  parallel_for(grid.size(), [&](std::size_t i) {
    const double s = i + 1 == grid.size() ? 1.0 : static_cast<double>(i) / (n_grid - 1);
    grid[i] = runner.run(s, Mode::profile);
  });

  std::vector<ProfilePoint> profile;
  std::optional<Candidate> best;
  for (const auto& tr : grid) {
    profile.push_back({tr.s, tr.limiting_energy});
    keep_better(best, tr.best);
  }
  std::size_t arg = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i].limiting_energy > grid[arg].limiting_energy) arg = i;
  }

  // A bracket whose ends flow to different limits contains the boundary
  // between two basins; a saddle sits on it. Prefer brackets touching a
  // grid maximum that rises above the minimum. Otherwise every bracket holds
  // an equal-energy copy, and the one whose limits sit most centrally in the
  // order interval stays farthest from both endpoints.
  auto splits = [&](std::size_t i) {
    return sup_distance(grid[i].final_hull, grid[i + 1].final_hull) > kSameLimit;
  };
  const double width = mean_offset(h_minus, h_plus);
  auto position = [&](const HullFunction& f) { return mean_offset(h_minus, f) / width; };
  std::optional<std::size_t> bracket;
  if (runner.above(grid[arg].limiting_energy)) {
    if (arg > 0 && splits(arg - 1)) bracket = arg - 1;
    else if (arg + 1 < grid.size() && splits(arg)) bracket = arg;
  }
  if (!bracket) {
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      if (!splits(i)) continue;
      const double mid =
          0.5 * (position(grid[i].final_hull) + position(grid[i + 1].final_hull));
      const double score = std::abs(mid - 0.5);
      if (score < best_score) {
        best_score = score;
        bracket = i;
      }
    }
  }

  std::optional<Candidate> tracked;
  if (bracket) {
    double s_lo = grid[*bracket].s;
    double s_hi = grid[*bracket + 1].s;
    HullFunction f_lo = grid[*bracket].final_hull;
    HullFunction f_hi = grid[*bracket + 1].final_hull;
    for (int round = 0; round < opts.refine_rounds; ++round) {
      const double mid = 0.5 * (s_lo + s_hi);
      if (!(mid > s_lo && mid < s_hi)) break;
      Trajectory tr = runner.run(mid, Mode::classify);
      profile.push_back({mid, tr.limiting_energy});
      keep_better(best, tr.best);
      if (sup_distance(tr.final_hull, f_lo) <= sup_distance(tr.final_hull, f_hi)) {
        s_lo = mid;
        f_lo = std::move(tr.final_hull);
      } else {
        s_hi = mid;
        f_hi = std::move(tr.final_hull);
      }
    }
    tracked = runner.edge(interpolant(h_minus, h_plus, s_lo), interpolant(h_minus, h_plus, s_hi),
                          0.5 * (s_lo + s_hi), kEdgeLost);
    // Tracking with a loose pair stalls at a residual set by the pair width.
    // Restart from a narrow pair around the candidate and refine tightly;
    // keep the result only if it is the same critical point, improved.
    if (tracked && tracked->residual > 1e-3 * opts.residual_tol) {
      const std::vector<double> up(h_minus.size(), kPolishOffset);
      const std::optional<Candidate> fine =
          runner.edge(tracked->hull.displaced(up, -1.0), tracked->hull.displaced(up, 1.0),
                      tracked->s, kPolishRefine);
      if (fine && fine->residual < tracked->residual &&
          std::abs(fine->energy - tracked->energy) <= 1e-7) {
        tracked = fine;
      }
    }
  } else {
    // golden-section on the limiting energy around the grid maximum
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = grid[arg > 0 ? arg - 1 : arg].s;
    double b = grid[arg + 1 < grid.size() ? arg + 1 : arg].s;
    auto probe = [&](double s) {
      Trajectory tr = runner.run(s, Mode::profile);
      profile.push_back({s, tr.limiting_energy});
      keep_better(best, tr.best);
      return tr.limiting_energy;
    };
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = probe(c);
    double fd = probe(d);
    for (int round = 0; round < opts.refine_rounds && b - a > 1e-14; ++round) {
      if (fc >= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - invphi * (b - a);
        fc = probe(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + invphi * (b - a);
        fd = probe(d);
      }
    }
  }
  std::stable_sort(profile.begin(), profile.end(),
                   [](const ProfilePoint& p, const ProfilePoint& q) { return p.s < q.s; });

  // The tracked boundary trajectory is the accumulation point of the
  // construction; other iterates only stand in when there is none.
  if (tracked) best = tracked;

  CriticalPointResult r;
  if (best) {
    r.hull = std::move(best->hull);
    r.energy = best->energy;
    r.residual_sup = best->residual;
    r.s_star = best->s;
  } else {
    const Trajectory& top = grid[arg];
    r.hull = top.final_hull;
    r.energy = energy(model, shifts, r.hull);
    r.residual_sup = top.final_residual;
    r.s_star = top.s;
  }
  r.barrier = r.energy - e_minus;
  r.converged = r.residual_sup <= opts.residual_tol;
  std::vector<double> below = HullFunction::difference(r.hull, h_minus);
  const std::vector<double> above = HullFunction::difference(h_plus, r.hull);
  for (std::size_t k = 0; k < below.size(); ++k) below[k] = std::min(below[k], above[k]);
  r.strict_fraction = strict_fraction_of(below);
  r.profile = std::move(profile);

  if (r.barrier > opts.barrier_tol) {
    r.pass_case = PassCase::barrier_positive;
    r.pattern = DegeneratePattern::none;
    return r;
  }
  r.pass_case = PassCase::degenerate;
  bool both = false;
  bool all_endpoints = true;
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const Trajectory& tr = grid[i];
    if (tr.closest_minus <= kSameLimit && tr.closest_plus <= kSameLimit) both = true;
    const bool at_end = sup_distance(tr.final_hull, h_minus) <= kSameLimit ||
                        sup_distance(tr.final_hull, h_plus) <= kSameLimit;
    all_endpoints = all_endpoints && at_end;
  }
  if (both) r.pattern = DegeneratePattern::alternative_a;
  else if (all_endpoints) r.pattern = DegeneratePattern::alternative_b;
  else r.pattern = DegeneratePattern::continuum;
  return r;
}

}  // namespace mather
