#include "mather/hull.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mather/errors.hpp"
#include "mather/numerics.hpp"

namespace mather {

namespace {

void require_same_grid(const HullFunction& h, const HullFunction& g) {
  if (h.size() != g.size()) {
    throw Error(Errc::grid_mismatch, "grid sizes " + std::to_string(h.size()) + " and " +
                                         std::to_string(g.size()) + " differ");
  }
}

bool check_monotone(std::span<const Lifted> e) {
  const std::size_t n = e.size();
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (!e[k].less_equal(e[k + 1])) return false;
  }
  return n == 0 || e[n - 1].less_equal(e[0].plus(1));
}

struct Point {
  double x;
  double y;
};

// Densified polyline through (k/N, h_k), k = 0..N-1, sorted by x.
std::vector<Point> densified_period(const HullFunction& h, double spacing) {
  const std::size_t n = h.size();
  const double dx = 1.0 / static_cast<double>(n);
  std::vector<Point> pts;
  pts.reserve(4 * n);
  for (std::size_t k = 0; k < n; ++k) {
    const double x0 = static_cast<double>(k) * dx;
    const double y0 = h[k];
    const double dy = h.entry(k).offset_to(h.lifted(static_cast<std::int64_t>(k) + 1));
    const double len = std::hypot(dx, dy);
    const auto pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / spacing)));
    for (std::size_t i = 0; i < pieces; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(pieces);
      pts.push_back({x0 + t * dx, y0 + t * dy});
    }
  }
  return pts;
}

// sup over a of dist(a, B + periodic images), B sorted by x.
double directed_distance(const std::vector<Point>& a, const std::vector<Point>& b_sorted) {
  double worst = 0.0;
  for (const Point& p : a) {
    auto it = std::lower_bound(b_sorted.begin(), b_sorted.end(), p.x,
                               [](const Point& q, double x) { return q.x < x; });
    double best = std::numeric_limits<double>::infinity();
    for (auto r = it; r != b_sorted.end(); ++r) {
      const double ddx = r->x - p.x;
      if (ddx * ddx >= best) break;
      best = std::min(best, ddx * ddx + (r->y - p.y) * (r->y - p.y));
    }
    for (auto l = it; l != b_sorted.begin();) {
      --l;
      const double ddx = p.x - l->x;
      if (ddx * ddx >= best) break;
      best = std::min(best, ddx * ddx + (l->y - p.y) * (l->y - p.y));
    }
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

std::vector<Point> periodic_images(const std::vector<Point>& period, std::int64_t width) {
  std::vector<Point> out;
  out.reserve(period.size() * static_cast<std::size_t>(2 * width + 1));
  for (std::int64_t s = -width; s <= width; ++s) {
    const double shift = static_cast<double>(s);
    for (const Point& p : period) out.push_back({p.x + shift, p.y + shift});
  }
  return out;
}

// Linear pool-adjacent-violators; returns fitted values.
std::vector<double> pav(std::span<const double> y) {
  struct Block {
    double sum;
    double count;
    std::size_t len;
  };
  std::vector<Block> blocks;
  blocks.reserve(y.size());
  for (double v : y) {
    blocks.push_back({v, 1.0, 1});
    while (blocks.size() > 1) {
      const Block& b = blocks.back();
      const Block& a = blocks[blocks.size() - 2];
      if (a.sum / a.count <= b.sum / b.count) break;
      Block merged{a.sum + b.sum, a.count + b.count, a.len + b.len};
      blocks.pop_back();
      blocks.back() = merged;
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (const Block& b : blocks) {
    if (b.len == 1) {
      out.push_back(b.sum);
    } else {
      out.insert(out.end(), b.len, b.sum / b.count);
    }
  }
  return out;
}

}  // namespace

HullFunction::HullFunction(std::vector<Lifted> entries)
    : entries_(std::move(entries)), monotone_(check_monotone(entries_)) {}

HullFunction HullFunction::from_values(std::span<const double> values) {
  std::vector<Lifted> e;
  e.reserve(values.size());
  for (double v : values) e.push_back(Lifted::from_double(v));
  return HullFunction(std::move(e));
}

HullFunction HullFunction::identity(std::size_t N) {
  std::vector<Lifted> e(N);
  for (std::size_t k = 0; k < N; ++k) e[k] = {static_cast<double>(k) / static_cast<double>(N), 0};
  return HullFunction(std::move(e));
}

Lifted HullFunction::lifted(std::int64_t k) const {
  const auto n = static_cast<std::int64_t>(entries_.size());
  const std::int64_t carry = floor_div(k, n);
  return entries_[static_cast<std::size_t>(k - carry * n)].plus(carry);
}

std::vector<double> HullFunction::values() const {
  std::vector<double> v;
  v.reserve(entries_.size());
  for (const auto& e : entries_) v.push_back(e.value());
  return v;
}

HullFunction HullFunction::plus_integer(std::int64_t n) const {
  std::vector<Lifted> e(entries_);
  for (auto& x : e) x.whole += n;
  HullFunction out;
  out.entries_ = std::move(e);
  out.monotone_ = monotone_;
  return out;
}

HullFunction HullFunction::rotated(std::int64_t p) const {
  std::vector<Lifted> e(entries_.size());
  for (std::size_t k = 0; k < e.size(); ++k) e[k] = lifted(static_cast<std::int64_t>(k) + p);
  HullFunction out;
  out.entries_ = std::move(e);
  out.monotone_ = monotone_;
  return out;
}

HullFunction HullFunction::displaced(std::span<const double> delta, double scale) const {
  if (delta.size() != entries_.size()) {
    throw Error(Errc::grid_mismatch, "displacement length does not match grid");
  }
  std::vector<Lifted> e(entries_);
  for (std::size_t k = 0; k < e.size(); ++k) e[k].frac += scale * delta[k];
  return HullFunction(std::move(e));
}

std::vector<double> HullFunction::difference(const HullFunction& h, const HullFunction& g) {
  require_same_grid(h, g);
  std::vector<double> d(h.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = g.entry(k).offset_to(h.entry(k));
  return d;
}

std::int64_t grid_index(std::size_t N, double theta) {
  const double x = theta * static_cast<double>(N);
  const double r = std::nearbyint(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<std::int64_t>(r);
  return static_cast<std::int64_t>(std::ceil(x));
}

Lifted eval_lifted(const HullFunction& h, double theta) {
  return h.lifted(grid_index(h.size(), theta));
}

double eval(const HullFunction& h, double theta) { return eval_lifted(h, theta).value(); }

HullFunction meet(const HullFunction& h, const HullFunction& g) {
  require_same_grid(h, g);
  std::vector<Lifted> e(h.size());
  for (std::size_t k = 0; k < e.size(); ++k) {
    e[k] = g.entry(k).less(h.entry(k)) ? g.entry(k) : h.entry(k);
  }
  return HullFunction(std::move(e));
}

HullFunction join(const HullFunction& h, const HullFunction& g) {
  require_same_grid(h, g);
  std::vector<Lifted> e(h.size());
  for (std::size_t k = 0; k < e.size(); ++k) {
    e[k] = h.entry(k).less(g.entry(k)) ? g.entry(k) : h.entry(k);
  }
  return HullFunction(std::move(e));
}

double sup_distance(const HullFunction& h, const HullFunction& g) {
  double d = 0.0;
  for (double x : HullFunction::difference(h, g)) d = std::max(d, std::abs(x));
  return d;
}

double graph_distance(const HullFunction& h, const HullFunction& g) {
  require_same_grid(h, g);
  if (!h.monotone() || !g.monotone()) {
    throw Error(Errc::not_monotone, "graph distance needs monotone hulls");
  }
  if (h.size() == 0) return 0.0;
  const double spacing = 0.25 / static_cast<double>(h.size());
  const auto hp = densified_period(h, spacing);
  const auto gp = densified_period(g, spacing);
  // A nearest point is never further away horizontally than the vertical gap.
  const auto width = static_cast<std::int64_t>(std::ceil(sup_distance(h, g))) + 1;
  const auto himg = periodic_images(hp, width);
  const auto gimg = periodic_images(gp, width);
  return std::max(directed_distance(hp, gimg), directed_distance(gp, himg));
}

HullFunction monotone_envelope(const HullFunction& h) {
  const auto n = static_cast<std::int64_t>(h.size());
  std::vector<Lifted> out(h.size());
  if (n == 0) return HullFunction(std::move(out));
  Lifted running = h.lifted(2 * n - 1);
  for (std::int64_t j = 2 * n - 1; j >= 0; --j) {
    const Lifted v = h.lifted(j);
    if (v.less(running)) running = v;
    if (j < n) out[static_cast<std::size_t>(j)] = running;
  }
  return HullFunction(std::move(out));
}

HullFunction project_monotone(const HullFunction& h) {
  if (h.monotone()) return h;
  const auto n = static_cast<std::int64_t>(h.size());
  // Some wrap constraint is inactive at the cyclic optimum; cutting the
  // circle there turns the problem into ordinary isotonic regression.
  std::vector<std::int64_t> cuts;
  cuts.push_back(n - 1);
  for (std::int64_t c = 0; c + 1 < n; ++c) cuts.push_back(c);

  std::vector<double> fitted;
  std::vector<double> observed;
  std::int64_t chosen = -1;
  std::int64_t base = 0;
  for (std::int64_t c : cuts) {
    const Lifted first = h.lifted(c + 1);
    std::vector<double> y(h.size());
    for (std::int64_t i = 0; i < n; ++i) {
      y[static_cast<std::size_t>(i)] = first.reduce(h.lifted(c + 1 + i));
    }
    auto x = pav(y);
    if (x.back() <= x.front() + 1.0 + 1e-12) {
      fitted = std::move(x);
      observed = std::move(y);
      chosen = c;
      base = first.whole;
      break;
    }
  }
  if (chosen < 0) {
    // Numerically no cut was feasible; fall back to the envelope of the
    // natural cut's fit, which is monotone by construction.
    const Lifted first = h.lifted(0);
    std::vector<double> y(h.size());
    for (std::int64_t i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = first.reduce(h.lifted(i));
    const auto x = pav(y);
    std::vector<Lifted> e(h.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = Lifted::from_double(x[i]).plus(first.whole);
    return monotone_envelope(HullFunction(std::move(e)));
  }

  std::vector<Lifted> e(h.size());
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t idx = chosen + 1 + i;
    const std::int64_t carry = floor_div(idx, n);
    const auto slot = static_cast<std::size_t>(idx - carry * n);
    const auto ii = static_cast<std::size_t>(i);
    // Entries PAV left alone keep their exact representation.
    e[slot] = fitted[ii] == observed[ii] ? h.entry(slot)
                                         : Lifted::from_double(fitted[ii]).plus(base - carry);
  }
  return HullFunction(std::move(e));
}

std::int64_t normalization_shift(const HullFunction& h) {
  const auto n = static_cast<std::int64_t>(h.size());
  if (n == 0) return 0;
  const Lifted zero{0.0, 0};
  std::int64_t period = static_cast<std::int64_t>(std::floor(-h.entry(0).value()));
  // h_{period * n} = h_0 + period <= 0; guard against rounding in the floor.
  while (!h.lifted(period * n).less_equal(zero)) --period;
  while (h.lifted((period + 1) * n).less_equal(zero)) ++period;
  std::int64_t p = period * n;
  for (std::int64_t k = period * n + n - 1; k > period * n; --k) {
    if (h.lifted(k).less_equal(zero)) {
      p = k;
      break;
    }
  }
  return p;
}

HullFunction normalize(const HullFunction& h) { return h.rotated(normalization_shift(h)); }

GapReport detect_gaps(const HullFunction& h, double threshold) {
  GapReport report;
  const auto n = static_cast<std::int64_t>(h.size());
  for (std::int64_t k = 0; k < n; ++k) {
    const double d = h.entry(static_cast<std::size_t>(k)).offset_to(h.lifted(k + 1));
    report.largest_gap = std::max(report.largest_gap, d);
    if (d > threshold) report.gaps.push_back({static_cast<std::size_t>(k), d});
  }
  std::stable_sort(report.gaps.begin(), report.gaps.end(),
                   [](const Gap& a, const Gap& b) { return a.size > b.size; });
  for (const Gap& g : report.gaps) report.total_variation_in_jumps += g.size;
  return report;
}

HullFunction random_monotone(std::size_t N, std::mt19937_64& rng) {
  std::exponential_distribution<double> incr(1.0);
  std::uniform_real_distribution<double> offset(-0.5, 0.5);
  std::vector<double> w(N);
  for (auto& x : w) x = incr(rng);
  double total = 0.0;
  for (double x : w) total += x;
  const double c = offset(rng);
  std::vector<double> v(N);
  double acc = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    v[k] = c + acc / total;
    acc += w[k];
  }
  return HullFunction::from_values(v);
}

}  // namespace mather
