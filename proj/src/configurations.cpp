#include "mather/configurations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "mather/errors.hpp"
#include "mather/numerics.hpp"
#include "mather/parallel.hpp"

namespace mather {

namespace {

constexpr std::size_t kMaxBox = std::size_t{1} << 26;
constexpr double kOrderTol = 1e-10;
constexpr double kActionTol = 1e-10;

void require_dim(const ConfigurationWindow& u, std::size_t d, const char* what) {
  if (d != u.dim()) {
    throw Error(Errc::invalid_argument, std::string(what) + " has dimension " + std::to_string(d) +
                                            " but the window has dimension " +
                                            std::to_string(u.dim()));
  }
}

double dot(std::span<const double> omega, std::span<const std::int64_t> i) {
  double s = 0.0;
  for (std::size_t j = 0; j < omega.size(); ++j) s += omega[j] * static_cast<double>(i[j]);
  return s;
}

// All k with |k|_inf <= range.
std::vector<Site> offsets(std::size_t dim, std::int64_t range) {
  std::vector<Site> out;
  const std::size_t count = ConfigurationWindow::box_size(dim, range);
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) out.push_back(ConfigurationWindow::site_of(dim, range, n));
  return out;
}

Site shifted(const Site& i, const Site& k) {
  Site out(i.size());
  for (std::size_t j = 0; j < i.size(); ++j) out[j] = i[j] + k[j];
  return out;
}

Site unit(std::size_t dim, std::size_t j, std::int64_t sign) {
  Site e(dim, 0);
  e[j] = sign;
  return e;
}

std::int64_t norm_inf(const Site& i) {
  std::int64_t m = 0;
  for (auto x : i) m = std::max(m, x < 0 ? -x : x);
  return m;
}

// Range of u_{i+k} - u_i over the valid i, with the extreme sites.
struct OffsetRange {
  bool any = false;
  double lo = 0.0, hi = 0.0;
  Site at_lo, at_hi;
};

OffsetRange offset_range(const ConfigurationWindow& u, const Site& k) {
  OffsetRange r;
  r.lo = std::numeric_limits<double>::infinity();
  r.hi = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < u.size(); ++n) {
    const Site i = u.site(n);
    const Site ik = shifted(i, k);
    if (!u.contains(ik)) continue;
    const double o = u.values()[n].offset_to(u.lifted(ik));
    r.any = true;
    if (o < r.lo) {
      r.lo = o;
      r.at_lo = i;
    }
    if (o > r.hi) {
      r.hi = o;
      r.at_hi = i;
    }
  }
  return r;
}

void check_ranges(const ConfigurationWindow& u, std::int64_t k_range, std::int64_t l_range) {
  if (k_range < 0 || l_range < 0) throw Error(Errc::invalid_argument, "ranges must be >= 0");
  if (k_range > 2 * u.radius()) {
    throw Error(Errc::window_too_small, "k_range " + std::to_string(k_range) +
                                            " exceeds the window diameter " +
                                            std::to_string(2 * u.radius()));
  }
}

std::string range_scope(const ConfigurationWindow& u, std::int64_t k_range, std::int64_t l_range) {
  return "radius=" + std::to_string(u.radius()) + " k_range=" + std::to_string(k_range) +
         " l_range=" + std::to_string(l_range);
}

void add_witness(CertificateReport& r, Witness w) {
  if (r.witnesses.size() < CertificateReport::kMaxWitnesses) r.witnesses.push_back(std::move(w));
  r.passed = false;
}

}  // namespace

ConfigurationWindow::ConfigurationWindow(std::size_t dim, std::int64_t radius,
                                         std::vector<Lifted> values,
                                         std::optional<std::vector<double>> omega_hint)
    : dim_(dim), radius_(radius), values_(std::move(values)), omega_hint_(std::move(omega_hint)) {
  if (dim == 0) throw Error(Errc::invalid_argument, "window dimension must be >= 1");
  if (radius < 0) throw Error(Errc::invalid_argument, "window radius must be >= 0");
  if (values_.size() != box_size(dim, radius)) {
    throw Error(Errc::invalid_argument, "window needs " + std::to_string(box_size(dim, radius)) +
                                            " values, got " + std::to_string(values_.size()));
  }
  for (const auto& v : values_) {
    if (!std::isfinite(v.frac)) throw Error(Errc::invalid_argument, "non-finite window value");
  }
  if (omega_hint_ && omega_hint_->size() != dim) {
    throw Error(Errc::invalid_argument, "omega_hint dimension differs from the window");
  }
}

std::size_t ConfigurationWindow::box_size(std::size_t dim, std::int64_t radius) {
  const auto side = static_cast<std::size_t>(2 * radius + 1);
  std::size_t n = 1;
  for (std::size_t j = 0; j < dim; ++j) {
    if (n > kMaxBox / side) throw Error(Errc::invalid_argument, "window too large");
    n *= side;
  }
  return n;
}

Site ConfigurationWindow::site_of(std::size_t dim, std::int64_t radius, std::size_t flat) {
  const auto side = static_cast<std::size_t>(2 * radius + 1);
  Site i(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    i[j] = static_cast<std::int64_t>(flat % side) - radius;
    flat /= side;
  }
  return i;
}

bool ConfigurationWindow::contains(std::span<const std::int64_t> i) const {
  if (i.size() != dim_) return false;
  return std::all_of(i.begin(), i.end(), [&](std::int64_t x) { return x >= -radius_ && x <= radius_; });
}

std::size_t ConfigurationWindow::index(std::span<const std::int64_t> i) const {
  if (!contains(i)) throw Error(Errc::window_too_small, "site outside the window");
  const auto side = static_cast<std::size_t>(2 * radius_ + 1);
  std::size_t flat = 0;
  for (std::size_t j = dim_; j-- > 0;) flat = flat * side + static_cast<std::size_t>(i[j] + radius_);
  return flat;
}

const char* to_string(CertificateKind k) noexcept {
  switch (k) {
    case CertificateKind::birkhoff: return "birkhoff";
    case CertificateKind::omega_birkhoff: return "omega_birkhoff";
    case CertificateKind::ground_state: return "ground_state";
    case CertificateKind::discrete_el: return "discrete_el";
  }
  return "birkhoff";
}

ConfigurationWindow sample_configuration(const HullFunction& h, std::span<const double> omega,
                                         std::int64_t radius, double phase) {
  if (omega.empty()) throw Error(Errc::invalid_argument, "omega is empty");
  if (h.size() == 0) throw Error(Errc::invalid_argument, "empty hull");
  const std::size_t count = ConfigurationWindow::box_size(omega.size(), radius);
  std::vector<Lifted> v(count);
  for (std::size_t n = 0; n < count; ++n) {
    const Site i = ConfigurationWindow::site_of(omega.size(), radius, n);
    v[n] = eval_lifted(h, phase + dot(omega, i));
  }
  return ConfigurationWindow(omega.size(), radius, std::move(v),
                             std::vector<double>(omega.begin(), omega.end()));
}

RotationEstimate rotation_vector(const ConfigurationWindow& u) {
  if (u.radius() < 4) {
    throw Error(Errc::window_too_small, "rotation_vector needs radius >= 4, got " +
                                            std::to_string(u.radius()));
  }
  const std::size_t d = u.dim();
  const std::int64_t n = u.radius();
  RotationEstimate r;
  for (std::size_t j = 0; j < d; ++j) {
    const Lifted& back = u.lifted(unit(d, j, -n));
    const Lifted& front = u.lifted(unit(d, j, n));
    r.omega_hat.push_back(back.offset_to(front) / static_cast<double>(2 * n));
  }
  std::vector<double> worst(u.size(), 0.0);
  parallel_for(u.size(), [&](std::size_t a) {
    const Site i = u.site(a);
    double w = 0.0;
    for (std::size_t b = 0; b < u.size(); ++b) {
      const Site k = u.site(b);
      double pred = 0.0;
      for (std::size_t j = 0; j < d; ++j) pred += r.omega_hat[j] * static_cast<double>(k[j] - i[j]);
      w = std::max(w, std::abs(u.values()[a].offset_to(u.values()[b]) - pred));
    }
    worst[a] = w;
  });
  r.max_deviation = *std::max_element(worst.begin(), worst.end());
  return r;
}

CertificateReport birkhoff_check(const ConfigurationWindow& u, std::int64_t k_range,
                                 std::int64_t l_range) {
  check_ranges(u, k_range, l_range);
  const auto ks = offsets(u.dim(), k_range);
  std::vector<OffsetRange> ranges(ks.size());
  parallel_for(ks.size(), [&](std::size_t a) { ranges[a] = offset_range(u, ks[a]); });

  CertificateReport r;
  r.kind = CertificateKind::birkhoff;
  r.scope = range_scope(u, k_range, l_range);
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < ks.size(); ++a) {
    const OffsetRange& o = ranges[a];
    if (!o.any) continue;
    for (std::int64_t l = -l_range; l <= l_range; ++l) {
      const double lo = o.lo + static_cast<double>(l);
      const double hi = o.hi + static_cast<double>(l);
      if (!(lo < 0.0 && hi > 0.0)) continue;
      const double mag = std::min(hi, -lo);
      margin = std::min(margin, mag);
      add_witness(r, {"mixed_sign", ks[a], l, hi < -lo ? o.at_hi : o.at_lo, -1, mag});
    }
  }
  r.margin = r.passed ? 0.0 : margin;
  return r;
}

CertificateReport omega_birkhoff_check(const ConfigurationWindow& u, std::span<const double> omega,
                                       std::int64_t k_range, std::int64_t l_range, double tol) {
  require_dim(u, omega.size(), "omega");
  check_ranges(u, k_range, l_range);
  if (!(tol >= 0.0)) throw Error(Errc::invalid_argument, "tol must be >= 0");
  const auto ks = offsets(u.dim(), k_range);
  std::vector<OffsetRange> ranges(ks.size());
  parallel_for(ks.size(), [&](std::size_t a) { ranges[a] = offset_range(u, ks[a]); });

  CertificateReport r;
  r.kind = CertificateKind::omega_birkhoff;
  r.scope = range_scope(u, k_range, l_range) + " tol=" + std::to_string(tol);
  double worst = 0.0;
  for (std::size_t a = 0; a < ks.size(); ++a) {
    const OffsetRange& o = ranges[a];
    if (!o.any) continue;
    const double wk = dot(omega, ks[a]);
    for (std::int64_t l = -l_range; l <= l_range; ++l) {
      const double w = wk + static_cast<double>(l);
      const double lo = o.lo + static_cast<double>(l);
      const double hi = o.hi + static_cast<double>(l);
      if (w >= 0.0 && lo < -tol) {
        worst = std::max(worst, -tol - lo);
        add_witness(r, {"order_up", ks[a], l, o.at_lo, -1, lo});
      }
      if (w <= 0.0 && hi > tol) {
        worst = std::max(worst, hi - tol);
        add_witness(r, {"order_down", ks[a], l, o.at_hi, -1, hi});
      }
    }
  }
  r.margin = worst;
  return r;
}

HullReconstruction hull_from_configuration(const ConfigurationWindow& u,
                                           std::span<const double> omega, std::int64_t N) {
  require_dim(u, omega.size(), "omega");
  if (N < 2) throw Error(Errc::invalid_argument, "N must be >= 2");
  const std::int64_t offset = u.lifted(Site(u.dim(), 0)).whole;

  // grid slot -> u_i - q - offset, where omega . i sits at slot + q N
  std::map<std::int64_t, Lifted> points;
  for (std::size_t n = 0; n < u.size(); ++n) {
    const std::int64_t idx = grid_index(static_cast<std::size_t>(N), dot(omega, u.site(n)));
    const std::int64_t q = floor_div(idx, N);
    const Lifted y = u.values()[n].plus(-q - offset);
    auto [it, fresh] = points.emplace(idx - q * N, y);
    if (!fresh && std::abs(it->second.offset_to(y)) > kOrderTol) {
      throw Error(Errc::not_omega_birkhoff, "two sites at the same phase disagree");
    }
  }
  for (auto it = points.begin(); std::next(it) != points.end(); ++it) {
    if (std::next(it)->second.offset_to(it->second) > kOrderTol) {
      throw Error(Errc::not_omega_birkhoff, "values decrease in the phase order");
    }
  }
  if (points.begin()->second.plus(1).offset_to(points.rbegin()->second) > kOrderTol) {
    throw Error(Errc::not_omega_birkhoff, "values exceed the lift across the period");
  }

  std::vector<Lifted> e(static_cast<std::size_t>(N));
  auto next = points.begin();
  for (std::int64_t k = 0; k < N; ++k) {
    while (next != points.end() && next->first < k) ++next;
    e[static_cast<std::size_t>(k)] =
        next != points.end() ? next->second : points.begin()->second.plus(1);
  }
  HullFunction h(std::move(e));
  const std::int64_t p = normalization_shift(h);
  return {h.rotated(p), -static_cast<double>(p) / static_cast<double>(N), offset};
}

double discrete_el_residual(const Model& model, const ConfigurationWindow& u,
                            std::span<const std::int64_t> i) {
  require_dim(u, model.dim(), "model");
  const Site at(i.begin(), i.end());
  if (!u.contains(at)) throw Error(Errc::window_too_small, "site outside the window");
  const Lifted& here = u.lifted(at);
  double s = 0.0;
  for (std::size_t j = 0; j < model.dim(); ++j) {
    const Site fwd = shifted(at, unit(u.dim(), j, 1));
    const Site bwd = shifted(at, unit(u.dim(), j, -1));
    if (!u.contains(fwd) || !u.contains(bwd)) {
      throw Error(Errc::window_too_small, "neighbors of the site leave the window");
    }
    const auto& term = model.terms[j];
    s += term.d1(here.frac, here.reduce(u.lifted(fwd)));
    const Lifted& behind = u.lifted(bwd);
    s += term.d2(behind.frac, behind.reduce(here));
  }
  return s;
}

CertificateReport discrete_el_check(const Model& model, const ConfigurationWindow& u, double tol) {
  require_dim(u, model.dim(), "model");
  if (u.radius() < 1) throw Error(Errc::window_too_small, "no interior sites");
  CertificateReport r;
  r.kind = CertificateKind::discrete_el;
  r.scope = "interior sites, radius=" + std::to_string(u.radius()) + " tol=" + std::to_string(tol);
  double worst = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n) {
    const Site i = u.site(n);
    if (norm_inf(i) >= u.radius()) continue;
    const double x = discrete_el_residual(model, u, i);
    worst = std::max(worst, std::abs(x));
    if (std::abs(x) > tol) add_witness(r, {"site", {}, 0, i, -1, x});
  }
  r.margin = worst;
  return r;
}

namespace {

// One bond H_j(u_a, u_b) with b = a + e_j, touching the perturbation support.
struct Bond {
  std::size_t term;
  double x, y;   // reduced arguments
  long a, b;     // support slots, -1 when the site is held fixed
};

struct BoxAction {
  const Model& model;
  std::vector<Bond> bonds;
  std::vector<std::vector<std::size_t>> touching;  // support slot -> bonds

  double bond_delta(const Bond& bd, const std::vector<double>& phi) const {
    const double pa = bd.a >= 0 ? phi[static_cast<std::size_t>(bd.a)] : 0.0;
    const double pb = bd.b >= 0 ? phi[static_cast<std::size_t>(bd.b)] : 0.0;
    const auto& H = model.terms[bd.term].energy;
    return H(bd.x + pa, bd.y + pb) - H(bd.x, bd.y);
  }

  double delta(const std::vector<double>& phi) const {
    std::vector<double> t(bonds.size());
    for (std::size_t n = 0; n < bonds.size(); ++n) t[n] = bond_delta(bonds[n], phi);
    return pairwise_sum(t);
  }

  double local(std::size_t slot, const std::vector<double>& phi) const {
    double s = 0.0;
    for (std::size_t n : touching[slot]) s += bond_delta(bonds[n], phi);
    return s;
  }
};

}  // namespace

CertificateReport ground_state_test(const Model& model, const ConfigurationWindow& u,
                                    std::int64_t box, int trials, double amplitude,
                                    std::uint64_t seed) {
  require_dim(u, model.dim(), "model");
  if (box < 1) throw Error(Errc::invalid_argument, "box must be >= 1");
  if (trials < 0) throw Error(Errc::invalid_argument, "trials must be >= 0");
  if (!(amplitude >= 0.0)) throw Error(Errc::invalid_argument, "amplitude must be >= 0");
  if (box + 1 > u.radius()) {
    throw Error(Errc::window_too_small, "ground_state_test needs box + 1 <= radius");
  }
  const std::size_t d = u.dim();

  // support: |i|_inf < box
  std::vector<Site> support = offsets(d, box - 1);
  std::map<Site, long> slot;
  for (std::size_t n = 0; n < support.size(); ++n) slot.emplace(support[n], static_cast<long>(n));
  auto slot_of = [&](const Site& i) {
    auto it = slot.find(i);
    return it == slot.end() ? -1L : it->second;
  };

  BoxAction act{model, {}, std::vector<std::vector<std::size_t>>(support.size())};
  for (const Site& i : offsets(d, box)) {
    for (std::size_t j = 0; j < d; ++j) {
      const Site k = shifted(i, unit(d, j, 1));
      const long a = slot_of(i);
      const long b = slot_of(k);
      if (a < 0 && b < 0) continue;
      const Lifted& ua = u.lifted(i);
      act.bonds.push_back({j, ua.frac, ua.reduce(u.lifted(k)), a, b});
      const std::size_t id = act.bonds.size() - 1;
      if (a >= 0) act.touching[static_cast<std::size_t>(a)].push_back(id);
      if (b >= 0) act.touching[static_cast<std::size_t>(b)].push_back(id);
    }
  }

  CertificateReport r;
  r.kind = CertificateKind::ground_state;
  r.scope = "support |i|<" + std::to_string(box) + " trials=" + std::to_string(trials) +
            " amplitude=" + std::to_string(amplitude) + " seed=" + std::to_string(seed);

  std::vector<double> random_delta(static_cast<std::size_t>(trials));
  parallel_for(random_delta.size(), [&](std::size_t t) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(t)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> dist(-amplitude, amplitude);
    std::vector<double> phi(support.size());
    for (double& p : phi) p = dist(rng);
    random_delta[t] = act.delta(phi);
  });
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < random_delta.size(); ++t) {
    margin = std::min(margin, random_delta[t]);
    if (random_delta[t] < -kActionTol) {
      add_witness(r, {"random_trial", {}, 0, {}, static_cast<std::int64_t>(t), random_delta[t]});
    }
  }

  // coordinate descent from phi = 0 with damped 1D Newton steps
  std::vector<double> phi(support.size(), 0.0);
  for (int sweep = 0; sweep < 1000; ++sweep) {
    double gain = 0.0;
    double grad = 0.0;
    for (std::size_t s = 0; s < support.size(); ++s) {
      double g = 0.0, c = 0.0;
      for (std::size_t n : act.touching[s]) {
        const Bond& bd = act.bonds[n];
        const auto& term = model.terms[bd.term];
        const double x = bd.x + (bd.a >= 0 ? phi[static_cast<std::size_t>(bd.a)] : 0.0);
        const double y = bd.y + (bd.b >= 0 ? phi[static_cast<std::size_t>(bd.b)] : 0.0);
        if (bd.a == static_cast<long>(s)) {
          g += term.d1(x, y);
          c += term.d11(x, y);
        } else {
          g += term.d2(x, y);
          c += term.d22(x, y);
        }
      }
      grad = std::max(grad, std::abs(g));
      if (g == 0.0) continue;
      double step = c > 0.0 ? -g / c : -g;
      const double before = act.local(s, phi);
      const double keep = phi[s];
      for (int half = 0; half < 60; ++half, step *= 0.5) {
        phi[s] = keep + step;
        const double after = act.local(s, phi);
        if (after < before) {
          gain += before - after;
          break;
        }
        phi[s] = keep;
      }
    }
    if (gain < 1e-16 && grad < 1e-12) break;
  }
  const double relaxed = act.delta(phi);
  margin = std::min(margin, relaxed);
  if (relaxed < -kActionTol) {
    Site at;
    double big = 0.0;
    for (std::size_t s = 0; s < support.size(); ++s) {
      if (std::abs(phi[s]) > big) {
        big = std::abs(phi[s]);
        at = support[s];
      }
    }
    add_witness(r, {"coordinate_descent", {}, 0, at, -1, relaxed});
  }
  r.margin = margin;
  return r;
}

}  // namespace mather
