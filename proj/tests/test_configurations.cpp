#include <cmath>
#include <numbers>
#include <random>

#include "mather/configurations.hpp"
#include "mather/percival.hpp"
#include "mather/solvers.hpp"
#include "support.hpp"

using namespace mather;

namespace {

// Brute force over every (k, l) and every pair of valid sites: a pair with
// strictly opposite signs of u_{i+k} + l - u_i breaks the Birkhoff property.
bool brute_birkhoff_1d(const std::vector<double>& u, int k_range, int l_range) {
  const int n = static_cast<int>(u.size());
  for (int k = -k_range; k <= k_range; ++k)
    for (int l = -l_range; l <= l_range; ++l) {
      bool pos = false, neg = false;
      for (int i = 0; i < n; ++i) {
        if (i + k < 0 || i + k >= n) continue;
        const double d = u[i + k] + l - u[i];
        pos = pos || d > 0;
        neg = neg || d < 0;
      }
      if (pos && neg) return false;
    }
  return true;
}

ConfigurationWindow window_1d(const std::vector<double>& v) {
  std::vector<Lifted> e;
  for (double x : v) e.push_back(Lifted::from_double(x));
  return ConfigurationWindow(1, static_cast<std::int64_t>(v.size() / 2), e);
}

const MinimizerResult& half_coupling_minimizer() {
  static const MinimizerResult r = [] {
    SolveOptions o;
    o.residual_tol = 1e-10;
    return minimize(standard_fk(0.5), make_shiftset({test::kGolden}, 89), std::nullopt, o);
  }();
  return r;
}

constexpr double kGrid89 = 55.0 / 89.0;

}  // namespace

TEST_CASE("window layout") {
  const ConfigurationWindow w =
      ConfigurationWindow::generate(2, 2, [](const Site& i) { return 10.0 * i[1] + i[0]; });
  CHECK(w.size() == 25);
  CHECK(w.site(0) == Site{-2, -2});
  CHECK(w.site(1) == Site{-1, -2});
  const Site s{1, -1};
  CHECK(w.at(s) == 10.0 * -1 + 1);
  CHECK(w.index(s) == 1 * 5 + 3);
  CHECK_FALSE(w.contains(Site{3, 0}));
  CHECK(test::error_code_of([] { ConfigurationWindow(1, 2, std::vector<Lifted>(4)); }) ==
        Errc::invalid_argument);
  CHECK(test::error_code_of([] {
          ConfigurationWindow(1, 0, {Lifted{std::numeric_limits<double>::quiet_NaN(), 0}});
        }) == Errc::invalid_argument);
}

TEST_CASE("sample_configuration") {
  const HullFunction id = HullFunction::identity(10);
  const std::vector<double> half{0.5};
  const ConfigurationWindow u = sample_configuration(id, half, 2, 0.0);
  CHECK(u.size() == 5);
  const std::vector<double> want{-1, -0.5, 0, 0.5, 1};
  for (std::size_t n = 0; n < 5; ++n) CHECK(u.values()[n].value() == want[n]);

  const ConfigurationWindow v = sample_configuration(id, half, 2, 1.0);
  for (std::size_t n = 0; n < 5; ++n) {
    CHECK(v.values()[n].frac == u.values()[n].frac);
    CHECK(v.values()[n].whole == u.values()[n].whole + 1);
  }

  const std::vector<double> w2{0.3, 0.7};
  const ConfigurationWindow d2 = sample_configuration(id, w2, 2, 0.0);
  CHECK(d2.at(Site{1, 1}) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("rotation_vector") {
  const ConfigurationWindow aff =
      ConfigurationWindow::generate(1, 6, [](const Site& i) { return 0.5 * i[0] + 3.0; });
  const RotationEstimate r = rotation_vector(aff);
  CHECK(r.omega_hat == std::vector<double>{0.5});
  CHECK(r.max_deviation == 0.0);

  const ConfigurationWindow sq =
      ConfigurationWindow::generate(1, 6, [](const Site& i) { return double(i[0] * i[0]); });
  CHECK(rotation_vector(sq).max_deviation > 2.0);

  const ConfigurationWindow small =
      ConfigurationWindow::generate(1, 3, [](const Site& i) { return double(i[0]); });
  CHECK(test::error_code_of([&] { rotation_vector(small); }) == Errc::window_too_small);

  const MinimizerResult& m = half_coupling_minimizer();
  const std::vector<double> w{kGrid89};
  for (std::int64_t R : {8, 16, 32}) {
    const RotationEstimate e = rotation_vector(sample_configuration(m.hull, w, R, 0.0));
    CHECK(std::abs(e.omega_hat[0] - kGrid89) <= 2.0 / static_cast<double>(R));
    CHECK(e.max_deviation <= 2.0);
  }
}

TEST_CASE("birkhoff_check examples") {
  const ConfigurationWindow aff =
      ConfigurationWindow::generate(1, 6, [](const Site& i) { return 0.5 * i[0]; });
  CHECK(birkhoff_check(aff, 2, 2).passed);

  const CertificateReport ok = birkhoff_check(window_1d({0, 0.4, 1.2}), 1, 1);
  CHECK(ok.passed);
  CHECK(ok.margin == 0.0);

  const CertificateReport bad = birkhoff_check(window_1d({0, 1, 0.5}), 1, 1);
  CHECK_FALSE(bad.passed);
  REQUIRE_FALSE(bad.witnesses.empty());
  bool found = false;
  for (const Witness& w : bad.witnesses) found = found || (w.k == Site{1} && w.l == 0);
  CHECK(found);
  CHECK(bad.margin > 0.0);

  CHECK(test::error_code_of([&] { birkhoff_check(window_1d({0, 1, 2}), 3, 1); }) ==
        Errc::window_too_small);
}

TEST_CASE("birkhoff_check agrees with brute force on random windows") {
  std::mt19937_64 rng(60);
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  int failures = 0;
  for (int n = 0; n < 300; ++n) {
    std::vector<double> v(9);
    for (int i = 0; i < 9; ++i) v[i] = 0.4 * (i - 4) + jitter(rng);
    const bool lib = birkhoff_check(window_1d(v), 3, 2).passed;
    CHECK(lib == brute_birkhoff_1d(v, 3, 2));
    failures += lib ? 0 : 1;
  }
  CHECK(failures > 0);
  CHECK(failures < 300);
}

TEST_CASE("omega_birkhoff_check") {
  std::mt19937_64 rng(62);
  std::uniform_real_distribution<double> ph(-2.0, 2.0);
  const std::vector<double> w{kGrid89};
  for (int n = 0; n < 20; ++n) {
    const ConfigurationWindow u = sample_configuration(random_monotone(89, rng), w, 10, ph(rng));
    const CertificateReport ob = omega_birkhoff_check(u, w, 3, 3, 0.0);
    CHECK(ob.passed);
    CHECK(birkhoff_check(u, 3, 3).passed);
  }
  const std::vector<double> half{0.5};
  const ConfigurationWindow aff =
      ConfigurationWindow::generate(1, 6, [](const Site& i) { return 0.5 * i[0]; });
  CHECK(omega_birkhoff_check(aff, half, 2, 2, 0.0).passed);

  // rotation 1/2 and Birkhoff, but u_{i+2} - 1 != u_i: not of hull form
  const ConfigurationWindow het = ConfigurationWindow::generate(
      1, 8, [](const Site& i) { return 0.5 * i[0] + 0.1 * std::tanh(i[0] / 4.0); });
  CHECK(birkhoff_check(het, 3, 3).passed);
  const CertificateReport fail = omega_birkhoff_check(het, half, 3, 3, 0.0);
  CHECK_FALSE(fail.passed);
  bool found = false;
  for (const Witness& x : fail.witnesses) found = found || (x.k == Site{2} && x.l == -1);
  CHECK(found);
  CHECK(fail.margin > 0.0);
}

TEST_CASE("hull_from_configuration") {
  const std::vector<double> w{0.375};
  const ConfigurationWindow u =
      ConfigurationWindow::generate(1, 8, [](const Site& i) { return 0.375 * i[0]; });
  const HullReconstruction r = hull_from_configuration(u, w, 8);
  CHECK(test::bit_equal(r.hull, HullFunction::identity(8)));

  std::mt19937_64 rng(64);
  std::uniform_int_distribution<int> p(-200, 200);
  const std::vector<double> g{kGrid89};
  for (int n = 0; n < 20; ++n) {
    const HullFunction h = random_monotone(89, rng);
    const double phase = p(rng) / 89.0;
    const ConfigurationWindow a = sample_configuration(h, g, 12, phase);
    const HullReconstruction rec = hull_from_configuration(a, g, 89);
    CHECK(rec.hull.monotone());
    const ConfigurationWindow b = sample_configuration(rec.hull, g, 12, rec.phase);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const Lifted x = b.values()[i].plus(rec.offset);
      CHECK(x.frac == a.values()[i].frac);
      CHECK(x.whole == a.values()[i].whole);
    }
  }

  const std::vector<double> half{0.5};
  CHECK(test::error_code_of([&] { hull_from_configuration(window_1d({0, 1, 0.5}), half, 10); }) ==
        Errc::not_omega_birkhoff);
}

TEST_CASE("discrete_el_residual") {
  const ConfigurationWindow aff =
      ConfigurationWindow::generate(1, 4, [](const Site& i) { return 0.5 * i[0]; });
  for (std::int64_t i = -3; i <= 3; ++i) CHECK(discrete_el_residual(standard_fk(0.0), aff, Site{i}) == 0.0);
  CHECK(discrete_el_residual(standard_fk(1.5), aff, Site{0}) == 0.0);

  const ConfigurationWindow quarter =
      ConfigurationWindow::generate(1, 4, [](const Site& i) { return 0.25 * i[0]; });
  CHECK(discrete_el_residual(standard_fk(1.5), quarter, Site{1}) ==
        doctest::Approx(1.5 / (2 * std::numbers::pi)).epsilon(1e-14));
  CHECK(test::error_code_of([&] { discrete_el_residual(standard_fk(1.0), aff, Site{4}); }) ==
        Errc::window_too_small);
}

TEST_CASE("discrete_el_residual reproduces el_residual of the hull exactly") {
  const MinimizerResult& m = half_coupling_minimizer();
  const Model model = standard_fk(0.5);
  const ShiftSet s = make_shiftset({test::kGolden}, 89);
  const ResidualField x = el_residual(model, s, m.hull);
  const std::vector<double> w{kGrid89};
  for (std::int64_t p : {0, 13, -40}) {
    const ConfigurationWindow u = sample_configuration(m.hull, w, 16, p / 89.0);
    for (std::int64_t i = -15; i <= 15; ++i) {
      const std::int64_t k = ((p + 55 * i) % 89 + 89) % 89;
      CHECK(discrete_el_residual(model, u, Site{i}) == x.values[static_cast<std::size_t>(k)]);
    }
    const CertificateReport el = discrete_el_check(model, u, 1e-9);
    CHECK(el.passed);
  }
}

TEST_CASE("ground_state_test") {
  const ConfigurationWindow aff =
      ConfigurationWindow::generate(1, 6, [](const Site& i) { return kGrid89 * i[0]; });
  const CertificateReport ok = ground_state_test(standard_fk(0.0), aff, 3, 200, 0.5, 1);
  CHECK(ok.passed);
  CHECK(ok.margin >= -1e-10);

  std::vector<Lifted> moved = aff.values();
  moved[aff.index(Site{1})] = Lifted::from_double(aff.at(Site{1}) + 0.3);
  const ConfigurationWindow bad(1, 6, moved);
  const CertificateReport no = ground_state_test(standard_fk(0.0), bad, 3, 200, 0.5, 1);
  CHECK_FALSE(no.passed);
  CHECK(no.margin < 0.0);
  bool relaxed = false;
  for (const Witness& w : no.witnesses) relaxed = relaxed || w.kind == "coordinate_descent";
  CHECK(relaxed);

  const ConfigurationWindow u = sample_configuration(half_coupling_minimizer().hull,
                                                     std::vector<double>{kGrid89}, 16, 0.0);
  const CertificateReport gs = ground_state_test(standard_fk(0.5), u, 3, 1000, 0.5, 7);
  CHECK(gs.passed);
  CHECK(gs.margin >= -1e-10);
  const CertificateReport again = ground_state_test(standard_fk(0.5), u, 3, 1000, 0.5, 7);
  CHECK(again.margin == gs.margin);

  CHECK(test::error_code_of([&] { ground_state_test(standard_fk(0.0), aff, 6, 10, 0.5, 1); }) ==
        Errc::window_too_small);
}
