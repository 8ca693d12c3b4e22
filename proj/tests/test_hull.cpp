#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mather/hull.hpp"
#include "support.hpp"

using namespace mather;

namespace {

// Exact nearest distance from p to the segment [a, b].
double point_segment(double px, double py, double ax, double ay, double bx, double by) {
  const double dx = bx - ax, dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - ax - t * dx, py - ay - t * dy);
}

// Vertices of the graph polyline of h over theta in [lo, hi] (grid units),
// vertical segments appearing wherever consecutive values jump.
std::vector<std::pair<double, double>> polyline(const HullFunction& h, std::int64_t lo,
                                                std::int64_t hi) {
  const double N = static_cast<double>(h.size());
  std::vector<std::pair<double, double>> v;
  for (std::int64_t k = lo; k <= hi; ++k) v.push_back({static_cast<double>(k) / N, h.at(k)});
  return v;
}

// Hausdorff distance between two periodic graphs: points sampled densely on
// one period of each, nearest segment searched over three periods of the other.
double brute_graph_distance(const HullFunction& h, const HullFunction& g, int per_cell) {
  const auto n = static_cast<std::int64_t>(h.size());
  auto directed = [&](const HullFunction& a, const HullFunction& b) {
    const auto pa = polyline(a, 0, n);
    const auto pb = polyline(b, -n, 2 * n);
    double worst = 0.0;
    for (std::size_t s = 0; s + 1 < pa.size(); ++s) {
      for (int q = 0; q < per_cell; ++q) {
        const double t = static_cast<double>(q) / per_cell;
        const double px = pa[s].first + t * (pa[s + 1].first - pa[s].first);
        const double py = pa[s].second + t * (pa[s + 1].second - pa[s].second);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r + 1 < pb.size(); ++r)
          best = std::min(best, point_segment(px, py, pb[r].first, pb[r].second,
                                              pb[r + 1].first, pb[r + 1].second));
        worst = std::max(worst, best);
      }
    }
    return worst;
  };
  return std::max(directed(h, g), directed(g, h));
}

}  // namespace

TEST_CASE("eval on the identity grid follows the lift") {
  const HullFunction id = HullFunction::identity(4);
  CHECK(eval(id, 0.25) == 0.25);
  CHECK(eval(id, 1.25) == 1.25);
  CHECK(eval(id, -0.75) == -0.75);
  CHECK(eval(id, 0.3) == 0.5);  // left-continuous: next grid point up
  CHECK(eval(id, 0.0) == 0.0);
}

TEST_CASE("property: eval(h, theta + 1) - eval(h, theta) = 1 exactly") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> th(-3.0, 3.0);
  for (int n = 0; n < 20; ++n) {
    const HullFunction h = random_monotone(37, rng);
    for (int q = 0; q < 50; ++q) {
      const double t = th(rng);
      const Lifted a = eval_lifted(h, t), b = eval_lifted(h, t + 1.0);
      CHECK(b.frac == a.frac);
      CHECK(b.whole == a.whole + 1);
      CHECK(a.offset_to(b) == 1.0);
    }
  }
}

TEST_CASE("meet and join") {
  const HullFunction id = HullFunction::identity(16);
  const HullFunction up = test::shifted_identity(16, 0.5);
  CHECK(test::bit_equal(meet(id, up), id));
  CHECK(test::bit_equal(join(id, up), up));

  std::mt19937_64 rng(4);
  for (int n = 0; n < 50; ++n) {
    const HullFunction h = test::random_hull(16, rng), g = test::random_hull(16, rng);
    const HullFunction lo = meet(h, g), hi = join(h, g);
    for (std::size_t k = 0; k < 16; ++k) CHECK(lo[k] + hi[k] == h[k] + g[k]);
    CHECK(test::bit_equal(meet(h, join(h, g)), h));
    CHECK(test::bit_equal(join(h, meet(h, g)), h));
  }
  CHECK(test::error_code_of([] { meet(HullFunction::identity(3), HullFunction::identity(4)); }) ==
        Errc::grid_mismatch);
}

TEST_CASE("meet and join of monotone hulls are monotone") {
  std::mt19937_64 rng(6);
  for (int n = 0; n < 100; ++n) {
    const HullFunction h = random_monotone(20, rng), g = random_monotone(20, rng);
    CHECK(meet(h, g).monotone());
    CHECK(join(h, g).monotone());
  }
}

TEST_CASE("graph_distance of shifted identities") {
  const HullFunction a = HullFunction::identity(1024);
  const HullFunction b = test::shifted_identity(1024, 0.1);
  CHECK(graph_distance(a, a) == 0.0);
  CHECK(graph_distance(a, b) == doctest::Approx(0.1 / std::sqrt(2.0)).epsilon(1e-3 / 0.0707));
  CHECK(test::error_code_of([] {
          graph_distance(HullFunction::from_values(std::vector<double>{0.0, 0.5, 0.3, 0.8}),
                         HullFunction::identity(4));
        }) == Errc::not_monotone);
}

TEST_CASE("graph_distance agrees with a brute-force polyline oracle") {
  std::mt19937_64 rng(8);
  for (int n = 0; n < 10; ++n) {
    const HullFunction h = random_monotone(24, rng), g = random_monotone(24, rng);
    const double lib = graph_distance(h, g);
    const double ref = brute_graph_distance(h, g, 64);
    // both sample their point sets; spacing of either is below 1/(4N)
    CHECK(std::abs(lib - ref) <= 0.25 / 24.0);
  }
  // a jump against a ramp: the vertical segment is part of the graph
  std::vector<double> step(16, 0.0);
  for (std::size_t k = 8; k < 16; ++k) step[k] = 0.9;
  const HullFunction s = HullFunction::from_values(step);
  CHECK(std::abs(graph_distance(s, HullFunction::identity(16)) -
                 brute_graph_distance(s, HullFunction::identity(16), 64)) <= 0.25 / 16.0);
}

TEST_CASE("property: graph_distance is a metric below the sup distance") {
  std::mt19937_64 rng(10);
  for (int n = 0; n < 100; ++n) {
    const HullFunction a = random_monotone(12, rng), b = random_monotone(12, rng),
                       c = random_monotone(12, rng);
    const double ab = graph_distance(a, b), ba = graph_distance(b, a);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
    CHECK(ab <= graph_distance(a, c) + graph_distance(c, b) + 1e-9);
    CHECK(ab <= sup_distance(a, b) + 1e-12);
  }
}

TEST_CASE("monotone_envelope") {
  const HullFunction h = HullFunction::from_values(std::vector<double>{0.0, 0.5, 0.3, 0.8});
  const HullFunction e = monotone_envelope(h);
  CHECK(e.values() == std::vector<double>{0.0, 0.3, 0.3, 0.8});
  CHECK(e.monotone());

  std::mt19937_64 rng(12);
  for (int n = 0; n < 100; ++n) {
    const HullFunction r = test::random_hull(9, rng, 0.7);
    const HullFunction env = monotone_envelope(r);
    for (std::int64_t k = 0; k < 9; ++k) {
      // brute force: minimum over one lift period starting at k
      double m = r.at(k);
      for (std::int64_t j = k; j < k + 9; ++j) m = std::min(m, r.at(j));
      CHECK(env[static_cast<std::size_t>(k)] == m);
      CHECK(env[static_cast<std::size_t>(k)] <= r[static_cast<std::size_t>(k)]);
    }
    CHECK(env.monotone());
    CHECK(test::bit_equal(monotone_envelope(env), env));
  }
  const HullFunction mono = random_monotone(30, rng);
  CHECK(test::bit_equal(monotone_envelope(mono), mono));
}

TEST_CASE("project_monotone") {
  const HullFunction pair = HullFunction::from_values(std::vector<double>{0.6, 0.4});
  const HullFunction p = project_monotone(pair);
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-15));

  std::mt19937_64 rng(14);
  const HullFunction mono = random_monotone(30, rng);
  CHECK(test::bit_equal(project_monotone(mono), mono));
  for (int n = 0; n < 1000; ++n) {
    const HullFunction r = test::random_hull(1 + n % 17, rng, 1.5);
    const HullFunction q = project_monotone(r);
    CHECK(q.monotone());
    CHECK(test::bit_equal(project_monotone(q), q));
  }
}

TEST_CASE("project_monotone is the least-squares projection") {
  // compare against random monotone competitors and the envelope
  std::mt19937_64 rng(16);
  auto dist2 = [](const HullFunction& a, const HullFunction& b) {
    double s = 0.0;
    for (double d : HullFunction::difference(a, b)) s += d * d;
    return s;
  };
  for (int n = 0; n < 50; ++n) {
    const HullFunction r = test::random_hull(8, rng, 0.6);
    const HullFunction q = project_monotone(r);
    const double best = dist2(q, r);
    CHECK(best <= dist2(monotone_envelope(r), r) + 1e-12);
    for (int c = 0; c < 200; ++c) {
      const HullFunction other = random_monotone(8, rng);
      CHECK(best <= dist2(other, r) + 1e-12);
    }
  }
}

TEST_CASE("normalize") {
  const HullFunction id = HullFunction::identity(12);
  CHECK(test::bit_equal(normalize(id), id));
  CHECK(normalization_shift(id) == 0);

  // 0.3 N integer: lands on the identity up to the rounding of 0.3
  const HullFunction a = normalize(test::shifted_identity(10, 0.3));
  for (std::size_t k = 0; k < 10; ++k) CHECK(a[k] == doctest::Approx(k / 10.0).epsilon(1e-14));

  // otherwise the nearest grid shift below: identity + c with -1/N < c <= 0
  const HullFunction b = normalize(test::shifted_identity(7, 0.3));
  const double c = b[0];
  CHECK(c <= 0.0);
  CHECK(c > -1.0 / 7.0);
  CHECK(c == doctest::Approx(0.3 - 3.0 / 7.0).epsilon(1e-12));
  for (std::size_t k = 0; k < 7; ++k) CHECK(b[k] == doctest::Approx(k / 7.0 + c).epsilon(1e-12));

  std::mt19937_64 rng(18);
  for (int n = 0; n < 100; ++n) {
    const HullFunction h = random_monotone(25, rng).plus_integer(n % 7 - 3);
    const HullFunction z = normalize(h);
    CHECK(z[0] <= 0.0);
    CHECK(z[1] > 0.0);
    CHECK(test::bit_equal(normalize(z), z));
  }
}

TEST_CASE("detect_gaps") {
  const GapReport id = detect_gaps(HullFunction::identity(200), 0.01);
  CHECK(id.gaps.empty());
  CHECK(id.largest_gap == doctest::Approx(1.0 / 200.0).epsilon(1e-12));

  std::vector<double> step(10, 0.0);
  for (std::size_t k = 5; k < 10; ++k) step[k] = 0.9;
  const GapReport s = detect_gaps(HullFunction::from_values(step), 0.5);
  REQUIRE(s.gaps.size() == 1);
  CHECK(s.gaps[0].size == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(s.gaps[0].index == 4);
  CHECK(s.largest_gap == doctest::Approx(0.9).epsilon(1e-15));

  // the wrap difference is a candidate too
  std::vector<double> wrap(10, 0.0);
  for (std::size_t k = 0; k < 10; ++k) wrap[k] = 0.01 * static_cast<double>(k);
  const GapReport w = detect_gaps(HullFunction::from_values(wrap), 0.5);
  REQUIRE(w.gaps.size() == 1);
  CHECK(w.gaps[0].index == 9);
  CHECK(w.gaps[0].size == doctest::Approx(0.91).epsilon(1e-12));

  std::mt19937_64 rng(20);
  for (int n = 0; n < 100; ++n) {
    const GapReport r = detect_gaps(random_monotone(40, rng), 0.02);
    double total = 0.0;
    for (std::size_t i = 0; i < r.gaps.size(); ++i) {
      total += r.gaps[i].size;
      CHECK(r.gaps[i].size > 0.02);
      if (i > 0) CHECK(r.gaps[i].size <= r.gaps[i - 1].size);
    }
    CHECK(total <= 1.0 + 1e-12);
    if (!r.gaps.empty()) CHECK(r.largest_gap == r.gaps.front().size);
  }
}

TEST_CASE("integer translates and rotations are exact") {
  std::mt19937_64 rng(22);
  const HullFunction h = random_monotone(13, rng);
  const HullFunction up = h.plus_integer(5);
  for (std::size_t k = 0; k < 13; ++k) {
    CHECK(up.entry(k).frac == h.entry(k).frac);
    CHECK(up.entry(k).whole == h.entry(k).whole + 5);
  }
  CHECK(test::bit_equal(h.rotated(13), h.plus_integer(1)));
  CHECK(test::bit_equal(h.rotated(4).rotated(-4), h));
  CHECK(test::bit_equal(h.rotated(-13 * 3), h.plus_integer(-3)));
}
