#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "pctl/bifurcation.hpp"

using namespace pctl;

namespace {

const Interval kQ{0.5, 1.0};

IntervalSet set(std::vector<Interval> parts) { return IntervalSet::normalize(std::move(parts)); }

IntervalSet safe(double u, double beta) {
  return maximal_safe_set(asymmetric_tent(), {u, beta, kQ}).safe_set;
}

}  // namespace

TEST_CASE("B1 and B2 checks") {
  CHECK(check_B1(set({{0, 1}})).empty());
  CHECK(check_B1(set({{0, 1}, {2, 2}})) == std::vector<std::size_t>{1});
  CHECK(check_B2(set({{0, 1}}), 0.1).empty());
  CHECK(check_B2(set({{0, 1}, {1.2, 2}}), 0.1) == std::vector<std::size_t>{0});

  const auto s = safe(0.04, 0.05);
  const auto g = gaps(s);
  REQUIRE(g.size() == 2);
  CHECK(g[0] == doctest::Approx(0.123).epsilon(1e-2));
  CHECK(g[1] == doctest::Approx(0.0477).epsilon(1e-2));
  CHECK(check_B1(s).empty());
  CHECK(check_B2(s, 0.04).empty());
}

TEST_CASE("events along beta = 0.05") {
  const auto scan = scan_bifurcations(asymmetric_tent(), kQ, 0.05, grid_points(0.03, 0.06, 150));
  REQUIRE(scan.events.size() == 2);
  const auto& vanish = scan.events[0];
  const auto& split = scan.events[1];
  CHECK(vanish.kind == BifurcationEvent::Kind::VanishingPoint);
  CHECK(std::abs(vanish.u_at - 0.0357) <= 5e-4);
  CHECK(vanish.components_below == 0);
  CHECK(split.kind == BifurcationEvent::Kind::Split);
  CHECK(std::abs(split.u_at - 0.045) <= 1e-3);
  CHECK(split.components_below == 3);
  CHECK(split.components_above == 2);
  CHECK(vanish.u_hi - vanish.u_lo <= 1e-9);

  // Right at the located points the flags fire.
  CHECK_FALSE(check_B1(safe(vanish.u_at, 0.05)).empty());
  CHECK_FALSE(check_B2(safe(split.u_at, 0.05), split.u_at).empty());
}

TEST_CASE("B1 is sufficient: the point component disappears just below") {
  const auto ev = locate_bifurcation(asymmetric_tent(), kQ, 0.05, 0.035, 0.036);
  REQUIRE(ev.kind == BifurcationEvent::Kind::VanishingPoint);
  const auto at = safe(ev.u_at, 0.05);
  const auto below = safe(ev.u_at - 1e-6, 0.05);
  CHECK(below.size() < at.size());
}

TEST_CASE("u_min") {
  const auto f = asymmetric_tent();
  const auto r = u_min(f, kQ, 0.05, 1e-9);
  REQUIRE(r.u_min.has_value());
  CHECK(std::abs(*r.u_min - 0.0357) <= 5e-4);
  CHECK(r.iterations > 10);
  // Slope one nearby.
  const auto r2 = u_min(f, kQ, 0.051, 1e-10);
  CHECK(*r2.u_min - *r.u_min == doctest::Approx(0.001).epsilon(1e-3));
  CHECK_THROWS_AS(u_min(f, kQ, 0.0, 1e-9), std::invalid_argument);

  // A map that throws everything out of Q has no safe set at any U <= beta.
  const PiecewiseLinearMap out({0.0, 1.0}, {2.0, 4.0});
  SafeSetOptions o;
  CHECK_FALSE(u_min(out, kQ, 0.05, 1e-6, o).u_min.has_value());
}

TEST_CASE("u_min slope report") {
  const auto rep = umin_slope_check(asymmetric_tent(), kQ, 0.046, 0.054, 9, 1e-10);
  CHECK(rep.sufficient_data);
  CHECK(rep.max_deviation <= 1e-3);
  const auto single = umin_slope_check(asymmetric_tent(), kQ, 0.05, 0.05, 1, 1e-9);
  CHECK_FALSE(single.sufficient_data);
}

TEST_CASE("sweep cells") {
  const auto f = asymmetric_tent();
  const std::vector<double> us{0.008, 0.01, 0.04, 0.08, 0.2};
  const std::vector<double> bs{0.01, 0.05, 0.1};
  SweepOptions so;
  so.jobs = 3;
  const auto cells = sweep(f, kQ, us, bs, so);
  REQUIRE(cells.size() == us.size() * bs.size());
  auto find = [&](double u, double b) {
    for (const auto& c : cells)
      if (c.u_bound == u && c.beta == b) return c;
    FAIL("missing cell");
    return SweepCell{};
  };
  CHECK(find(0.04, 0.05).exists);
  CHECK(find(0.04, 0.05).n_components == 3);
  CHECK(find(0.008, 0.01).n_components > find(0.08, 0.1).n_components);
  CHECK_FALSE(find(0.01, 0.05).exists);
  CHECK(find(0.2, 0.05).outside_regime);
  CHECK_FALSE(find(0.2, 0.05).computed);
  for (std::size_t k = 1; k < cells.size(); ++k) {
    const auto& a = cells[k - 1];
    const auto& b = cells[k];
    CHECK((a.u_bound < b.u_bound || (a.u_bound == b.u_bound && a.beta < b.beta)));
  }
  // Scheduling does not change results.
  so.jobs = 1;
  const auto serial = sweep(f, kQ, us, bs, so);
  for (std::size_t k = 0; k < cells.size(); ++k) {
    CHECK(cells[k].measure == serial[k].measure);
    CHECK(cells[k].n_components == serial[k].n_components);
  }
}

TEST_CASE("sweep records per-cell errors") {
  // Expanding on [0, 1], but Q reaches outside the domain.
  SweepOptions so;
  so.jobs = 2;
  const auto cells = sweep(asymmetric_tent(), {0.5, 1.5}, {0.01}, {0.05}, so);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].computed);
  CHECK_FALSE(cells[0].error.empty());
}

TEST_CASE("grid points exclude the lower end") {
  const auto g = grid_points(0.0, 0.2, 4);
  REQUIRE(g.size() == 4);
  CHECK(g.front() == doctest::Approx(0.05));
  CHECK(g.back() == doctest::Approx(0.2));
}

TEST_CASE("determinant factors") {
  // M = 0: product of the diagonal.
  CHECK(product_of(det_factors({2, 3, -1}, {-1, -1, -1})) == doctest::Approx(-6));
  // Full 3-cycle: d1 d2 d3 - 1.
  const auto f = det_factors({2, 3, 4}, {1, 2, 0});
  REQUIRE(f.size() == 1);
  CHECK(f[0].cycle);
  CHECK(f[0].value == doctest::Approx(23));
  CHECK(leibniz_det({{2, -1, 0}, {0, 3, -1}, {-1, 0, 4}}) == doctest::Approx(23));
  const auto n2 = det_factor_check(2, 100);
  CHECK(n2.passed());
  CHECK(n2.cases == 9 * 100 + 2 * 100);
  CHECK_THROWS_AS(det_factor_check(7, 1), std::invalid_argument);
  CHECK_THROWS_AS(leibniz_det(std::vector<std::vector<double>>(9, std::vector<double>(9, 1.0))),
                  std::invalid_argument);
}

TEST_CASE("Jacobian of the reference boundary system") {
  const auto f = asymmetric_tent();
  const ControlParams p{0.04, 0.05, kQ};
  const auto sys = build_boundary_system(f, safe(0.04, 0.05), p);
  const auto rep = jacobian_nonsingular(sys, f);
  CHECK(rep.nonsingular);
  CHECK(rep.det == doctest::Approx(rep.det_from_factors).epsilon(1e-12));
  // f'(b1) [f'(a1) f'(a2) f'(b3) - 1] with the slopes actually present.
  const double p1 = rep.slopes[0], q1 = rep.slopes[1], r1 = rep.slopes[2], s1 = rep.slopes[3];
  CHECK(rep.det == doctest::Approx(q1 * (p1 * r1 * s1 - 1)).epsilon(1e-12));
}

TEST_CASE("Jacobian is nonsingular on random expanding maps") {
  gen::Rng rng(31);
  int systems = 0;
  for (int t = 0; t < 300; ++t) {
    const auto f = gen::folding_map(rng, 4);
    REQUIRE(f.expanding());
    const double lo = gen::uniform(rng, 0.0, 0.3);
    const Interval q{lo, gen::uniform(rng, 0.7, 1.0)};
    const double beta = gen::uniform(rng, 0.005, 0.1);
    const ControlParams p{gen::uniform(rng, 0.3, 0.99) * beta, beta, q};
    const auto r = maximal_safe_set(f, p);
    if (!r.converged || r.safe_set.empty()) continue;
    if (!check_B1(r.safe_set).empty() || !check_B2(r.safe_set, p.u_bound).empty()) continue;
    const auto sys = build_boundary_system(f, r.safe_set, p);
    bool on_kink = false;
    for (std::size_t i : sys.active) on_kink = on_kink || f.distance_to_kink(sys.points[i]) < 1e-9;
    if (on_kink) continue;
    const auto rep = jacobian_nonsingular(sys, f);
    CHECK(rep.nonsingular);
    CHECK(std::abs(rep.det - rep.det_from_factors) <= 1e-9 * std::max(1.0, std::abs(rep.det)));
    ++systems;
  }
  CHECK(systems > 100);
}

TEST_CASE("continuation between bifurcations") {
  const auto f = asymmetric_tent();
  TraceOptions o;
  o.stop_at_first_event = true;
  const auto rec = trace_boundaries(f, {0.04, 0.05, kQ}, 0.04, 0.0375, 1e-4, o);
  CHECK(rec.halted.empty());
  CHECK(rec.events.empty());
  CHECK(rec.max_mismatch <= 1e-8);
  REQUIRE(rec.samples.size() >= 25);
  // Every sample's points agree with a from-scratch computation.
  for (std::size_t k = 0; k < rec.samples.size(); k += 5) {
    const auto& smp = rec.samples[k];
    const auto s = safe(smp.u, 0.05);
    REQUIRE(s.size() * 2 == smp.points.size());
    CHECK(hausdorff_distance(s, set_from_points(smp.points)) <= 1e-8);
  }
}

TEST_CASE("continuation locates both events") {
  const auto f = asymmetric_tent();
  TraceOptions o;
  o.stop_at_first_event = false;
  const auto rec = trace_boundaries(f, {0.05, 0.05, kQ}, 0.05, 0.03, 1e-4, o);
  REQUIRE(rec.events.size() == 2);
  CHECK(rec.events[0].kind == BifurcationEvent::Kind::Split);
  CHECK(std::abs(rec.events[0].u_at - 0.045) <= 1e-3);
  CHECK(rec.events[1].kind == BifurcationEvent::Kind::VanishingPoint);
  CHECK(std::abs(rec.events[1].u_at - 0.0357) <= 5e-4);
  CHECK(rec.halted == "safe set vanished");

  o.stop_at_first_event = true;
  const auto first = trace_boundaries(f, {0.05, 0.05, kQ}, 0.05, 0.03, 1e-4, o);
  CHECK(first.events.size() == 1);
  CHECK(first.halted == "bifurcation located");
}

TEST_CASE("continuation refuses bad starts") {
  const auto f = asymmetric_tent();
  CHECK_FALSE(trace_boundaries(f, {0.03, 0.05, kQ}, 0.03, 0.02, 1e-4).halted.empty());
  CHECK_THROWS_AS(trace_boundaries(f, {0.04, 0.05, kQ}, 0.04, 0.03, 0.0), std::invalid_argument);
}
