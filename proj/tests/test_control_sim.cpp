#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "pctl/control_sim.hpp"

using namespace pctl;

namespace {

const ControlParams kRef{0.04, 0.05, {0.5, 1.0}};

const IntervalSet& ref_set() {
  static const IntervalSet s = maximal_safe_set(asymmetric_tent(), kRef).safe_set;
  return s;
}

}  // namespace

TEST_CASE("uncontrolled runs") {
  const auto f = asymmetric_tent();
  const auto r = simulate_uncontrolled(f, 0.7, 2, 0.5);
  REQUIRE(r.states.size() == 3);
  CHECK(r.states[1] == doctest::Approx(0.91));
  CHECK(r.states[2] == doctest::Approx(0.28));
  CHECK(r.crash_count == 1);

  const auto z = simulate_uncontrolled(f, 0.0, 5, 0.5);
  for (double x : z.states) CHECK(x == 0.0);

  const auto m = simulate_uncontrolled(f, 0.65, 200, 0.5);
  CHECK(m.states.size() == 201);
  CHECK(std::abs(m.mean_state - 0.65) <= 0.03);
  CHECK_THROWS_AS(simulate_uncontrolled(f, 1.5, 3, 0.5), std::invalid_argument);
}

TEST_CASE("perturbed runs") {
  const auto f = asymmetric_tent();
  const auto zero = simulate_perturbed(f, 0.65, 50, 0.0, DisturbanceStrategy::uniform(1), 0.5);
  CHECK(zero.states == simulate_uncontrolled(f, 0.65, 50, 0.5).states);

  const std::vector<double> script{0.05, -0.05, 0.05, -0.05};
  const auto s = simulate_perturbed(f, 0.6, 4, 0.05, DisturbanceStrategy::scripted(script), 0.5);
  double x = 0.6;
  for (std::size_t k = 0; k < 4; ++k) {
    x = f(x) + script[k];
    CHECK(s.states[k + 1] == x);
  }
  CHECK_THROWS_AS(simulate_perturbed(f, 0.6, 5, 0.05, DisturbanceStrategy::scripted(script), 0.5),
                  std::out_of_range);
  CHECK_THROWS_AS(simulate_perturbed(f, 0.6, 1, 0.01, DisturbanceStrategy::scripted(script), 0.5),
                  std::invalid_argument);

  const auto adv = simulate_perturbed(f, 0.65, 200, 0.05, DisturbanceStrategy::adversarial(), 0.5);
  CHECK(adv.crash_count >= 1);
  CHECK(std::abs(adv.mean_state - 0.59) <= 0.03);
}

TEST_CASE("domain exit stops the record") {
  const auto f = asymmetric_tent();
  // 0 is a fixed point; pushing down leaves [0, 1] at once.
  const auto r = simulate_perturbed(f, 0.0, 10, 0.05, DisturbanceStrategy::scripted({-0.05}), 0.5);
  REQUIRE(r.domain_exit_step.has_value());
  CHECK(*r.domain_exit_step == 0);
  CHECK(r.states.size() == 2);
  CHECK(r.states.back() == doctest::Approx(-0.05));
}

TEST_CASE("control law") {
  const auto& s = ref_set();
  CHECK(control_law(s, 0.04, 0.6) == 0.0);
  // Too far from S for an admissible control: clipped.
  CHECK(control_law(s, 0.04, 0.655) == doctest::Approx(-0.04));
  // Image of I3 pushed up lands within U of I1.
  const double y = asymmetric_tent()(0.5 * (s[2].lo + s[2].hi)) + 0.05;
  const double u = control_law(s, 0.04, y);
  CHECK(std::abs(u) <= 0.04);
  CHECK(s.contains(y + u, 1e-12));
  CHECK_THROWS_AS(control_law({}, 0.04, 0.6), std::invalid_argument);
}

TEST_CASE("controlled runs stay in S") {
  const auto f = asymmetric_tent();
  const auto& s = ref_set();
  gen::Rng rng(21);
  for (int t = 0; t < 200; ++t) {
    const double x0 = nearest_point(s, gen::uniform(rng, 0.5, 1.0));
    DisturbanceStrategy st;
    switch (t % 3) {
      case 0: st = DisturbanceStrategy::uniform(t); break;
      case 1: st = DisturbanceStrategy::extremal(t); break;
      default: st = DisturbanceStrategy::adversarial(); break;
    }
    const auto r = simulate_controlled(f, x0, 200, kRef, s, st);
    CHECK(r.crash_count == 0);
    for (std::size_t k = 0; k < r.steps(); ++k) {
      REQUIRE(std::abs(r.disturbances[k]) <= 0.05);
      REQUIRE(std::abs(r.controls[k]) <= 0.04);
      REQUIRE(s.contains(r.states[k + 1], kSafetySlip));
      REQUIRE(r.states[k + 1] == f(r.states[k]) + r.disturbances[k] + r.controls[k]);
    }
  }
}

TEST_CASE("controlled run without disturbance needs no control inside S") {
  const auto f = asymmetric_tent();
  const auto& s = ref_set();
  const auto r = simulate_controlled(f, s[0].lo, 100, kRef, s, DisturbanceStrategy::scripted(std::vector<double>(100, 0.0)));
  for (std::size_t k = 0; k < r.steps(); ++k)
    if (s.contains(f(r.states[k]))) CHECK(r.controls[k] == 0.0);
}

TEST_CASE("controlled runs are reproducible") {
  const auto f = asymmetric_tent();
  const auto& s = ref_set();
  const auto a = simulate_controlled(f, s[1].lo, 500, kRef, s, DisturbanceStrategy::uniform(42));
  const auto b = simulate_controlled(f, s[1].lo, 500, kRef, s, DisturbanceStrategy::uniform(42));
  CHECK(a.states == b.states);
  CHECK(a.controls == b.controls);
}

TEST_CASE("a too-small set breaches safety") {
  const auto f = asymmetric_tent();
  const IntervalSet bogus(Interval{0.6, 0.61});
  try {
    simulate_controlled(f, 0.605, 10, kRef, bogus, DisturbanceStrategy::extremal(1));
    FAIL("expected a breach");
  } catch (const SafetyBreach& e) {
    CHECK(e.partial().states.size() >= 2);
  }
  CHECK_THROWS_AS(simulate_controlled(f, 0.7, 10, kRef, ref_set(), DisturbanceStrategy::uniform(1)),
                  std::invalid_argument);
}

TEST_CASE("escape certificates") {
  const auto f = asymmetric_tent();
  const auto& s = ref_set();
  for (double x0 : {0.7, 0.52, 0.5, 1.0, 0.66, 0.95}) {
    INFO("x0 = " << x0);
    const auto cert = adversarial_escape(f, kRef, s, x0);
    REQUIRE(cert.has_value());
    CHECK(verify_escape(*cert, f, kRef));
    CHECK(cert->steps.back().reachable.empty());
    // The played trajectory leaves Q.
    const double last = cert->play_states.back();
    CHECK((last < 0.5 || last > 1.0));
  }
  CHECK(adversarial_escape(f, kRef, s, 0.52)->depth <= 5);
  CHECK_THROWS_AS(adversarial_escape(f, kRef, s, s[0].lo), std::invalid_argument);
  CHECK_THROWS_AS(adversarial_escape(f, kRef, s, 0.2), std::invalid_argument);
}

TEST_CASE("tampered certificates fail verification") {
  const auto f = asymmetric_tent();
  auto cert = *adversarial_escape(f, kRef, ref_set(), 0.7);
  auto bad = cert;
  bad.steps[0].policy[0].xi = 0.2;  // inadmissible
  CHECK_FALSE(verify_escape(bad, f, kRef));
  bad = cert;
  bad.steps.back().reachable = IntervalSet(Interval{0.6, 0.6});
  CHECK_FALSE(verify_escape(bad, f, kRef));
}

TEST_CASE("strategy names") {
  CHECK(parse_strategy_kind("adversarial") == DisturbanceStrategy::Kind::AdversarialGreedy);
  CHECK(to_string(parse_strategy_kind("extremal")) == "extremal-random");
  CHECK_THROWS_AS(parse_strategy_kind("nope"), std::invalid_argument);
}
