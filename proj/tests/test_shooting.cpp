#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "minexp/shooting.hpp"

using namespace minexp;

namespace {

Scenario flat_scenario() {
  Scenario s;
  s.start = {-10.0, -10.0};
  s.goal = {10.0, 10.0};
  s.speed = 10.0;
  s.field = ThreatField({{0.5, {0.0, 0.0}, 0.05, 0.0, 0.05}}, 0.0, 1.0,
                        TemporalMode::kStatic);
  return s;
}

Scenario bump_scenario() {
  Scenario s;
  s.start = {-11.0, 0.0};
  s.goal = {11.0, 0.0};
  s.speed = 10.0;
  // One symmetric bump dead center on the straight-line path.
  s.field = ThreatField({{0.8, {0.0, 0.0}, 0.08, 0.0, 0.08}}, 5.0, 1.0,
                        TemporalMode::kStatic);
  return s;
}

}  // namespace

TEST_CASE("a constant field gives a straight shot through the goal") {
  const Scenario s = flat_scenario();
  const double psi = std::atan2(20.0, 20.0);
  ShootConfig cfg;
  const ShotResult r = integrate(s, psi, cfg);
  CHECK(r.miss < 1e-6);
  CHECK(r.converged);
  const double dist = std::hypot(20.0, 20.0);
  CHECK(r.arrival_time == doctest::Approx(dist / s.speed).epsilon(1e-6));
  // Constant c = 1: cost = tf.
  CHECK(r.cost == doctest::Approx(dist / s.speed).epsilon(1e-3));
}

TEST_CASE("halving dt improves accuracy at high order") {
  // RK4 global error is O(h^4): a 2x step reduction should cut the terminal
  // position error by roughly 16x (>= 14x allowing noise floors).
  const Scenario s = bump_scenario();
  const double psi0 = 0.4;
  auto endpoint_with = [&](double dt) {
    ShootConfig cfg;
    cfg.dt = dt;
    cfg.max_flight_factor = 1.2;
    const ShotResult r = integrate(s, psi0, cfg);
    return r.samples.back();
  };
  const ShotSample fine = endpoint_with(1e-4 / 4.0);
  const ShotSample a = endpoint_with(4e-2);
  const ShotSample b = endpoint_with(2e-2);
  const double ea = std::hypot(a.x[0] - fine.x[0], a.x[1] - fine.x[1]);
  const double eb = std::hypot(b.x[0] - fine.x[0], b.x[1] - fine.x[1]);
  CHECK(ea / eb > 14.0);
}

TEST_CASE("solve finds a converged least-cost shot on the bump field") {
  const Scenario s = bump_scenario();
  ShootConfig cfg;
  const ShotResult r = solve(s, cfg);
  REQUIRE(r.converged);
  CHECK(r.miss <= cfg.arrival_tolerance);
  // The bump forces a detour: slower than the straight line, but bounded.
  CHECK(r.arrival_time > 2.2);
  CHECK(r.arrival_time < 6.6);

  // Oracle: a dense psi0 sweep must not find a converged shot that beats the
  // solver. The solver scans the whole arrival-tolerance window, so the
  // margin is tight.
  double sweep_best = r.cost;
  for (int j = 0; j < 1024; ++j) {
    const ShotResult g = integrate(s, 2.0 * M_PI * j / 1024, cfg);
    if (g.converged) sweep_best = std::min(sweep_best, g.cost);
  }
  CHECK(r.cost <= sweep_best + 1e-6);
}

TEST_CASE("the symmetric bump admits mirrored solutions of equal cost") {
  const Scenario s = bump_scenario();
  ShootConfig cfg;
  const ShotResult r = solve(s, cfg);
  REQUIRE(r.converged);
  // Mirror the winning heading across the x1 axis; the mirrored shot must
  // converge with (nearly) the same cost.
  double mirrored = -r.psi0;
  const ShotResult m = integrate(s, mirrored, cfg);
  CHECK(m.miss < 0.1);
  CHECK(m.cost == doctest::Approx(r.cost).epsilon(1e-2));
}

TEST_CASE("H stays ~0 along integrated extremals") {
  const Scenario s = bump_scenario();
  ShootConfig cfg;
  cfg.dt = 1e-4;
  const ShotResult r = integrate(s, 0.35, cfg);
  for (std::size_t i = 0; i < r.samples.size(); i += 500) {
    const ShotSample& smp = r.samples[i];
    const auto p = reconstruct_costate(s, smp.x, smp.psi, smp.t);
    const double H = hamiltonian(s, {smp.x, smp.psi, p, smp.t});
    CHECK(std::abs(H) < 1e-6);
  }
}

TEST_CASE("reversing start and goal gives the same cost") {
  const Scenario fwd = bump_scenario();
  Scenario rev = fwd;
  std::swap(rev.start, rev.goal);
  ShootConfig cfg;
  const ShotResult a = solve(fwd, cfg);
  const ShotResult b = solve(rev, cfg);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  CHECK(a.cost == doctest::Approx(b.cost).epsilon(1e-2));
  CHECK(a.arrival_time == doctest::Approx(b.arrival_time).epsilon(1e-2));
}

TEST_CASE("unreachable goals are reported honestly") {
  Scenario s = flat_scenario();
  // Max flight factor below 1: the integrator cannot reach the goal.
  ShootConfig cfg;
  cfg.max_flight_factor = 0.5;
  const ShotResult r = solve(s, cfg);
  CHECK_FALSE(r.converged);
  CHECK(r.miss > cfg.arrival_tolerance);
}

TEST_CASE("time-varying fields are rejected") {
  Scenario s = bump_scenario();
  s.field = ThreatField({{0.8, {0.0, 0.0}, 0.08, 0.0, 0.08}}, 5.0, 1.0,
                        TemporalMode::kCosine);
  CHECK_THROWS_AS(integrate(s, 0.0, ShootConfig{}), std::invalid_argument);
}

TEST_CASE("cost_gap computes the relative excess and rejects bad baselines") {
  ShotResult base;
  base.converged = true;
  base.cost = 4.0;
  CHECK(*cost_gap(5.0, base) == doctest::Approx(0.25).epsilon(1e-15));
  base.converged = false;
  CHECK_FALSE(cost_gap(5.0, base).has_value());
  base.converged = true;
  base.cost = 0.0;
  CHECK_THROWS_AS(cost_gap(5.0, base), std::domain_error);
}

TEST_CASE("reconstructed co-states satisfy H = 0 and the minimizing branch") {
  const Scenario s = bump_scenario();
  const std::array<double, 2> x{1.0, 2.0};
  const double psi = 1.1;
  const auto p = reconstruct_costate(s, x, psi, 0.0);
  CHECK(hamiltonian(s, {x, psi, p, 0.0}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(stationary_heading(p) == doctest::Approx(psi).epsilon(1e-12));
}
