// Classical multi-start shooting solution of the static-field problem:
// RK4 integration of (x1, x2, psi) under the heading-rate reduction, arrival
// detected at the closest approach to the goal, initial heading found by
// bracketing sign changes of the signed perpendicular miss.

#pragma once

#include <array>
#include <optional>
#include <vector>

#include "minexp/pmp.hpp"

namespace minexp {

struct ShootConfig {
  int heading_grid = 64;          // initial psi0 samples over [0, 2pi)
  double dt = 1e-3;               // RK4 step (s)
  double arrival_tolerance = 0.05;  // m
  double max_flight_factor = 3.0;   // x straight-line time
  int refine_iterations = 60;       // bisections per bracket
};

struct ShotSample {
  double t;
  std::array<double, 2> x;
  double psi;
};

struct ShotResult {
  double psi0 = 0.0;
  std::vector<ShotSample> samples;
  double miss = 0.0;          // closest-approach distance to the goal (m)
  double signed_miss = 0.0;   // perpendicular miss, signed by heading frame
  double arrival_time = 0.0;  // s
  double cost = 0.0;          // right Riemann path cost (+ lambda * tf)
  bool converged = false;     // miss <= arrival tolerance
};

// Integrates one shot from scenario.start with initial heading psi0. Static
// fields only; throws std::invalid_argument otherwise.
ShotResult integrate(const Scenario& scenario, double psi0,
                     const ShootConfig& config);

// Multi-start solve: grid sweep, bracket refinement, least-cost converged
// candidate (ties broken by smaller psi0). Because any heading whose closest
// approach lies within the arrival tolerance is admissible, the refinement
// also scans to the edges of that tolerance window around each root and
// returns the cheapest converged shot. A non-converged result is returned
// with converged == false, never thrown.
ShotResult solve(const Scenario& scenario, const ShootConfig& config);

// delta = (cost_pinn - cost_baseline) / cost_baseline; nullopt when the
// baseline did not converge.
std::optional<double> cost_gap(double cost_pinn, const ShotResult& baseline);

// Diagnostic co-state reconstruction from H = 0 and the minimizing branch:
// p = -(lambda + c(x)) / v * (cos psi, sin psi).
std::array<double, 2> reconstruct_costate(const Scenario& scenario,
                                          const std::array<double, 2>& x,
                                          double psi, double t);

}  // namespace minexp
