// Optimal-control mathematics for the minimum-threat-exposure problem:
// Hamiltonian, minimizing heading, desired-Hamiltonian profile, the
// heading-rate reduction valid for static fields, and the Riemann path cost.

#pragma once

#include <array>
#include <vector>

#include "minexp/threat_field.hpp"

namespace minexp {

struct Scenario {
  std::array<double, 2> start{0, 0};   // x0
  std::array<double, 2> goal{0, 0};    // xf
  double speed = 10.0;                 // v
  double lambda_bolza = 0.0;
  ThreatField field;
  double workspace_half_width = 15.0;

  // Throws std::invalid_argument on violated invariants.
  void validate() const;
};

struct PmpPoint {
  std::array<double, 2> x{0, 0};
  double psi = 0.0;
  std::array<double, 2> p{0, 0};
  double t = 0.0;
};

// H = lambda + c(x, t) + p1 v cos psi + p2 v sin psi
double hamiltonian(const Scenario& s, const PmpPoint& pt);

// Heading that minimizes H over psi: atan2(-p2, -p1). Throws on p == 0.
double stationary_heading(const std::array<double, 2>& p);

// Desired Hamiltonian along a uniform tau grid: H_d(tau_N) = 0 and interior
// values by backward trapezoidal accumulation of dc/dt evaluated at
// (x_samples[j], tau[j] * tf). Throws when the grid is not uniform or sizes
// mismatch.
std::vector<double> hd_profile(const Scenario& s, double tf,
                               const std::vector<double>& tau,
                               const std::vector<std::array<double, 2>>& x_samples);

// psi_dot = v (cos psi dc/dx2 - sin psi dc/dx1) / (lambda + c), the co-state
// elimination valid only for static fields and H == 0.
double heading_rate(const Scenario& s, const std::array<double, 2>& x,
                    double psi, double t);

// Right Riemann path cost over a uniform tau grid:
//   tf * sum_{i>=2} c(x_i, tau_i tf) dtau  (+ lambda * tf)
double path_cost(const Scenario& s,
                 const std::vector<std::array<double, 2>>& x_samples,
                 double tf);

}  // namespace minexp
