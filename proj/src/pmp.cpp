#include "minexp/pmp.hpp"

#include <cmath>
#include <stdexcept>

namespace minexp {

void Scenario::validate() const {
  if (!(speed > 0.0)) {
    throw std::invalid_argument("scenario: speed must be positive");
  }
  if (lambda_bolza < 0.0) {
    throw std::invalid_argument("scenario: lambda must be nonnegative");
  }
  if (start == goal) {
    throw std::invalid_argument("scenario: start and goal coincide");
  }
  const double w = workspace_half_width;
  for (const auto& x : {start, goal}) {
    if (std::abs(x[0]) > w || std::abs(x[1]) > w) {
      throw std::invalid_argument("scenario: endpoint outside the workspace");
    }
  }
}

double hamiltonian(const Scenario& s, const PmpPoint& pt) {
  return s.lambda_bolza + s.field.value(pt.x, pt.t) +
         pt.p[0] * s.speed * std::cos(pt.psi) +
         pt.p[1] * s.speed * std::sin(pt.psi);
}

double stationary_heading(const std::array<double, 2>& p) {
  if (p[0] == 0.0 && p[1] == 0.0) {
    throw std::invalid_argument("stationary_heading: zero co-state");
  }
  // The minimizing branch: H's control terms are p . v(cos, sin), minimized
  // by pointing opposite to p.
  return std::atan2(-p[1], -p[0]);
}

std::vector<double> hd_profile(const Scenario& s, double tf,
                               const std::vector<double>& tau,
                               const std::vector<std::array<double, 2>>& x_samples) {
  const std::size_t n = tau.size();
  if (n < 2 || x_samples.size() != n) {
    throw std::invalid_argument("hd_profile: need matching grids with N >= 2");
  }
  const double dtau = tau[1] - tau[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs((tau[i] - tau[i - 1]) - dtau) > 1e-9 * std::max(1.0, std::abs(dtau))) {
      throw std::invalid_argument("hd_profile: tau grid is not uniform");
    }
  }
  std::vector<double> ct(n);
  for (std::size_t i = 0; i < n; ++i) {
    ct[i] = s.field.dc_dt(x_samples[i], tau[i] * tf);
  }
  std::vector<double> hd(n, 0.0);
  for (std::size_t i = n - 1; i-- > 0;) {
    hd[i] = hd[i + 1] - tf * 0.5 * (ct[i] + ct[i + 1]) * dtau;
  }
  return hd;
}

double heading_rate(const Scenario& s, const std::array<double, 2>& x,
                    double psi, double t) {
  if (!s.field.is_static()) {
    throw std::invalid_argument(
        "heading_rate: co-state elimination is invalid for time-varying "
        "fields");
  }
  const double den = s.lambda_bolza + s.field.value(x, t);
  if (den <= 0.0) {
    throw std::domain_error("heading_rate: lambda + c is not positive");
  }
  const auto g = s.field.grad_x(x, t);
  return s.speed * (std::cos(psi) * g[1] - std::sin(psi) * g[0]) / den;
}

double path_cost(const Scenario& s,
                 const std::vector<std::array<double, 2>>& x_samples,
                 double tf) {
  const std::size_t n = x_samples.size();
  if (n < 2) {
    throw std::invalid_argument("path_cost: need at least two samples");
  }
  const double dtau = 1.0 / static_cast<double>(n - 1);
  double acc = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double tau = static_cast<double>(i) * dtau;
    acc += s.field.value(x_samples[i], tau * tf);
  }
  double cost = tf * acc * dtau;
  if (s.lambda_bolza > 0.0) cost += s.lambda_bolza * tf;
  return cost;
}

}  // namespace minexp
