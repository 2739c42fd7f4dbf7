#include "minexp/shooting.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace minexp {
namespace {

struct State {
  double x1, x2, psi;
};

State deriv(const Scenario& s, const State& st, double t) {
  const double psidot = heading_rate(s, {st.x1, st.x2}, st.psi, t);
  return {s.speed * std::cos(st.psi), s.speed * std::sin(st.psi), psidot};
}

State rk4_step(const Scenario& s, const State& st, double t, double h) {
  const State k1 = deriv(s, st, t);
  const State s2{st.x1 + 0.5 * h * k1.x1, st.x2 + 0.5 * h * k1.x2,
                 st.psi + 0.5 * h * k1.psi};
  const State k2 = deriv(s, s2, t + 0.5 * h);
  const State s3{st.x1 + 0.5 * h * k2.x1, st.x2 + 0.5 * h * k2.x2,
                 st.psi + 0.5 * h * k2.psi};
  const State k3 = deriv(s, s3, t + 0.5 * h);
  const State s4{st.x1 + h * k3.x1, st.x2 + h * k3.x2, st.psi + h * k3.psi};
  const State k4 = deriv(s, s4, t + h);
  return {st.x1 + h / 6.0 * (k1.x1 + 2 * k2.x1 + 2 * k3.x1 + k4.x1),
          st.x2 + h / 6.0 * (k1.x2 + 2 * k2.x2 + 2 * k3.x2 + k4.x2),
          st.psi + h / 6.0 * (k1.psi + 2 * k2.psi + 2 * k3.psi + k4.psi)};
}

// Radial velocity toward the goal: d/dt |x - xf| (up to a positive factor).
double approach_rate(const Scenario& s, const State& st) {
  const double m1 = st.x1 - s.goal[0];
  const double m2 = st.x2 - s.goal[1];
  return m1 * std::cos(st.psi) + m2 * std::sin(st.psi);
}

double dist_to_goal(const Scenario& s, const State& st) {
  return std::hypot(st.x1 - s.goal[0], st.x2 - s.goal[1]);
}

}  // namespace

std::array<double, 2> reconstruct_costate(const Scenario& scenario,
                                          const std::array<double, 2>& x,
                                          double psi, double t) {
  const double mag =
      (scenario.lambda_bolza + scenario.field.value(x, t)) / scenario.speed;
  return {-mag * std::cos(psi), -mag * std::sin(psi)};
}

ShotResult integrate(const Scenario& scenario, double psi0,
                     const ShootConfig& config) {
  if (!scenario.field.is_static()) {
    throw std::invalid_argument(
        "shooting: the heading-rate reduction is invalid for time-varying "
        "fields");
  }
  if (!(config.dt > 0.0) || !(config.arrival_tolerance > 0.0)) {
    throw std::invalid_argument("shooting: dt and tolerance must be positive");
  }
  const double dist =
      std::hypot(scenario.goal[0] - scenario.start[0],
                 scenario.goal[1] - scenario.start[1]);
  const double t_max = config.max_flight_factor * dist / scenario.speed;

  ShotResult result;
  result.psi0 = psi0;

  State st{scenario.start[0], scenario.start[1], psi0};
  double t = 0.0;
  std::vector<ShotSample> samples;
  samples.push_back({t, {st.x1, st.x2}, st.psi});

  State best = st;
  double best_t = 0.0;
  double best_dist = dist_to_goal(scenario, st);

  double g_prev = approach_rate(scenario, st);
  while (t < t_max) {
    const double h = std::min(config.dt, t_max - t);
    const State prev = st;
    st = rk4_step(scenario, prev, t, h);
    t += h;
    samples.push_back({t, {st.x1, st.x2}, st.psi});
    const double d = dist_to_goal(scenario, st);
    if (d < best_dist) {
      best_dist = d;
      best = st;
      best_t = t;
    }
    const double g = approach_rate(scenario, st);
    if (g_prev < 0.0 && g >= 0.0) {
      // Closest approach inside [t-h, t]; bisect on the radial rate.
      double lo = 0.0, hi = h;
      for (int it = 0; it < 48; ++it) {
        const double mid = 0.5 * (lo + hi);
        const State ms = rk4_step(scenario, prev, t - h, mid);
        if (approach_rate(scenario, ms) < 0.0) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      const State ms = rk4_step(scenario, prev, t - h, 0.5 * (lo + hi));
      const double md = dist_to_goal(scenario, ms);
      if (md < best_dist) {
        best_dist = md;
        best = ms;
        best_t = t - h + 0.5 * (lo + hi);
      }
      break;
    }
    g_prev = g;
  }

  result.samples = std::move(samples);
  // Truncate past the closest approach.
  while (result.samples.size() > 1 && result.samples.back().t > best_t) {
    result.samples.pop_back();
  }
  result.samples.push_back({best_t, {best.x1, best.x2}, best.psi});

  result.arrival_time = best_t;
  result.miss = best_dist;
  const double m1 = best.x1 - scenario.goal[0];
  const double m2 = best.x2 - scenario.goal[1];
  result.signed_miss = std::cos(best.psi) * m2 - std::sin(best.psi) * m1;
  result.converged = result.miss <= config.arrival_tolerance;

  double cost = 0.0;
  for (std::size_t i = 1; i < result.samples.size(); ++i) {
    const ShotSample& a = result.samples[i - 1];
    const ShotSample& b = result.samples[i];
    cost += scenario.field.value(b.x, b.t) * (b.t - a.t);
  }
  cost += scenario.lambda_bolza * result.arrival_time;
  result.cost = cost;
  return result;
}

ShotResult solve(const Scenario& scenario, const ShootConfig& config) {
  const double two_pi = 2.0 * M_PI;
  const int K = config.heading_grid;
  std::vector<ShotResult> grid(K);
  for (int j = 0; j < K; ++j) {
    grid[j] = integrate(scenario, two_pi * j / K, config);
  }

  std::vector<ShotResult> candidates;
  for (const ShotResult& r : grid) {
    if (r.converged) candidates.push_back(r);
  }

  for (int j = 0; j < K; ++j) {
    const ShotResult& a = grid[j];
    const ShotResult& b = grid[(j + 1) % K];
    if (a.signed_miss == 0.0 || a.signed_miss * b.signed_miss >= 0.0) continue;
    double lo = two_pi * j / K;
    double hi = two_pi * (j + 1) / K;
    double s_lo = a.signed_miss;
    ShotResult best;
    best.miss = std::numeric_limits<double>::infinity();
    for (int it = 0; it < config.refine_iterations; ++it) {
      const double mid = 0.5 * (lo + hi);
      ShotResult r = integrate(scenario, mid, config);
      if (r.miss < best.miss) best = r;
      if (r.signed_miss == 0.0) break;
      if (r.signed_miss * s_lo > 0.0) {
        lo = mid;
        s_lo = r.signed_miss;
      } else {
        hi = mid;
      }
    }
    if (best.converged) candidates.push_back(best);
  }

  ShotResult out;
  out.converged = false;
  if (candidates.empty()) {
    // Report the least-miss shot honestly as a non-converged result.
    out = grid[0];
    for (const ShotResult& r : grid) {
      if (r.miss < out.miss) out = r;
    }
    out.converged = false;
    return out;
  }
  auto better = [](const ShotResult& r, const ShotResult& cur) {
    return r.cost < cur.cost - 1e-12 ||
           (std::abs(r.cost - cur.cost) <= 1e-12 && r.psi0 < cur.psi0);
  };

  // Every heading whose closest approach is within the arrival tolerance is
  // an admissible answer, and the cost varies to first order across that
  // window, so its minimum sits at a window edge rather than at the zero of
  // the miss. Walk outward from each root and bisect onto both edges,
  // keeping the cheapest converged shot seen.
  auto scan_window = [&](const ShotResult& root, ShotResult& best) {
    const double step = two_pi / 1024.0;
    for (const double dir : {-1.0, 1.0}) {
      double inside = root.psi0;
      double outside = inside;
      bool found_edge = false;
      for (int k = 1; k <= 64; ++k) {
        const double psi = root.psi0 + dir * step * k;
        const ShotResult r = integrate(scenario, psi, config);
        if (!r.converged) {
          outside = psi;
          found_edge = true;
          break;
        }
        if (better(r, best)) best = r;
        inside = psi;
      }
      if (!found_edge) continue;
      for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (inside + outside);
        const ShotResult r = integrate(scenario, mid, config);
        if (r.converged) {
          if (better(r, best)) best = r;
          inside = mid;
        } else {
          outside = mid;
        }
      }
    }
  };

  out = candidates[0];
  for (const ShotResult& r : candidates) {
    if (better(r, out)) out = r;
  }
  for (const ShotResult& r : candidates) {
    if (r.cost <= out.cost + 1e-3) scan_window(r, out);
  }
  return out;
}

std::optional<double> cost_gap(double cost_pinn, const ShotResult& baseline) {
  if (!baseline.converged) return std::nullopt;
  if (!(baseline.cost > 0.0)) {
    throw std::domain_error("cost_gap: baseline cost must be positive");
  }
  return (cost_pinn - baseline.cost) / baseline.cost;
}

}  // namespace minexp
