#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "minexp/pmp.hpp"

using namespace minexp;

namespace {

Scenario flat_scenario() {
  Scenario s;
  s.start = {-10.0, -10.0};
  s.goal = {10.0, 10.0};
  s.speed = 10.0;
  // Amplitude zero: the field is the constant offset 1.
  s.field = ThreatField({{0.5, {0.0, 0.0}, 0.05, 0.0, 0.05}}, 0.0, 1.0,
                        TemporalMode::kStatic);
  return s;
}

Scenario bump_scenario(TemporalMode mode) {
  Scenario s;
  s.start = {-10.0, -10.0};
  s.goal = {10.0, 10.0};
  s.speed = 10.0;
  s.field = ThreatField({{0.8, {1.0, -2.0}, 0.07, 0.01, 0.05}}, 5.0, 1.0, mode);
  return s;
}

}  // namespace

TEST_CASE("hamiltonian closed forms") {
  const Scenario s = flat_scenario();
  // H = 0 + c + p . v (cos, sin). With p = 0: H = c = 1.
  CHECK(hamiltonian(s, {{0.0, 0.0}, 0.3, {0.0, 0.0}, 0.0}) ==
        doctest::Approx(1.0).epsilon(1e-15));
  // With psi = 0, p = (-0.1, 0): H = 1 - 1 = 0.
  CHECK(hamiltonian(s, {{0.0, 0.0}, 0.0, {-0.1, 0.0}, 0.0}) ==
        doctest::Approx(0.0).epsilon(1e-15));
  // Bolza term shifts H by lambda.
  Scenario sl = s;
  sl.lambda_bolza = 2.5;
  CHECK(hamiltonian(sl, {{0.0, 0.0}, 0.0, {-0.1, 0.0}, 0.0}) ==
        doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("stationary heading minimizes H over a brute-force grid") {
  const Scenario s = bump_scenario(TemporalMode::kStatic);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n = 0; n < 50; ++n) {
    const std::array<double, 2> p{u(rng), u(rng)};
    if (std::hypot(p[0], p[1]) < 1e-3) continue;
    const double psi_star = stationary_heading(p);
    const auto h_of = [&](double psi) {
      return hamiltonian(s, {{1.0, 2.0}, psi, p, 0.0});
    };
    double best = h_of(0.0);
    for (int j = 1; j < 720; ++j) {
      best = std::min(best, h_of(2.0 * M_PI * j / 720.0));
    }
    // The closed form must beat or match every grid point.
    CHECK(h_of(psi_star) <= best + 1e-12);
    // And the analytic stationarity condition must hold.
    const double dh =
        -p[0] * s.speed * std::sin(psi_star) + p[1] * s.speed * std::cos(psi_star);
    CHECK(std::abs(dh) < 1e-12);
  }
  CHECK_THROWS_AS(stationary_heading({0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("hd_profile is identically zero for static fields") {
  const Scenario s = bump_scenario(TemporalMode::kStatic);
  const int N = 17;
  std::vector<double> tau(N);
  std::vector<std::array<double, 2>> xs(N);
  for (int i = 0; i < N; ++i) {
    tau[i] = static_cast<double>(i) / (N - 1);
    xs[i] = {-10.0 + 20.0 * tau[i], -10.0 + 20.0 * tau[i]};
  }
  const std::vector<double> hd = hd_profile(s, 2.0, tau, xs);
  for (double v : hd) CHECK(v == 0.0);
}

TEST_CASE("hd_profile matches a closed-form integral on a single bump") {
  // Hold x at the basis center so the spatial factor is 1; then
  // H_d(t) = -int_t^tf dc/dt dt' = c(t) - c(tf)
  //        = amp (a0/2) (cos(a0 t) - cos(a0 tf)).
  const double a0 = 0.8, amp = 5.0, tf = 3.0;
  Scenario s;
  s.start = {1.0, -2.0};
  s.goal = {1.0, -2.0001};
  s.field = ThreatField({{a0, {1.0, -2.0}, 0.07, 0.0, 0.05}}, amp, 1.0,
                        TemporalMode::kCosine);
  const int N = 2001;
  std::vector<double> tau(N);
  std::vector<std::array<double, 2>> xs(N, {1.0, -2.0});
  for (int i = 0; i < N; ++i) tau[i] = static_cast<double>(i) / (N - 1);
  const std::vector<double> hd = hd_profile(s, tf, tau, xs);
  CHECK(hd[N - 1] == 0.0);
  for (int i = 0; i < N; i += 100) {
    const double t = tau[i] * tf;
    const double want =
        amp * (a0 / 2.0) * (std::cos(a0 * t) - std::cos(a0 * tf));
    CHECK(hd[i] == doctest::Approx(want).epsilon(1e-6));
  }
}

TEST_CASE("hd_profile trapezoid converges at second order") {
  const Scenario s = bump_scenario(TemporalMode::kCosine);
  const double tf = 2.5;
  auto hd0_with = [&](int N) {
    std::vector<double> tau(N);
    std::vector<std::array<double, 2>> xs(N);
    for (int i = 0; i < N; ++i) {
      tau[i] = static_cast<double>(i) / (N - 1);
      xs[i] = {-10.0 + 20.0 * tau[i], -10.0 + 15.0 * tau[i]};
    }
    return hd_profile(s, tf, tau, xs)[0];
  };
  const double ref = hd0_with(8193);
  const double e1 = std::abs(hd0_with(65) - ref);
  const double e2 = std::abs(hd0_with(129) - ref);
  CHECK(e1 / e2 > 3.5);  // halving the step cuts the error ~4x
  CHECK(e1 / e2 < 4.5);
}

TEST_CASE("hd_profile rejects non-uniform grids and size mismatches") {
  const Scenario s = bump_scenario(TemporalMode::kCosine);
  std::vector<double> tau{0.0, 0.3, 1.0};
  std::vector<std::array<double, 2>> xs(3, {0.0, 0.0});
  CHECK_THROWS_AS(hd_profile(s, 1.0, tau, xs), std::invalid_argument);
  std::vector<double> tau2{0.0, 0.5, 1.0};
  std::vector<std::array<double, 2>> xs2(2, {0.0, 0.0});
  CHECK_THROWS_AS(hd_profile(s, 1.0, tau2, xs2), std::invalid_argument);
}

TEST_CASE("heading_rate closed form and error cases") {
  const Scenario s = bump_scenario(TemporalMode::kStatic);
  const std::array<double, 2> x{0.5, -1.0};
  const double psi = 0.7;
  const auto g = s.field.grad_x(x, 0.0);
  const double c = s.field.value(x, 0.0);
  const double want =
      s.speed * (std::cos(psi) * g[1] - std::sin(psi) * g[0]) / (s.lambda_bolza + c);
  CHECK(heading_rate(s, x, psi, 0.0) == doctest::Approx(want).epsilon(1e-14));

  const Scenario tv = bump_scenario(TemporalMode::kCosine);
  CHECK_THROWS_AS(heading_rate(tv, x, psi, 0.0), std::invalid_argument);
}

TEST_CASE("heading_rate is invariant when the field is scaled by a power of two") {
  // c -> k c (amplitude and offset both scaled) multiplies the gradient and
  // the denominator lambda + c by the same k when lambda = 0, so psi_dot is
  // unchanged; with k a power of two the cancellation is bitwise exact.
  const double k = 4.0;
  Scenario a = bump_scenario(TemporalMode::kStatic);
  Scenario b = a;
  b.field = ThreatField({{0.8, {1.0, -2.0}, 0.07, 0.01, 0.05}}, 5.0 * k,
                        1.0 * k, TemporalMode::kStatic);
  const std::array<double, 2> x{2.0, 0.5};
  CHECK(heading_rate(a, x, 0.3, 0.0) == heading_rate(b, x, 0.3, 0.0));
}

TEST_CASE("path_cost matches Simpson quadrature on a smooth path") {
  const Scenario s = bump_scenario(TemporalMode::kStatic);
  const double tf = 3.0;
  auto x_of = [](double tau) -> std::array<double, 2> {
    return {-10.0 + 20.0 * tau + 2.0 * std::sin(M_PI * tau),
            -10.0 + 20.0 * tau};
  };
  const int N = 20001;
  std::vector<std::array<double, 2>> xs(N);
  for (int i = 0; i < N; ++i) xs[i] = x_of(static_cast<double>(i) / (N - 1));
  const double got = path_cost(s, xs, tf);

  // Simpson's rule over the same integrand.
  const int M = 4096;
  double simpson = 0.0;
  for (int i = 0; i <= M; ++i) {
    const double tau = static_cast<double>(i) / M;
    const double w = (i == 0 || i == M) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    simpson += w * s.field.value(x_of(tau), tau * tf);
  }
  simpson *= tf / (3.0 * M);
  CHECK(got == doctest::Approx(simpson).epsilon(1e-3));
  CHECK_THROWS_AS(path_cost(s, {xs[0]}, tf), std::invalid_argument);
}

TEST_CASE("path_cost adds the Bolza term") {
  Scenario s = flat_scenario();
  s.lambda_bolza = 2.0;
  const int N = 11;
  std::vector<std::array<double, 2>> xs(N, {0.0, 0.0});
  // Constant field c = 1: cost = tf * 1 + lambda * tf = 3 tf.
  CHECK(path_cost(s, xs, 1.5) == doctest::Approx(4.5).epsilon(1e-12));
}

TEST_CASE("scenario validation rejects bad setups") {
  Scenario s = flat_scenario();
  s.speed = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  Scenario s2 = flat_scenario();
  s2.goal = s2.start;
  CHECK_THROWS_AS(s2.validate(), std::invalid_argument);
  Scenario s3 = flat_scenario();
  s3.start = {100.0, 0.0};
  CHECK_THROWS_AS(s3.validate(), std::invalid_argument);
}
