#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "minexp/autodiff.hpp"
#include "minexp/threat_field.hpp"

using namespace minexp;

namespace {

ThreatField two_bump_field(TemporalMode mode) {
  return ThreatField({{0.8, {2.0, 1.0}, 0.1, 0.02, 0.08},
                      {0.5, {-3.0, 4.0}, 0.06, -0.01, 0.09}},
                     5.0, 1.0, mode);
}

}  // namespace

TEST_CASE("single centered basis: closed-form values") {
  const ThreatField f({{1.0, {0.0, 0.0}, 1.0, 0.0, 1.0}}, 5.0, 1.0,
                      TemporalMode::kStatic);
  // At the center the bump is exp(0) = 1: c = 1 + 5.
  CHECK(f.value({0.0, 0.0}, 0.0) == doctest::Approx(6.0).epsilon(1e-15));
  // At (1, 0): q = 1, c = 1 + 5 e^{-1/2}.
  CHECK(f.value({1.0, 0.0}, 0.0) ==
        doctest::Approx(1.0 + 5.0 * std::exp(-0.5)).epsilon(1e-15));
  // At (1, 1): q = 2, c = 1 + 5 e^{-1}.
  CHECK(f.value({1.0, 1.0}, 7.0) ==
        doctest::Approx(1.0 + 5.0 * std::exp(-1.0)).epsilon(1e-15));
  // Gradient at the center vanishes.
  const auto g = f.grad_x({0.0, 0.0}, 0.0);
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 0.0);
}

TEST_CASE("spatial gradient matches finite differences at random points") {
  for (TemporalMode mode : {TemporalMode::kStatic, TemporalMode::kCosine}) {
    CAPTURE(static_cast<int>(mode));
    const ThreatField f = two_bump_field(mode);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-14.0, 14.0);
    std::uniform_real_distribution<double> ut(0.0, 5.0);
    const double h = 1e-6;
    for (int n = 0; n < 1000; ++n) {
      const double x1 = u(rng), x2 = u(rng), t = ut(rng);
      const auto g = f.grad_x({x1, x2}, t);
      const double g1 =
          (f.value({x1 + h, x2}, t) - f.value({x1 - h, x2}, t)) / (2 * h);
      const double g2 =
          (f.value({x1, x2 + h}, t) - f.value({x1, x2 - h}, t)) / (2 * h);
      CHECK(std::abs(g[0] - g1) < 1e-7);
      CHECK(std::abs(g[1] - g2) < 1e-7);
    }
  }
}

TEST_CASE("time derivative matches finite differences") {
  const ThreatField f = two_bump_field(TemporalMode::kCosine);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-12.0, 12.0);
  std::uniform_real_distribution<double> ut(0.0, 6.0);
  const double h = 1e-6;
  for (int n = 0; n < 500; ++n) {
    const double x1 = u(rng), x2 = u(rng), t = ut(rng);
    const double want =
        (f.value({x1, x2}, t + h) - f.value({x1, x2}, t - h)) / (2 * h);
    CHECK(std::abs(f.dc_dt({x1, x2}, t) - want) < 1e-7);
  }
}

TEST_CASE("static fields are exactly time independent") {
  const ThreatField f = two_bump_field(TemporalMode::kStatic);
  for (double t : {0.0, 0.5, 3.0, 100.0}) {
    CHECK(f.value({1.5, -2.0}, t) == f.value({1.5, -2.0}, 0.0));
    CHECK(f.dc_dt({1.5, -2.0}, t) == 0.0);
  }
}

TEST_CASE("basis order does not change the field") {
  const ThreatField a({{0.8, {2.0, 1.0}, 0.1, 0.02, 0.08},
                       {0.5, {-3.0, 4.0}, 0.06, -0.01, 0.09}},
                      5.0, 1.0, TemporalMode::kCosine);
  const ThreatField b({{0.5, {-3.0, 4.0}, 0.06, -0.01, 0.09},
                       {0.8, {2.0, 1.0}, 0.1, 0.02, 0.08}},
                      5.0, 1.0, TemporalMode::kCosine);
  CHECK(a.value({0.3, -0.7}, 1.2) ==
        doctest::Approx(b.value({0.3, -0.7}, 1.2)).epsilon(1e-15));
}

TEST_CASE("cosine mode modulates each basis by (a0/2)(1.5 + cos(a0 t))") {
  const double a0 = 0.8;
  const ThreatField f({{a0, {0.0, 0.0}, 1.0, 0.0, 1.0}}, 5.0, 1.0,
                      TemporalMode::kCosine);
  const double t = 1.7;
  const double want = 1.0 + 5.0 * (a0 / 2.0) * (1.5 + std::cos(a0 * t));
  CHECK(f.value({0.0, 0.0}, t) == doctest::Approx(want).epsilon(1e-15));
}

TEST_CASE("non positive definite shapes are rejected") {
  CHECK_THROWS_AS(ThreatField({{1.0, {0.0, 0.0}, -1.0, 0.0, 1.0}}, 5.0, 1.0,
                              TemporalMode::kStatic),
                  std::invalid_argument);
  // det = 1*1 - 2*2 < 0
  CHECK_THROWS_AS(ThreatField({{1.0, {0.0, 0.0}, 1.0, 2.0, 1.0}}, 5.0, 1.0,
                              TemporalMode::kStatic),
                  std::invalid_argument);
}

TEST_CASE("fields that dip non-positive on the workspace are rejected") {
  // A big negative offset makes c <= 0 far from the bump.
  CHECK_THROWS_AS(ThreatField({{1.0, {0.0, 0.0}, 1.0, 0.0, 1.0}}, 5.0, -1.0,
                              TemporalMode::kStatic),
                  std::invalid_argument);
}

TEST_CASE("templated evaluation agrees with the double path and with autodiff") {
  const ThreatField f = two_bump_field(TemporalMode::kCosine);
  const double x1 = 1.3, x2 = -2.4, t = 0.9;
  CHECK(f.value_of<double>(x1, x2, t) ==
        doctest::Approx(f.value({x1, x2}, t)).epsilon(1e-15));

  ad::Tape tape;
  ad::Var vx1 = tape.leaf(x1);
  ad::Var vx2 = tape.leaf(x2);
  ad::Var vt = tape.leaf(t);
  ad::Var c = f.value_of<ad::Var>(vx1, vx2, vt);
  CHECK(c.value() == doctest::Approx(f.value({x1, x2}, t)).epsilon(1e-15));
  std::array<ad::Var, 3> in{vx1, vx2, vt};
  const std::vector<double> g = tape.gradient(c, in);
  const auto gx = f.grad_x({x1, x2}, t);
  CHECK(g[0] == doctest::Approx(gx[0]).epsilon(1e-12));
  CHECK(g[1] == doctest::Approx(gx[1]).epsilon(1e-12));
  CHECK(g[2] == doctest::Approx(f.dc_dt({x1, x2}, t)).epsilon(1e-12));
}
