// Radial-basis spatiotemporal threat fields with analytic spatial gradients
// and time derivatives.
//
//   static:  c(x)    = offset + amplitude * sum_i a0_i exp(-q_i(x)/2)
//   cosine:  c(x, t) = offset + amplitude * sum_i (a0_i/2)(1.5 + cos(a0_i t))
//                                           * exp(-q_i(x)/2)
// with q_i(x) = (x - a_i)^T Lambda_i (x - a_i), Lambda_i symmetric positive
// definite, so each basis is a bounded bump peaking at its center.

#pragma once

#include <array>
#include <cmath>
#include <vector>

namespace minexp {

struct RadialBasis {
  double peak = 1.0;                    // a0
  std::array<double, 2> center{0, 0};   // a
  double lam11 = 1.0, lam12 = 0.0, lam22 = 1.0;  // Lambda (symmetric)
};

enum class TemporalMode { kStatic, kCosine };

class ThreatField {
 public:
  ThreatField() = default;
  // Throws std::invalid_argument when a shape matrix is not positive definite
  // or the field is not strictly positive on the validation grid.
  ThreatField(std::vector<RadialBasis> bases, double amplitude, double offset,
              TemporalMode mode, double workspace_half_width = 15.0);

  double value(const std::array<double, 2>& x, double t) const;
  std::array<double, 2> grad_x(const std::array<double, 2>& x, double t) const;
  double dc_dt(const std::array<double, 2>& x, double t) const;

  // Generic evaluation for any scalar type supporting +,-,*,/ with doubles
  // and exp/sin/cos (doubles or autodiff Vars).
  template <class T>
  T value_of(const T& x1, const T& x2, const T& t) const {
    T acc = 0.0 * x1 + offset_;
    for (const RadialBasis& b : bases_) {
      acc = acc + amplitude_ * time_factor(b, t) * bump(b, x1, x2);
    }
    return acc;
  }

  template <class T>
  std::array<T, 2> grad_x_of(const T& x1, const T& x2, const T& t) const {
    T g1 = 0.0 * x1;
    T g2 = 0.0 * x1;
    for (const RadialBasis& b : bases_) {
      const T d1 = x1 - b.center[0];
      const T d2 = x2 - b.center[1];
      const T s = amplitude_ * time_factor(b, t) * bump(b, x1, x2);
      g1 = g1 - s * (b.lam11 * d1 + b.lam12 * d2);
      g2 = g2 - s * (b.lam12 * d1 + b.lam22 * d2);
    }
    return {g1, g2};
  }

  template <class T>
  T dc_dt_of(const T& x1, const T& x2, const T& t) const {
    T acc = 0.0 * x1;
    if (mode_ == TemporalMode::kStatic) return acc;
    for (const RadialBasis& b : bases_) {
      using std::sin;
      acc = acc - amplitude_ * (b.peak / 2.0) * b.peak * sin(b.peak * t) *
                      bump(b, x1, x2);
    }
    return acc;
  }

  const std::vector<RadialBasis>& bases() const { return bases_; }
  double amplitude() const { return amplitude_; }
  double offset() const { return offset_; }
  TemporalMode mode() const { return mode_; }
  bool is_static() const { return mode_ == TemporalMode::kStatic; }

 private:
  template <class T>
  T bump(const RadialBasis& b, const T& x1, const T& x2) const {
    using std::exp;
    const T d1 = x1 - b.center[0];
    const T d2 = x2 - b.center[1];
    const T q = b.lam11 * d1 * d1 + 2.0 * b.lam12 * d1 * d2 + b.lam22 * d2 * d2;
    return exp(-0.5 * q);
  }

  template <class T>
  T time_factor(const RadialBasis& b, const T& t) const {
    using std::cos;
    if (mode_ == TemporalMode::kStatic) {
      return 0.0 * t + b.peak;
    }
    return (b.peak / 2.0) * (1.5 + cos(b.peak * t));
  }

  std::vector<RadialBasis> bases_;
  double amplitude_ = 5.0;
  double offset_ = 1.0;
  TemporalMode mode_ = TemporalMode::kStatic;
};

}  // namespace minexp
