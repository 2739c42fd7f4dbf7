#include "minexp/threat_field.hpp"

#include <stdexcept>
#include <string>

namespace minexp {

ThreatField::ThreatField(std::vector<RadialBasis> bases, double amplitude,
                         double offset, TemporalMode mode,
                         double workspace_half_width)
    : bases_(std::move(bases)),
      amplitude_(amplitude),
      offset_(offset),
      mode_(mode) {
  for (std::size_t i = 0; i < bases_.size(); ++i) {
    const RadialBasis& b = bases_[i];
    const double det = b.lam11 * b.lam22 - b.lam12 * b.lam12;
    if (!(b.lam11 > 0.0) || !(det > 0.0)) {
      throw std::invalid_argument(
          "threat_field: basis " + std::to_string(i) +
          " shape matrix is not positive definite");
    }
  }

  // Positivity is required over the workspace for all times; check on a grid
  // (cosine mode's time factor spans [peak/2 * 0.5, peak/2 * 2.5], so probing
  // a period of each basis covers the extremes well enough numerically).
  const int n = 41;
  const double w = workspace_half_width;
  const std::array<double, 5> probes{0.0, 0.7, 1.6, 2.9, 4.3};
  for (int ix = 0; ix < n; ++ix) {
    for (int iy = 0; iy < n; ++iy) {
      const std::array<double, 2> x{-w + 2.0 * w * ix / (n - 1),
                                    -w + 2.0 * w * iy / (n - 1)};
      for (double t : probes) {
        if (!(value(x, t) > 0.0)) {
          throw std::invalid_argument(
              "threat_field: field is not strictly positive over the "
              "workspace");
        }
        if (mode_ == TemporalMode::kStatic) break;
      }
    }
  }
}

double ThreatField::value(const std::array<double, 2>& x, double t) const {
  return value_of<double>(x[0], x[1], t);
}

std::array<double, 2> ThreatField::grad_x(const std::array<double, 2>& x,
                                          double t) const {
  return grad_x_of<double>(x[0], x[1], t);
}

double ThreatField::dc_dt(const std::array<double, 2>& x, double t) const {
  return dc_dt_of<double>(x[0], x[1], t);
}

}  // namespace minexp
