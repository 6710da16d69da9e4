#pragma once

#include "cocyclab/base.hpp"
#include "cocyclab/errors.hpp"
#include "cocyclab/linalg.hpp"

#include <cmath>

namespace cocyclab {

/// Parameters of the localized rotation in the center-unstable bundle.
struct PerturbationParams {
  BasePoint p;                 // ball center; must not be periodic
  double r = 0.05;             // ball radius
  double inner_fraction = 0.5; // bump is 1 on B(p, inner_fraction * r)
  double omega = 0.0;          // full rotation angle, in [0, pi/2)
  int plane_first = 0;         // frame index inside E^cu rotated towards plane_second
  int plane_second = 1;
  double epsilon = 0.0;        // C^0 budget ||A - B|| <= epsilon
  double delta = 0.0;          // epsilon / ||A restricted to E^cu||

  /// Upper bound on the cosine of the displaced angle.
  double cos_bound() const { return std::cos(omega); }
  /// ||id - Phi(1)||
  double rotation_gap() const { return 2.0 * std::sin(omega / 2.0); }
};

/// Piecewise-linear bump in dist(p, x): 1 inside inner_fraction * r, 0 outside r.
inline double bump_profile(const PerturbationParams& params, double dist) {
  const double inner = params.inner_fraction * params.r;
  if (dist <= inner) return 1.0;
  if (dist >= params.r) return 0.0;
  return (params.r - dist) / (params.r - inner);
}

inline double bump(const PerturbationParams& params, const BaseSystem& sys, const BasePoint& x) {
  return bump_profile(params, distance(sys, params.p, x));
}

/// Phi(t): rotation by t * omega in the configured plane of R^D.
inline Eigen::MatrixXd rotation_isotopy(const PerturbationParams& params, double t, Eigen::Index dim) {
  if (params.plane_first < 0 || params.plane_second < 0 || params.plane_first >= dim ||
      params.plane_second >= dim || params.plane_first == params.plane_second) {
    throw PreconditionError("rotation plane indices must be distinct and below D");
  }
  return plane_rotation<double>(dim, params.plane_first, params.plane_second, t * params.omega);
}

}  // namespace cocyclab
