#pragma once

// Consistency checks and scalar functionals on a generating curve.

#include <cstddef>

#include "membif/geometry.hpp"

namespace membif {

/// max over samples of |c_o r^2 - r sin(phi) - int_0^tau (-2 cos^2(phi) / z) r|,
/// with the integral accumulated by Gauss-Legendre quadrature on the dense output.
double first_integral_residual(const ProfileCurve& curve);

/// Same identity on equispaced samples starting at the axis (tau = 0), using a
/// fourth-order cumulative quadrature.
double first_integral_residual(double c_o, const UniformSamples& samples);

struct ShapeReport {
  bool convex = false;
  double vertical_tangent_r = 0.0;
  double vertical_tangent_tau = 0.0;
  bool sin_phi_bound_ok = false;
};

/// Requires a sigma0-admissible curve. The bound sin(phi) >= (1/z_o + c_o) r is
/// checked on the arc between the axis and the vertical tangent, where the curve
/// is a graph over r.
ShapeReport shape_diagnostics(const ProfileCurve& curve);

/// Residual of Delta H + 2 (H + c_o)(H (H - c_o) - K) = 0, with Delta H from
/// centred differences of H on the interior window.
double fourth_order_residual(const ProfileCurve& curve, std::size_t n = 4000);
double fourth_order_residual(double c_o, const UniformSamples& samples);

/// phi_sigma from the shape equation at tau = d, 2d, 4d with d = delta_rel min(|z_o|, 1/c_o),
/// Richardson-extrapolated in tau^2 to the axis. Integrates its own short, finely
/// stepped arc so that dense-output error near the seed stays below the target.
double axis_curvature_extrapolated(const ModelParams& params, double delta_rel = 0.02);

/// G = 2 pi int_0^ell (1/z^2 + 2 c_o nu3 / z) r dtau.
double energy(const ProfileCurve& curve);

}  // namespace membif
