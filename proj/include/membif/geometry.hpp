#pragma once

#include <cstddef>
#include <vector>

#include "membif/profile.hpp"

namespace membif {

/// Pointwise geometry of the surface of revolution. Signs follow the
/// boundary-based parameter sigma: kappa = -phi_sigma, nu3 = -cos(phi).
struct GeometryPoint {
  double H = 0.0;          // mean curvature, -(phi_sigma + sin(phi)/r) / 2
  double K = 0.0;          // Gauss curvature, phi_sigma sin(phi) / r
  double nu3 = 0.0;
  double kappa = 0.0;      // curvature of the generating curve
  double q = 0.0;          // support function X . nu
  double sff_norm2 = 0.0;  // |d nu|^2 = 4H^2 - 2K
  double xi = 0.0;         // H + nu3 / z, equal to -c_o on solutions
};

/// phi_sigma from the profile system; at r = 0 the axis limit 1/z_o + c_o.
double phi_sigma(double c_o, const ProfileState& s);
/// sin(phi) / r with its axis limit.
double sin_phi_over_r(double c_o, const ProfileState& s);

GeometryPoint geometry_of(double c_o, const ProfileState& s);
GeometryPoint geometry_at(const ProfileCurve& curve, double tau);

/// The curve resampled on an equispaced tau grid, for finite-difference checks.
struct UniformSamples {
  double step = 0.0;
  std::vector<double> tau;
  std::vector<double> r;
  std::vector<double> z;
  std::vector<double> phi;

  std::size_t size() const { return tau.size(); }
  ProfileState at(std::size_t i) const { return {tau[i], r[i], z[i], phi[i]}; }
};

UniformSamples resample_uniform(const ProfileCurve& curve, std::size_t n, double tau_begin, double tau_end);

/// Resample over the interior window [0.02 ell, 0.98 ell] used by the residual checks.
UniformSamples resample_interior(const ProfileCurve& curve, std::size_t n);

}  // namespace membif
