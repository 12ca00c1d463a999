#include "membif/geometry.hpp"

#include <cmath>

namespace membif {

double sin_phi_over_r(double c_o, const ProfileState& s) {
  if (s.r == 0.0) return 1.0 / s.z + c_o;
  return std::sin(s.phi) / s.r;
}

double phi_sigma(double c_o, const ProfileState& s) {
  if (s.r == 0.0) return 1.0 / s.z + c_o;
  return -2.0 * std::cos(s.phi) / s.z - std::sin(s.phi) / s.r + 2.0 * c_o;
}

GeometryPoint geometry_of(double c_o, const ProfileState& s) {
  const double ps = phi_sigma(c_o, s);
  const double spr = sin_phi_over_r(c_o, s);
  GeometryPoint g;
  g.H = -0.5 * (ps + spr);
  g.K = ps * spr;
  g.nu3 = -std::cos(s.phi);
  g.kappa = -ps;
  g.q = s.r * std::sin(s.phi) - s.z * std::cos(s.phi);
  g.sff_norm2 = ps * ps + spr * spr;
  g.xi = g.H + g.nu3 / s.z;
  return g;
}

GeometryPoint geometry_at(const ProfileCurve& curve, double tau) {
  return geometry_of(curve.params().c_o(), curve.state_at(tau));
}

UniformSamples resample_uniform(const ProfileCurve& curve, std::size_t n, double tau_begin, double tau_end) {
  if (n < 2) throw Error(ErrorKind::TooFewSamples, "resampling needs at least two points");
  UniformSamples u;
  u.step = (tau_end - tau_begin) / static_cast<double>(n - 1);
  u.tau.resize(n);
  u.r.resize(n);
  u.z.resize(n);
  u.phi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = (i + 1 == n) ? tau_end : tau_begin + u.step * static_cast<double>(i);
    const auto s = curve.state_at(t);
    u.tau[i] = t;
    u.r[i] = s.r;
    u.z[i] = s.z;
    u.phi[i] = s.phi;
  }
  return u;
}

UniformSamples resample_interior(const ProfileCurve& curve, std::size_t n) {
  return resample_uniform(curve, n, 0.02 * curve.ell(), 0.98 * curve.ell());
}

}  // namespace membif
