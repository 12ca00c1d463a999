#include "membif/diagnostics.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "membif/stencil.hpp"

namespace membif {

namespace {

double first_integral_density(const ProfileState& s) {
  const double c = std::cos(s.phi);
  return -2.0 * c * c / s.z * s.r;
}

double first_integral_lhs(double c_o, const ProfileState& s) {
  return c_o * s.r * s.r - s.r * std::sin(s.phi);
}

}  // namespace

double first_integral_residual(const ProfileCurve& curve) {
  const double c_o = curve.params().c_o();
  const auto samples = curve.samples();
  double integral = 0.0;
  double worst = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double a = samples[i - 1].tau;
    const double b = samples[i].tau;
    integral += boost::math::quadrature::gauss<double, 10>::integrate(
        [&](double t) { return first_integral_density(curve.state_at(t)); }, a, b);
    worst = std::max(worst, std::abs(first_integral_lhs(c_o, samples[i]) - integral));
  }
  return worst;
}

double first_integral_residual(double c_o, const UniformSamples& u) {
  const std::size_t n = u.size();
  if (n == 0) return 0.0;
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = first_integral_density(u.at(i));
  const double h = u.step;
  double integral = 0.0;
  double worst = std::abs(first_integral_lhs(c_o, u.at(0)));
  if (n < 4) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      integral += 0.5 * h * (f[i] + f[i + 1]);
      worst = std::max(worst, std::abs(first_integral_lhs(c_o, u.at(i + 1)) - integral));
    }
    return worst;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    // Four-point cubic rule over [i, i+1]; one-sided at the ends.
    double piece;
    if (i == 0) {
      piece = h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]);
    } else if (i + 2 == n) {
      piece = h / 24.0 * (9.0 * f[i + 1] + 19.0 * f[i] - 5.0 * f[i - 1] + f[i - 2]);
    } else {
      piece = h / 24.0 * (-f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2]);
    }
    integral += piece;
    worst = std::max(worst, std::abs(first_integral_lhs(c_o, u.at(i + 1)) - integral));
  }
  return worst;
}

ShapeReport shape_diagnostics(const ProfileCurve& curve) {
  const auto& p = curve.params();
  if (!p.sigma0_admissible()) {
    throw Error(ErrorKind::NotAdmissible, "shape diagnostics need z_o < -1/c_o");
  }
  const double c_o = p.c_o();
  const auto samples = curve.samples();
  ShapeReport rep;
  rep.convex = std::all_of(samples.begin(), samples.end(),
                           [&](const ProfileState& s) { return geometry_of(c_o, s).kappa < 0.0; });

  // Locate phi = pi/2 on the dense output.
  const double half_pi = 0.5 * std::numbers::pi;
  std::size_t k = 1;
  while (k < samples.size() && samples[k].phi > half_pi) ++k;
  if (k == samples.size()) throw Error(ErrorKind::SolverFailure, "no vertical tangent on the curve");
  auto g = [&](double t) { return curve.state_at(t).phi - half_pi; };
  const double tau_v = ode::detail::locate_root(g, samples[k - 1].tau, samples[k - 1].phi - half_pi, samples[k].tau,
                                                samples[k].phi - half_pi, 1e-12 * std::abs(p.z_o()));
  rep.vertical_tangent_tau = tau_v;
  rep.vertical_tangent_r = curve.state_at(tau_v).r;

  const double a = p.axis_rate();
  rep.sin_phi_bound_ok = true;
  for (const auto& s : samples) {
    if (s.tau > tau_v) break;
    if (std::sin(s.phi) < a * s.r - 1e-9) rep.sin_phi_bound_ok = false;
  }
  return rep;
}

double fourth_order_residual(const ProfileCurve& curve, std::size_t n) {
  return fourth_order_residual(curve.params().c_o(), resample_interior(curve, n));
}

double fourth_order_residual(double c_o, const UniformSamples& u) {
  const std::size_t n = u.size();
  if (n < 16) throw Error(ErrorKind::TooFewSamples, "fourth-order residual needs at least 16 samples");
  std::vector<double> H(n);
  std::vector<double> K(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto g = geometry_of(c_o, u.at(i));
    H[i] = g.H;
    K[i] = g.K;
  }
  const double h = u.step;
  double worst = 0.0;
  for (std::size_t i = stencil::kHalfWidth; i + stencil::kHalfWidth < n; ++i) {
    // Delta H = H'' + (r'/r) H'; the sign of d/dsigma cancels in both terms.
    const double r_t = stencil::d1(u.r, i, h);
    const double lap = stencil::d2(H, i, h) + r_t / u.r[i] * stencil::d1(H, i, h);
    const double res = lap + 2.0 * (H[i] + c_o) * (H[i] * (H[i] - c_o) - K[i]);
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

double axis_curvature_extrapolated(const ModelParams& params, double delta_rel) {
  if (!(delta_rel > 0.0 && delta_rel <= 0.05)) throw Error(ErrorKind::InvalidOffset, "delta_rel must lie in (0, 0.05]");
  const double c_o = params.c_o();
  const double len = std::min(std::abs(params.z_o()), 1.0 / c_o);
  const double d = delta_rel * len;
  IntegrationOptions io;
  io.tol = {1e-13, 1e-15};
  io.max_step_rel = 1e-3 * len / std::abs(params.z_o());
  const auto curve = integrate_profile(params, StopCondition::arc_length(4.0 * d * (1.0 + 1e-9)), io);
  auto f = [&](double t) { return phi_sigma(c_o, curve.state_at(t)); };
  // phi_tau is even in tau
  const double f1 = f(d), f2 = f(2.0 * d), f4 = f(4.0 * d);
  const double r1 = (4.0 * f1 - f2) / 3.0, r2 = (4.0 * f2 - f4) / 3.0;
  return (16.0 * r1 - r2) / 15.0;
}

double energy(const ProfileCurve& curve) {
  const double c_o = curve.params().c_o();
  auto density = [&](double t) {
    const auto s = curve.state_at(t);
    return (1.0 / (s.z * s.z) - 2.0 * c_o * std::cos(s.phi) / s.z) * s.r;
  };
  const auto samples = curve.samples();
  const double tol = 1e-12;
  double total = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(density, samples[i - 1].tau,
                                                                           samples[i].tau, 8, tol);
  }
  return 2.0 * std::numbers::pi * total;
}

}  // namespace membif
