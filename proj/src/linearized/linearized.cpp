#include "membif/linearized.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>

#include "membif/stencil.hpp"

namespace membif {

double potential(double c_o, const ProfileState& s) {
  const double c = std::cos(s.phi);
  return geometry_of(c_o, s).sff_norm2 - 2.0 * c * c / (s.z * s.z);
}

double drift(const ProfileState& s) { return std::cos(s.phi) / s.r - 2.0 * std::sin(s.phi) / s.z; }

LinearizedCoeffs linearized_coeffs(double c_o, const ProfileState& s) {
  const double z2 = s.z * s.z;
  return {potential(c_o, s) / z2, s.r / z2, s.r / z2};
}

std::array<double, 5> extended_rhs(const ExtendedState& s, const ModelParams& params) {
  if (s.r == 0.0) throw Error(ErrorKind::AxisSingularity, "extended system is singular on the axis");
  const double c_o = params.c_o();
  const ProfileState ps{0.0, s.r, s.z, s.phi};
  const double phi_s = phi_sigma(c_o, ps);
  return {std::cos(s.phi), std::sin(s.phi), phi_s, s.w, -potential(c_o, ps) * s.h - drift(ps) * s.w - 2.0};
}

// tau-orientation state: r, z, phi, p, p_tau, psi_raw, psi_raw_tau.
struct LinearizedSolution::Trajectory {
  ModelParams params;
  double tau0;
  double ell;
  double v0;  // potential at the axis
  ode::DenseTrajectory<7> dense;

  ode::Vec<7> at(double t) const {
    if (t < tau0) {
      const double t2 = std::max(t, 0.0);
      const auto s = axis_seed(params, t2);
      return {s.r, s.z, s.phi, -0.5 * t2 * t2, -t2, 1.0 - 0.25 * v0 * t2 * t2, -0.5 * v0 * t2};
    }
    return dense(std::min(t, ell));
  }
};

namespace {

std::shared_ptr<const LinearizedSolution::Trajectory> integrate_linear(const ProfileCurve& curve,
                                                                       const LinearizedOptions& opt) {
  const auto& params = curve.params();
  const double c_o = params.c_o();
  const double scale = std::abs(params.z_o());
  const double a = params.axis_rate();
  const double v0 = 2.0 * a * a - 2.0 / (params.z_o() * params.z_o());
  const double tau0 = opt.tau0_rel * scale;
  const double ell = curve.ell();

  // Even starts: u = u0 + u2 tau^2 with 4 u2 + V(0) u0 = source.
  const auto s0 = axis_seed(params, tau0);
  const ode::Vec<7> y0{s0.r, s0.z, s0.phi, -0.5 * tau0 * tau0, -tau0, 1.0 - 0.25 * v0 * tau0 * tau0, -0.5 * v0 * tau0};

  auto rhs = [c_o](double, const ode::Vec<7>& y) {
    const ProfileState s{0.0, y[0], y[1], y[2]};
    const auto base = profile_rhs(c_o, {y[0], y[1], y[2]});
    const double V = potential(c_o, s);
    const double b = drift(s);
    return ode::Vec<7>{base[0], base[1], base[2], y[4], b * y[4] - V * y[3] - 2.0, y[6], b * y[6] - V * y[5]};
  };
  ode::StepControl ctl;
  ctl.max_step = opt.max_step_rel * scale;
  auto sol = ode::integrate<7>(rhs, tau0, y0, ell, opt.tol, {}, ctl);
  if (sol.status != ode::Status::ReachedEnd) {
    throw Error(ErrorKind::SolverFailure, "linearized integration did not reach the boundary");
  }
  return std::make_shared<const LinearizedSolution::Trajectory>(
      LinearizedSolution::Trajectory{params, tau0, ell, v0, std::move(sol.trajectory)});
}

LinearizedSolution build(const ProfileCurve& curve, const LinearizedOptions& opt, bool with_h) {
  auto traj = integrate_linear(curve, opt);
  LinearizedSolution out;
  out.ell = traj->ell;
  const auto end = traj->at(traj->ell);
  const double raw_b = end[5];

  std::vector<double> knots = traj->dense.knots();
  knots.insert(knots.begin(), 0.0);
  double raw_sup = 0.0;
  for (double t : knots) raw_sup = std::max(raw_sup, std::abs(traj->at(t)[5]));
  if (!(std::abs(raw_b) > 1e-12 * raw_sup)) {
    throw Error(ErrorKind::BoundaryValueVanishes, "axisymmetric kernel vanishes on the boundary");
  }
  out.psi_raw_boundary = raw_b;
  out.trajectory = traj;
  out.tau = knots;
  out.psi.reserve(knots.size());
  for (double t : knots) out.psi.push_back(traj->at(t)[5] / raw_b);

  if (with_h) {
    out.alpha = -end[3] / raw_b;
    out.h_prime_boundary = -(end[4] + out.alpha * end[6]);
    for (double t : knots) {
      const auto y = traj->at(t);
      out.h.push_back(y[3] + out.alpha * y[5]);
      out.w.push_back(-(y[4] + out.alpha * y[6]));
    }
  }
  return out;
}

}  // namespace

double LinearizedSolution::psi_at(double t) const { return trajectory->at(t)[5] / psi_raw_boundary; }
double LinearizedSolution::psi_sigma_at(double t) const { return -trajectory->at(t)[6] / psi_raw_boundary; }
double LinearizedSolution::h_at(double t) const {
  const auto y = trajectory->at(t);
  return y[3] + alpha * y[5];
}
double LinearizedSolution::w_at(double t) const {
  const auto y = trajectory->at(t);
  return -(y[4] + alpha * y[6]);
}

LinearizedSolution solve_axisymmetric_kernel(const ProfileCurve& curve, const LinearizedOptions& options) {
  return build(curve, options, false);
}

LinearizedSolution solve_h(const ProfileCurve& curve, const LinearizedOptions& options) {
  return build(curve, options, true);
}

std::vector<double> h_from_support(const ProfileCurve& curve, const LinearizedSolution& lin,
                                   std::span<const double> tau) {
  const double c_o = curve.params().c_o();
  const double q_b = geometry_at(curve, curve.ell()).q;
  std::vector<double> out;
  out.reserve(tau.size());
  for (double t : tau) {
    // exact cancellation at the boundary point
    if (t == curve.ell()) {
      out.push_back(0.0);
      continue;
    }
    out.push_back((q_b * lin.psi_at(t) - geometry_at(curve, t).q) / c_o);
  }
  return out;
}

std::vector<double> h_from_support(const ProfileCurve& curve, const LinearizedSolution& lin) {
  return h_from_support(curve, lin, lin.tau);
}

std::vector<double> apply_P(double c_o, const UniformSamples& u, std::span<const double> f) {
  const std::size_t n = u.size();
  if (n < 2 * stencil::kHalfWidth + 1 || f.size() != n) {
    throw Error(ErrorKind::TooFewSamples, "operator stencil needs at least five matching samples");
  }
  std::vector<double> out(n, 0.0);
  for (std::size_t i = stencil::kHalfWidth; i + stencil::kHalfWidth < n; ++i) {
    const auto s = u.at(i);
    // d/dsigma = -d/dtau
    out[i] = stencil::d2(f, i, u.step) - drift(s) * stencil::d1(f, i, u.step) + potential(c_o, s) * f[i];
  }
  return out;
}

double residual_Pnu3(double c_o, const UniformSamples& u, std::span<const double> nu3) {
  const auto p = apply_P(c_o, u, nu3);
  double worst = 0.0;
  for (std::size_t i = stencil::kHalfWidth; i + stencil::kHalfWidth < u.size(); ++i) {
    worst = std::max(worst, std::abs(p[i] + 2.0 * nu3[i] / (u.z[i] * u.z[i])));
  }
  return worst;
}

double residual_Pnu3(const ProfileCurve& curve, std::size_t n) {
  const auto u = resample_interior(curve, n);
  std::vector<double> nu3(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) nu3[i] = -std::cos(u.phi[i]);
  return residual_Pnu3(curve.params().c_o(), u, nu3);
}

double family_derivative_error(const Sigma0Solution& sigma0, const LinearizedSolution& lin,
                               const BoundaryCircle& circle, double delta, double* boundary_displacement) {
  const double c0 = sigma0.params.c_o();
  const auto plus = shoot_family_member(c0 + delta, circle, sigma0);
  const auto minus = shoot_family_member(c0 - delta, circle, sigma0);
  const auto& base = sigma0.curve;
  const double span = std::min({plus.curve.ell(), minus.curve.ell(), base.ell()});
  const int n = 400;
  double err = 0.0;
  double sup = 0.0;
  for (int k = 0; k < n; ++k) {
    const double s = span * k / n;
    const auto xp = plus.curve.state_at(plus.curve.ell() - s);
    const auto xm = minus.curve.state_at(minus.curve.ell() - s);
    const auto x0 = base.state_at(base.ell() - s);
    const double disp =
        ((xp.r - xm.r) * std::sin(x0.phi) - (xp.z - xm.z) * std::cos(x0.phi)) / (2.0 * delta);
    const double h = lin.h_at(base.ell() - s);
    if (k == 0 && boundary_displacement) *boundary_displacement = disp;
    err = std::max(err, std::abs(disp - h));
    sup = std::max(sup, std::abs(h));
  }
  return err / sup;
}

FamilyDerivativeCheck family_derivative_check(const BoundaryCircle& circle, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorKind::InvalidParams, "difference step must be positive");
  const auto sigma0 = shoot_sigma0(circle);
  const auto lin = solve_h(sigma0.curve);
  FamilyDerivativeCheck out;
  out.delta = delta;
  out.error = family_derivative_error(sigma0, lin, circle, delta, &out.boundary_displacement);
  out.error_half = family_derivative_error(sigma0, lin, circle, 0.5 * delta);
  out.order = std::log2(out.error / out.error_half);
  out.sign = +1;
  for (double h : lin.h) out.h_sup = std::max(out.h_sup, std::abs(h));
  return out;
}

std::vector<Table1Row> compute_table1(double c_o, std::span<const double> z_values, const LinearizedOptions& options) {
  auto row = [c_o, options](double z_o) {
    const ModelParams p(c_o, z_o);
    if (!p.sigma0_admissible()) {
      std::ostringstream os;
      os << "z_o = " << z_o << " is not below -1/c_o";
      throw Error(ErrorKind::NotAdmissible, os.str());
    }
    IntegrationOptions io;
    io.tol = options.tol;
    io.tau0_rel = options.tau0_rel;
    const auto curve = integrate_profile(p, StopCondition::phi_reaches(0.0), io);
    LinearizedOptions fine = options;
    fine.tau0_rel *= 0.5;
    fine.tol = {options.tol.rtol * 0.5, options.tol.atol * 0.5};
    IntegrationOptions fio = io;
    fio.tau0_rel = fine.tau0_rel;
    fio.tol = fine.tol;
    const auto fine_curve = integrate_profile(p, StopCondition::phi_reaches(0.0), fio);
    Table1Row r;
    r.c_o = c_o;
    r.z_o = z_o;
    r.h_prime_boundary = solve_h(curve, options).h_prime_boundary;
    r.refined = solve_h(fine_curve, fine).h_prime_boundary;
    r.relative_change = std::abs(r.refined - r.h_prime_boundary) / std::abs(r.h_prime_boundary);
    return r;
  };
  std::vector<std::future<Table1Row>> jobs;
  for (double z : z_values) jobs.push_back(std::async(std::launch::async, row, z));
  std::vector<Table1Row> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

}  // namespace membif
