#pragma once

// Axisymmetric linearization along a tangential disc. With sigma = ell - tau
// running from the boundary to the axis,
//
//   P[u] = u_ss + (cos(phi)/r - 2 sin(phi)/z) u_s + (|d nu|^2 - 2 cos^2(phi)/z^2) u
//
// which is z^2 (div(z^-2 grad u) + U u) restricted to rotation-invariant u.

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "membif/geometry.hpp"
#include "membif/shooting.hpp"

namespace membif {

/// Coefficients of the linearized operator at one point.
struct LinearizedCoeffs {
  double U = 0.0;        // z^-2 (|d nu|^2 - 2 nu3^2 / z^2)
  double weight = 0.0;   // r / z^2
  double p_coeff = 0.0;  // r / z^2
};

LinearizedCoeffs linearized_coeffs(double c_o, const ProfileState& s);

/// Potential term of P: |d nu|^2 - 2 cos^2(phi) / z^2 (equal to z^2 U).
double potential(double c_o, const ProfileState& s);
/// First-order coefficient of P in sigma: cos(phi)/r - 2 sin(phi)/z.
double drift(const ProfileState& s);

struct ExtendedState {
  double r = 0.0, z = 0.0, phi = 0.0, h = 0.0, w = 0.0;
};

/// sigma-derivatives (r, z, phi, h, w) of the profile system extended by P[h] = -2, w = h_sigma.
/// Throws AxisSingularity at r = 0.
std::array<double, 5> extended_rhs(const ExtendedState& s, const ModelParams& params);

struct LinearizedOptions {
  ode::Tolerances tol{1e-12, 1e-13};
  double tau0_rel = 1e-6;
  double max_step_rel = 0.02;
};

class LinearizedSolution {
 public:
  struct Trajectory;

  /// Integration knots (tau from the axis) and values there.
  std::vector<double> tau;
  std::vector<double> psi;   // axisymmetric kernel, psi = 1 on the boundary
  std::vector<double> h;     // P[h] = -2, h = 0 on the boundary
  std::vector<double> w;     // h_sigma
  double h_prime_boundary = 0.0;  // h_sigma at the boundary
  double alpha = 0.0;             // h = p + alpha psi_raw
  double psi_raw_boundary = 0.0;  // value of the axis-normalized kernel at the boundary
  double ell = 0.0;

  double psi_at(double t) const;
  double psi_sigma_at(double t) const;
  double h_at(double t) const;
  double w_at(double t) const;

  std::shared_ptr<const Trajectory> trajectory;
};

/// Kernel only: same integration, h fields left empty.
LinearizedSolution solve_axisymmetric_kernel(const ProfileCurve& curve, const LinearizedOptions& options = {});
LinearizedSolution solve_h(const ProfileCurve& curve, const LinearizedOptions& options = {});

/// (q(boundary) psi - q) / c_o at the given arc lengths; psi from a solved kernel.
std::vector<double> h_from_support(const ProfileCurve& curve, const LinearizedSolution& lin,
                                   std::span<const double> tau);
std::vector<double> h_from_support(const ProfileCurve& curve, const LinearizedSolution& lin);

/// P[f] on equispaced samples by fourth-order centred differences. Entries within two
/// samples of either end are left at zero.
std::vector<double> apply_P(double c_o, const UniformSamples& u, std::span<const double> f);

/// sup over the interior window of |P[nu3] + 2 nu3 / z^2|.
double residual_Pnu3(const ProfileCurve& curve, std::size_t n = 4000);
double residual_Pnu3(double c_o, const UniformSamples& u, std::span<const double> nu3);

struct FamilyDerivativeCheck {
  double delta = 0.0;
  double error = 0.0;        // relative sup error at delta
  double error_half = 0.0;   // relative sup error at delta / 2
  double order = 0.0;        // log2(error / error_half)
  int sign = +1;             // the difference quotient is compared with sign * h
  double boundary_displacement = 0.0;
  double h_sup = 0.0;
};

/// Difference quotient (X(c0 + d) - X(c0 - d)) / (2 d) projected on the disc normal
/// (sin(phi) e_r, -cos(phi)), at equal distance from the boundary along each curve.
double family_derivative_error(const Sigma0Solution& sigma0, const LinearizedSolution& lin,
                               const BoundaryCircle& circle, double delta, double* boundary_displacement = nullptr);
FamilyDerivativeCheck family_derivative_check(const BoundaryCircle& circle, double delta);

struct Table1Row {
  double c_o = 0.0;
  double z_o = 0.0;
  double h_prime_boundary = 0.0;
  double refined = 0.0;       // with tau0 and tolerances halved
  double relative_change = 0.0;
};

/// h_sigma(0) for each z_o, computed concurrently.
std::vector<Table1Row> compute_table1(double c_o, std::span<const double> z_values,
                                      const LinearizedOptions& options = {});

}  // namespace membif
