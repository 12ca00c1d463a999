#pragma once

// Separated eigenproblems of the linearized operator on a tangential disc:
//
//   (r u_s / z^2)_s - m^2 u / (r z^2) + r U u + lambda r u = 0,  u(boundary) = 0,
//
// with zero flux at the axis for m = 0 and u(axis) = 0 for m >= 1.

#include <cstddef>
#include <string>
#include <vector>

#include "membif/linearized.hpp"

namespace membif {

/// Symmetric tridiagonal pencil (A, M) for the unknown nodes of one mode:
/// A u = lambda M u with M diagonal.
struct ModeOperator {
  int m = 0;
  std::vector<double> tau;    // unknown nodes
  std::vector<double> diag;   // A diagonal
  std::vector<double> off;    // A off-diagonal
  std::vector<double> mass;   // M diagonal
  std::vector<double> mesh;   // full mesh, axis to boundary
};

/// Conservative finite differences on tau_k = ell (k/n)^1.5. Throws GridTooCoarse for n < 200.
ModeOperator assemble_mode(const ProfileCurve& curve, int m, std::size_t n);

struct EigenResult {
  int m = 0;
  std::vector<double> eigenvalues;                 // Richardson-extrapolated, ascending
  std::vector<double> fine_eigenvalues;            // on the finer mesh
  std::vector<double> coarse_eigenvalues;
  std::vector<std::vector<double>> eigenfunctions; // on `mesh`, unit weighted norm
  std::vector<double> mesh;                        // finer full mesh, axis to boundary
  std::size_t n = 0;                               // coarse cell count; the fine mesh has 2n
};

/// Lowest `count` eigenpairs of one mode.
EigenResult eigen_solve(const ProfileCurve& curve, int m, int count, std::size_t n = 1000);

/// Sup over the interior window of the m = 1, lambda = 0 equation applied to u = z_sigma.
double kernel_residual_m1(const ProfileCurve& curve, std::size_t n = 4000);
/// Same residual for arbitrary samples of u on the resampled curve.
double kernel_residual_m1(double c_o, const UniformSamples& u, std::span<const double> f);

enum class Verdict { Pass, Fail, NotApplicable };
std::string_view to_string(Verdict v) noexcept;

struct CertifyOptions {
  std::size_t n = 1000;
  double zero_rel = 1e-6;    // zero band relative to the first nonzero m = 1 eigenvalue
  double gap_rel = 1e-3;     // gaps must exceed this fraction of the same scale
  double sweep_width = 0.05; // relative c-range for the family check
  int sweep_members = 5;
};

struct BifurcationCertificate {
  Verdict verdict = Verdict::NotApplicable;
  std::string reason;

  double c_o = 0.0;
  double z_o = 0.0;
  double R = 0.0;
  double Z = 0.0;

  int kernel_dim_even = 0;
  double h_prime_boundary = 0.0;
  double m1_zero_eigenvalue = 0.0;
  double m1_zero_residual = 0.0;       // finite-difference residual with u = z_sigma
  double m1_eigenfunction_error = 0.0; // relative sup distance to z_sigma
  double m1_scale = 0.0;               // first nonzero m = 1 eigenvalue
  double zero_threshold = 0.0;
  double m0_gap = 0.0;
  double m2_gap = 0.0;
  double m0_lowest = 0.0;
  std::vector<double> m0_eigenvalues, m1_eigenvalues, m2_eigenvalues;
  std::size_t mesh_cells = 0;

  int family_members = 0;
  int family_failures = 0;
  int contact_angle_sign_changes = 0;

  bool condition_i = false;
  bool condition_ii = false;
  bool condition_iii = false;
};

/// Requires a solved h (IncompleteEvidence otherwise). Profiles without positive
/// curvature or outside the admissible region get NotApplicable.
BifurcationCertificate certify(const Sigma0Solution& sigma0, const LinearizedSolution& lin,
                               const CertifyOptions& options = {});

}  // namespace membif
