#pragma once

// Boundary matching: the tangential disc through a circle, and the fixed-boundary
// family obtained by varying the spontaneous curvature.

#include <optional>
#include <string>
#include <vector>

#include "membif/profile.hpp"

namespace membif {

struct BoundaryCircle {
  double R = 0.0;
  double Z = 0.0;

  /// Throws InvalidParams unless R > 0 and Z < 0.
  void validate() const;
  double scale() const;
  BoundaryCircle scaled(double mu) const { return {mu * R, mu * Z}; }
};

struct ShootingOptions {
  IntegrationOptions integration{{1e-12, 1e-13}, 1e-6, 1e-12, 0.02};
  int max_iterations = 50;
  int max_halvings = 8;
  double fd_step = 1e-6;
  /// Convergence on the endpoint mismatch, relative to max(R, |Z|).
  double match_tol = 1e-10;
  int grid = 32;
};

struct Sigma0Solution {
  ModelParams params;
  ProfileCurve curve;
  double boundary_phi = 0.0;
  double match_residual = 0.0;
  int iterations = 0;
  bool used_grid = false;
};

/// Damped Newton on (r(ell) - R, z(ell) - Z) over the admissible region, with a
/// grid restart if the seed does not converge.
Sigma0Solution shoot_sigma0(const BoundaryCircle& circle, std::optional<ModelParams> seed = std::nullopt,
                            const ShootingOptions& options = {});

/// Initial guess for a family member: axis height and arc length to the boundary.
struct MemberGuess {
  double z_o = 0.0;
  double arc = 0.0;
};

struct FamilyMember {
  double c = 0.0;
  double z_o = 0.0;
  ProfileCurve curve;            // ends at the first passage through (R, Z)
  double contact_angle = 0.0;    // phi at the boundary
  double match_residual = 0.0;
  /// z_o >= -1/c. Family members may leave the region where a horizontal tangent exists.
  bool left_admissible_region = false;

  MemberGuess guess() const { return {z_o, curve.ell()}; }
};

FamilyMember shoot_family_member(double c, const BoundaryCircle& circle, const MemberGuess& guess,
                                 const ShootingOptions& options = {});
FamilyMember shoot_family_member(double c, const BoundaryCircle& circle, const Sigma0Solution& seed,
                                 const ShootingOptions& options = {});

struct MemberFailure {
  double c = 0.0;
  std::string message;
};

struct FamilySweep {
  std::vector<FamilyMember> members;   // ascending in c
  std::vector<MemberFailure> failures;
};

/// n members on an even grid over [c_min, c_max], continued in both directions
/// from the disc's own curvature. Targets past a failed continuation step are
/// reported as failures.
FamilySweep family_sweep(const BoundaryCircle& circle, const Sigma0Solution& sigma0, double c_min, double c_max,
                         int n, const ShootingOptions& options = {});
FamilySweep family_sweep(const BoundaryCircle& circle, double c_min, double c_max, int n,
                         const ShootingOptions& options = {});

}  // namespace membif
