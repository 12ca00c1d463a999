#pragma once

// Generating curves of axially symmetric discs satisfying H + c_o = -nu3 / z.
//
// Internally the curve is parameterized by arc length tau measured from the
// rotation axis (tau = 0 at r = 0, z = z_o, phi = pi). In that orientation
//
//   r_tau   = -cos(phi)
//   z_tau   = -sin(phi)
//   phi_tau =  2 cos(phi) / z + sin(phi) / r - 2 c_o
//
// The boundary-based parameter used for reporting is sigma = ell - tau.

#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "membif/ode.hpp"

namespace membif {

struct AllowZeroCurvature {};

class ModelParams {
 public:
  /// Rejects c_o <= 0 and z_o >= 0.
  ModelParams(double c_o, double z_o);
  /// Test hook: admits c_o = 0 (spherical caps). Still requires z_o < 0.
  ModelParams(double c_o, double z_o, AllowZeroCurvature);

  double c_o() const { return c_o_; }
  double z_o() const { return z_o_; }
  /// phi_sigma at the axis, 1/z_o + c_o.
  double axis_rate() const { return 1.0 / z_o_ + c_o_; }
  /// z_o < -1/c_o: the curve reaches a horizontal tangent (a Sigma_0-type disc).
  bool sigma0_admissible() const { return c_o_ * z_o_ < -1.0; }
  /// Parameters of the profile scaled by mu: (c_o / mu, mu z_o).
  ModelParams scaled(double mu) const;

 private:
  double c_o_;
  double z_o_;
};

struct ProfileState {
  double tau = 0.0;
  double r = 0.0;
  double z = 0.0;
  double phi = 0.0;
};

enum class StopReason { TangentHorizontal, TargetPointHit, ArcLimit, Singularity };
std::string_view to_string(StopReason reason) noexcept;

struct StopCondition {
  enum class Kind { PhiReaches, Point, ArcLength };

  Kind kind = Kind::PhiReaches;
  double phi = 0.0;             // PhiReaches
  double r = 0.0, z = 0.0;      // Point
  double point_tol = 0.0;       // Point: accept a local distance minimum below this
  double arc = 0.0;             // ArcLength

  // Guards, always active. Zero selects defaults scaled by |z_o|.
  double max_arc = 0.0;         // default 200 |z_o|
  double min_abs_z = 0.0;       // default 1e-9 |z_o|
  bool throw_on_singularity = true;

  static StopCondition phi_reaches(double value);
  static StopCondition point(double r, double z, double tolerance);
  static StopCondition arc_length(double limit);
};

struct IntegrationOptions {
  ode::Tolerances tol{1e-10, 1e-12};
  /// Axis offset of the Taylor seed, relative to |z_o|.
  double tau0_rel = 1e-6;
  /// Event location tolerance, relative to |z_o|.
  double event_tol_rel = 1e-12;
  /// Step cap relative to |z_o|; keeps the dense output close to the step accuracy.
  double max_step_rel = 0.02;
};

class ProfileCurve {
 public:
  ProfileCurve(ModelParams params, double tau0, ode::DenseTrajectory<3> trajectory, StopReason reason);

  const ModelParams& params() const { return params_; }
  double ell() const { return ell_; }
  double tau0() const { return tau0_; }
  StopReason stop_reason() const { return reason_; }

  /// Axis point, seed point, then every accepted integrator step.
  std::span<const ProfileState> samples() const { return samples_; }
  /// State at arc length tau in [0, ell]; the Taylor seed covers [0, tau0).
  ProfileState state_at(double tau) const;
  ProfileState end_state() const { return samples_.back(); }

 private:
  ModelParams params_;
  double tau0_;
  std::shared_ptr<const ode::DenseTrajectory<3>> trajectory_;
  std::vector<ProfileState> samples_;
  double ell_;
  StopReason reason_;
};

/// Second-order Taylor state at arc length tau0 from the axis.
ProfileState axis_seed(const ModelParams& params, double tau0);

/// Right-hand side of the profile system in the tau orientation.
ode::Vec<3> profile_rhs(double c_o, const ode::Vec<3>& y);

ProfileCurve integrate_profile(const ModelParams& params, const StopCondition& stop,
                               const IntegrationOptions& options = {});

}  // namespace membif
