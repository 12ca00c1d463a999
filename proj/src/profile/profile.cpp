#include "membif/profile.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace membif {

std::string_view to_string(StopReason reason) noexcept {
  switch (reason) {
    case StopReason::TangentHorizontal: return "TangentHorizontal";
    case StopReason::TargetPointHit: return "TargetPointHit";
    case StopReason::ArcLimit: return "ArcLimit";
    case StopReason::Singularity: return "Singularity";
  }
  return "Unknown";
}

ModelParams::ModelParams(double c_o, double z_o) : c_o_(c_o), z_o_(z_o) {
  if (!(c_o > 0.0) || !std::isfinite(c_o)) {
    throw Error(ErrorKind::InvalidParams, "spontaneous curvature must be positive and finite");
  }
  if (!(z_o < 0.0) || !std::isfinite(z_o)) {
    throw Error(ErrorKind::InvalidParams, "axis height must be negative and finite");
  }
}

ModelParams::ModelParams(double c_o, double z_o, AllowZeroCurvature) : c_o_(c_o), z_o_(z_o) {
  if (!(c_o >= 0.0) || !std::isfinite(c_o)) {
    throw Error(ErrorKind::InvalidParams, "spontaneous curvature must be non-negative");
  }
  if (!(z_o < 0.0) || !std::isfinite(z_o)) {
    throw Error(ErrorKind::InvalidParams, "axis height must be negative and finite");
  }
}

ModelParams ModelParams::scaled(double mu) const {
  if (c_o_ == 0.0) return ModelParams(0.0, mu * z_o_, AllowZeroCurvature{});
  return ModelParams(c_o_ / mu, mu * z_o_);
}

StopCondition StopCondition::phi_reaches(double value) {
  StopCondition s;
  s.kind = Kind::PhiReaches;
  s.phi = value;
  return s;
}

StopCondition StopCondition::point(double r, double z, double tolerance) {
  StopCondition s;
  s.kind = Kind::Point;
  s.r = r;
  s.z = z;
  s.point_tol = tolerance;
  return s;
}

StopCondition StopCondition::arc_length(double limit) {
  StopCondition s;
  s.kind = Kind::ArcLength;
  s.arc = limit;
  return s;
}

ode::Vec<3> profile_rhs(double c_o, const ode::Vec<3>& y) {
  const double r = y[0];
  const double z = y[1];
  const double s = std::sin(y[2]);
  const double c = std::cos(y[2]);
  return {-c, -s, 2.0 * c / z + s / r - 2.0 * c_o};
}

ProfileState axis_seed(const ModelParams& params, double tau0) {
  const double scale = std::abs(params.z_o());
  const double a = params.axis_rate();
  if (std::abs(a) * scale < 1e-14) {
    throw Error(ErrorKind::DegenerateAxis, "1/z_o + c_o vanishes");
  }
  if (!(tau0 >= 0.0) || tau0 > 1e-3 * scale) {
    throw Error(ErrorKind::InvalidOffset, "axis offset must lie in [0, 1e-3 |z_o|]");
  }
  return {tau0, tau0, params.z_o() - 0.5 * a * tau0 * tau0, std::numbers::pi - a * tau0};
}

ProfileCurve::ProfileCurve(ModelParams params, double tau0, ode::DenseTrajectory<3> trajectory,
                           StopReason reason)
    : params_(params),
      tau0_(tau0),
      trajectory_(std::make_shared<const ode::DenseTrajectory<3>>(std::move(trajectory))),
      ell_(trajectory_->t_end()),
      reason_(reason) {
  const auto knots = trajectory_->knots();
  samples_.reserve(knots.size() + 1);
  samples_.push_back({0.0, 0.0, params_.z_o(), std::numbers::pi});
  for (double t : knots) {
    const auto y = (*trajectory_)(t);
    samples_.push_back({t, y[0], y[1], y[2]});
  }
}

ProfileState ProfileCurve::state_at(double tau) const {
  const double slack = 1e-12 * std::max(1.0, ell_);
  if (!(tau >= -slack) || tau > ell_ + slack) {
    std::ostringstream os;
    os << "tau = " << tau << " outside [0, " << ell_ << "]";
    throw Error(ErrorKind::OutOfRange, os.str());
  }
  if (tau < tau0_) return axis_seed(params_, std::max(tau, 0.0));
  const auto y = (*trajectory_)(std::min(tau, ell_));
  return {tau, y[0], y[1], y[2]};
}

ProfileCurve integrate_profile(const ModelParams& params, const StopCondition& stop,
                               const IntegrationOptions& options) {
  const double scale = std::abs(params.z_o());
  const double tau0 = options.tau0_rel * scale;
  const ProfileState seed = axis_seed(params, tau0);
  if (tau0 <= 0.0) throw Error(ErrorKind::InvalidOffset, "integration needs a positive axis offset");

  const double max_arc = stop.max_arc > 0.0 ? stop.max_arc : 200.0 * scale;
  const double min_abs_z = stop.min_abs_z > 0.0 ? stop.min_abs_z : 1e-9 * scale;
  const double r_floor = 1e-3 * tau0;

  std::vector<ode::Event<3>> events;
  switch (stop.kind) {
    case StopCondition::Kind::PhiReaches: {
      const double target = stop.phi;
      events.push_back({[target](double, const ode::Vec<3>& y) { return y[2] - target; }, 0, {}});
      break;
    }
    case StopCondition::Kind::Point: {
      const double pr = stop.r;
      const double pz = stop.z;
      const double tol2 = stop.point_tol * stop.point_tol;
      // d/dtau of half the squared distance to the target; a rising zero is a local minimum.
      events.push_back({[pr, pz](double, const ode::Vec<3>& y) {
                          return -(y[0] - pr) * std::cos(y[2]) - (y[1] - pz) * std::sin(y[2]);
                        },
                        +1,
                        [pr, pz, tol2](double, const ode::Vec<3>& y) {
                          const double dr = y[0] - pr;
                          const double dz = y[1] - pz;
                          return dr * dr + dz * dz <= tol2;
                        }});
      break;
    }
    case StopCondition::Kind::ArcLength:
      if (!(stop.arc > tau0)) throw Error(ErrorKind::InvalidParams, "arc length limit must exceed the axis offset");
      break;
  }
  const std::size_t n_primary = events.size();
  events.push_back({[min_abs_z](double, const ode::Vec<3>& y) { return y[1] + min_abs_z; }, +1, {}});
  events.push_back({[r_floor](double, const ode::Vec<3>& y) { return y[0] - r_floor; }, -1, {}});

  double t_end = max_arc;
  if (stop.kind == StopCondition::Kind::ArcLength) t_end = std::min(stop.arc, max_arc);

  ode::StepControl ctl;
  ctl.event_tol = options.event_tol_rel * scale;
  ctl.max_step = options.max_step_rel * scale;
  const double c_o = params.c_o();
  auto sol = ode::integrate<3>([c_o](double, const ode::Vec<3>& y) { return profile_rhs(c_o, y); }, tau0,
                               ode::Vec<3>{seed.r, seed.z, seed.phi}, t_end, options.tol, events, ctl);

  auto singular = [&](const std::string& why) {
    if (stop.throw_on_singularity || sol.trajectory.empty()) throw Error(ErrorKind::SingularityHit, why);
    return ProfileCurve(params, tau0, std::move(sol.trajectory), StopReason::Singularity);
  };

  switch (sol.status) {
    case ode::Status::EventHit:
      if (static_cast<std::size_t>(sol.event) < n_primary) {
        const auto reason = stop.kind == StopCondition::Kind::PhiReaches ? StopReason::TangentHorizontal
                                                                          : StopReason::TargetPointHit;
        return ProfileCurve(params, tau0, std::move(sol.trajectory), reason);
      }
      return singular(static_cast<std::size_t>(sol.event) == n_primary ? "curve reached z = 0"
                                                                         : "curve returned to the axis");
    case ode::Status::ReachedEnd:
      if (stop.kind == StopCondition::Kind::ArcLength && stop.arc <= max_arc) {
        return ProfileCurve(params, tau0, std::move(sol.trajectory), StopReason::ArcLimit);
      }
      throw Error(ErrorKind::ArcLimit, "maximum arc length reached before the stop event");
    case ode::Status::StepTooSmall:
      return singular("step size underflow");
    case ode::Status::NonFinite:
      return singular("non-finite state");
    case ode::Status::TooManySteps:
      return singular("step budget exhausted");
  }
  throw Error(ErrorKind::SolverFailure, "unreachable integrator status");
}

}  // namespace membif
