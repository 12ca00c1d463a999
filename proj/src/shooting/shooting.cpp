#include "membif/shooting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>

namespace membif {

void BoundaryCircle::validate() const {
  if (!(R > 0.0) || !(Z < 0.0) || !std::isfinite(R) || !std::isfinite(Z)) {
    std::ostringstream os;
    os << "boundary circle needs R > 0 and Z < 0, got R = " << R << ", Z = " << Z;
    throw Error(ErrorKind::InvalidParams, os.str());
  }
}

double BoundaryCircle::scale() const { return std::max(R, std::abs(Z)); }

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Vec2 = std::array<double, 2>;

double norm(const Vec2& v) { return std::hypot(v[0], v[1]); }

// Solve J dx = f for a 2x2 J; false if J is numerically singular.
bool solve2(const std::array<Vec2, 2>& cols, const Vec2& f, Vec2& dx) {
  const double a = cols[0][0], b = cols[1][0], c = cols[0][1], d = cols[1][1];
  const double det = a * d - b * c;
  const double size = std::max({std::abs(a * d), std::abs(b * c), 1e-300});
  if (!std::isfinite(det) || std::abs(det) < 1e-14 * size) return false;
  dx = {(d * f[0] - b * f[1]) / det, (a * f[1] - c * f[0]) / det};
  return true;
}

// Sigma_0 unknowns in log form: c = e^u / L, z_o = -(1 + e^v) / c. Every (u, v)
// is admissible, which keeps Newton inside the region where phi = 0 is reached.
struct LogMap {
  double L;

  ModelParams params(const Vec2& x) const {
    const double c = std::exp(x[0]) / L;
    return ModelParams(c, -(1.0 + std::exp(x[1])) / c);
  }
  Vec2 coords(const ModelParams& p) const {
    return {std::log(p.c_o() * L), std::log(-p.c_o() * p.z_o() - 1.0)};
  }
};

struct Sigma0Eval {
  Vec2 f{kInf, kInf};
  std::optional<ProfileCurve> curve;
  bool ok() const { return curve.has_value(); }
};

Sigma0Eval eval_sigma0(const LogMap& map, const Vec2& x, const BoundaryCircle& circle, const ShootingOptions& opt) {
  Sigma0Eval e;
  if (!std::isfinite(x[0]) || !std::isfinite(x[1]) || std::abs(x[0]) > 40 || std::abs(x[1]) > 40) return e;
  try {
    auto curve = integrate_profile(map.params(x), StopCondition::phi_reaches(0.0), opt.integration);
    const auto end = curve.end_state();
    e.f = {(end.r - circle.R) / map.L, (end.z - circle.Z) / map.L};
    e.curve = std::move(curve);
  } catch (const Error&) {
  }
  return e;
}

struct NewtonOutcome {
  Vec2 x{};
  Sigma0Eval at;
  int iterations = 0;
  bool converged = false;
};

NewtonOutcome newton_sigma0(const LogMap& map, Vec2 x, const BoundaryCircle& circle, const ShootingOptions& opt,
                            std::ostringstream& trace) {
  NewtonOutcome out;
  Sigma0Eval cur = eval_sigma0(map, x, circle, opt);
  for (int it = 0; it <= opt.max_iterations; ++it) {
    out.iterations = it;
    if (!cur.ok()) break;
    trace << "  it " << it << ": u = " << x[0] << ", v = " << x[1] << ", |F| = " << norm(cur.f) << '\n';
    if (norm(cur.f) < opt.match_tol) {
      out.converged = true;
      break;
    }
    if (it == opt.max_iterations) break;
    std::array<Vec2, 2> cols{};
    bool jac_ok = true;
    for (int k = 0; k < 2 && jac_ok; ++k) {
      for (double sgn : {1.0, -1.0}) {
        Vec2 xs = x;
        xs[k] += sgn * opt.fd_step;
        const auto e = eval_sigma0(map, xs, circle, opt);
        if (e.ok()) {
          cols[k] = {(e.f[0] - cur.f[0]) / (sgn * opt.fd_step), (e.f[1] - cur.f[1]) / (sgn * opt.fd_step)};
          break;
        }
        if (sgn < 0) jac_ok = false;
      }
    }
    Vec2 dx{};
    if (!jac_ok || !solve2(cols, cur.f, dx)) {
      trace << "  singular Jacobian\n";
      break;
    }
    const double len = norm(dx);
    if (len > 2.0) dx = {dx[0] * 2.0 / len, dx[1] * 2.0 / len};
    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k <= opt.max_halvings; ++k, lambda *= 0.5) {
      const Vec2 trial{x[0] - lambda * dx[0], x[1] - lambda * dx[1]};
      auto e = eval_sigma0(map, trial, circle, opt);
      if (e.ok() && norm(e.f) < norm(cur.f)) {
        x = trial;
        cur = std::move(e);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      trace << "  damping exhausted\n";
      break;
    }
  }
  out.x = x;
  out.at = std::move(cur);
  return out;
}

Sigma0Solution make_solution(const LogMap& map, const NewtonOutcome& n, const BoundaryCircle& circle, bool grid) {
  const auto& curve = *n.at.curve;
  const auto end = curve.end_state();
  return Sigma0Solution{map.params(n.x), curve, end.phi, std::hypot(end.r - circle.R, end.z - circle.Z),
                        n.iterations, grid};
}

}  // namespace

Sigma0Solution shoot_sigma0(const BoundaryCircle& circle, std::optional<ModelParams> seed,
                            const ShootingOptions& options) {
  circle.validate();
  const LogMap map{circle.scale()};
  if (!seed) {
    const double c = 1.5 * std::max(1.0 / std::abs(circle.Z), 1.0 / circle.R);
    seed = ModelParams(c, std::min(circle.Z - circle.R, -1.5 / c));
  } else if (!seed->sigma0_admissible()) {
    seed = ModelParams(seed->c_o(), -1.5 / seed->c_o());
  }

  std::ostringstream trace;
  trace << "seed c_o = " << seed->c_o() << ", z_o = " << seed->z_o() << '\n';
  auto first = newton_sigma0(map, map.coords(*seed), circle, options, trace);
  if (first.converged) return make_solution(map, first, circle, false);

  // Grid restart: rank a logarithmic grid by mismatch and polish the best few.
  struct Cell {
    double res;
    Vec2 x;
  };
  std::vector<Cell> cells;
  const int g = std::max(options.grid, 2);
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) {
      const Vec2 x{-3.0 + 6.0 * i / (g - 1), -6.0 + 10.0 * j / (g - 1)};
      const auto e = eval_sigma0(map, x, circle, options);
      if (e.ok()) cells.push_back({norm(e.f), x});
    }
  }
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.res < b.res; });
  for (std::size_t k = 0; k < std::min<std::size_t>(cells.size(), 4); ++k) {
    trace << "grid restart from u = " << cells[k].x[0] << ", v = " << cells[k].x[1] << '\n';
    auto n = newton_sigma0(map, cells[k].x, circle, options, trace);
    if (n.converged) return make_solution(map, n, circle, true);
  }
  throw Error(ErrorKind::NoConvergence, "tangential disc shooting did not converge\n" + trace.str());
}

namespace {

struct MemberEval {
  Vec2 f{kInf, kInf};
  double phi = 0.0;
  bool ok = false;
};

MemberEval eval_member(double c, double z_o, double arc, const BoundaryCircle& circle, const ShootingOptions& opt) {
  MemberEval e;
  if (!(z_o < 0.0) || !(arc > 0.0) || !std::isfinite(z_o) || !std::isfinite(arc)) return e;
  try {
    const ModelParams p(c, z_o);
    auto stop = StopCondition::arc_length(arc);
    const auto curve = integrate_profile(p, stop, opt.integration);
    const auto end = curve.end_state();
    e.f = {end.r - circle.R, end.z - circle.Z};
    e.phi = end.phi;
    e.ok = true;
  } catch (const Error&) {
  }
  return e;
}

}  // namespace

FamilyMember shoot_family_member(double c, const BoundaryCircle& circle, const MemberGuess& guess,
                                 const ShootingOptions& options) {
  circle.validate();
  if (!(c > 0.0)) throw Error(ErrorKind::InvalidParams, "family member needs c > 0");
  const double L = circle.scale();
  double z_o = guess.z_o;
  double arc = guess.arc;
  MemberEval cur = eval_member(c, z_o, arc, circle, options);
  std::ostringstream trace;
  bool converged = false;
  for (int it = 0; it <= options.max_iterations && cur.ok; ++it) {
    trace << "  it " << it << ": z_o = " << z_o << ", arc = " << arc << ", |F| = " << norm(cur.f) << '\n';
    if (norm(cur.f) < options.match_tol * L) {
      converged = true;
      break;
    }
    if (it == options.max_iterations) break;
    const double dz = options.fd_step * std::abs(z_o);
    const auto ez = eval_member(c, z_o - dz, arc, circle, options);
    if (!ez.ok) break;
    // d/d(arc) of the endpoint is the unit tangent.
    const std::array<Vec2, 2> cols{Vec2{(cur.f[0] - ez.f[0]) / dz, (cur.f[1] - ez.f[1]) / dz},
                                   Vec2{-std::cos(cur.phi), -std::sin(cur.phi)}};
    Vec2 dx{};
    if (!solve2(cols, cur.f, dx)) break;
    // keep z_o negative and the arc positive
    double lambda = 1.0;
    while (lambda > 1e-3 && (z_o - lambda * dx[0] >= 0.5 * z_o || arc - lambda * dx[1] <= 0.5 * arc)) lambda *= 0.5;
    bool accepted = false;
    for (int k = 0; k <= options.max_halvings; ++k, lambda *= 0.5) {
      const auto e = eval_member(c, z_o - lambda * dx[0], arc - lambda * dx[1], circle, options);
      if (e.ok && norm(e.f) < norm(cur.f)) {
        z_o -= lambda * dx[0];
        arc -= lambda * dx[1];
        cur = e;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (!converged) {
    std::ostringstream os;
    os << "family member at c = " << c << " did not converge\n" << trace.str();
    throw Error(ErrorKind::NoConvergence, os.str());
  }

  // Rebuild up to the first local minimum of the distance to the boundary point.
  const ModelParams p(c, z_o);
  auto stop = StopCondition::point(circle.R, circle.Z, std::max(1e-8 * circle.R, 100.0 * options.match_tol * L));
  stop.max_arc = arc * (1.0 + 1e-6) + 1e-9 * L;
  ProfileCurve curve = [&] {
    try {
      return integrate_profile(p, stop, options.integration);
    } catch (const Error& e) {
      std::ostringstream os;
      os << "family member at c = " << c << ": boundary point is not a first passage (" << e.what() << ')';
      throw Error(ErrorKind::NoConvergence, os.str());
    }
  }();
  if (std::abs(curve.ell() - arc) > 1e-6 * L) {
    std::ostringstream os;
    os << "family member at c = " << c << " converged to a later passage (arc " << arc << ", first passage "
       << curve.ell() << ')';
    throw Error(ErrorKind::NoConvergence, os.str());
  }
  const auto end = curve.end_state();
  const double residual = std::hypot(end.r - circle.R, end.z - circle.Z);
  return FamilyMember{c, z_o, std::move(curve), end.phi, residual, !p.sigma0_admissible()};
}

FamilyMember shoot_family_member(double c, const BoundaryCircle& circle, const Sigma0Solution& seed,
                                 const ShootingOptions& options) {
  return shoot_family_member(c, circle, MemberGuess{seed.params.z_o(), seed.curve.ell()}, options);
}

namespace {

struct Anchor {
  double c;
  MemberGuess g;
};

MemberGuess extrapolate(const Anchor& a, const Anchor& b, double c) {
  if (b.c == a.c) return b.g;
  const double s = (c - b.c) / (b.c - a.c);
  return {b.g.z_o + s * (b.g.z_o - a.g.z_o), b.g.arc + s * (b.g.arc - a.g.arc)};
}

// March from the disc through the targets (ordered away from c0).
FamilySweep continue_family(const BoundaryCircle& circle, const Anchor& start, const std::vector<double>& targets,
                            const ShootingOptions& opt) {
  FamilySweep out;
  const double max_step = 0.025 * start.c;
  const double min_step = max_step / 256.0;
  Anchor prev = start;
  Anchor last = start;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const double target = targets[k];
    try {
      std::optional<FamilyMember> member;
      double step = max_step;
      while (!member) {
        const double dir = target >= last.c ? 1.0 : -1.0;
        const double next = std::abs(target - last.c) <= step ? target : last.c + dir * step;
        try {
          auto m = shoot_family_member(next, circle, extrapolate(prev, last, next), opt);
          prev = last;
          last = {next, m.guess()};
          if (next == target) member = std::move(m);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::NoConvergence) throw;
          step *= 0.5;
          if (step < min_step) throw;
        }
      }
      out.members.push_back(std::move(*member));
    } catch (const Error& e) {
      for (std::size_t j = k; j < targets.size(); ++j) {
        out.failures.push_back({targets[j], j == k ? std::string(e.what()) : "continuation stopped earlier"});
      }
      break;
    }
  }
  return out;
}

}  // namespace

FamilySweep family_sweep(const BoundaryCircle& circle, const Sigma0Solution& sigma0, double c_min, double c_max,
                         int n, const ShootingOptions& options) {
  circle.validate();
  if (n < 1 || !(c_min > 0.0) || !(c_max >= c_min)) {
    throw Error(ErrorKind::InvalidParams, "family sweep needs n >= 1 and 0 < c_min <= c_max");
  }
  const double c0 = sigma0.params.c_o();
  std::vector<double> up;
  std::vector<double> down;
  for (int k = 0; k < n; ++k) {
    const double c = n == 1 ? c_min : c_min + (c_max - c_min) * k / (n - 1);
    (c >= c0 ? up : down).push_back(c);
  }
  std::reverse(down.begin(), down.end());

  const Anchor start{c0, {sigma0.params.z_o(), sigma0.curve.ell()}};
  auto lower = std::async(std::launch::async, [&] { return continue_family(circle, start, down, options); });
  FamilySweep result = continue_family(circle, start, up, options);
  FamilySweep below = lower.get();

  std::reverse(below.members.begin(), below.members.end());
  for (auto& m : result.members) below.members.push_back(std::move(m));
  below.failures.insert(below.failures.end(), result.failures.begin(), result.failures.end());
  std::sort(below.failures.begin(), below.failures.end(),
            [](const MemberFailure& a, const MemberFailure& b) { return a.c < b.c; });
  return below;
}

FamilySweep family_sweep(const BoundaryCircle& circle, double c_min, double c_max, int n,
                         const ShootingOptions& options) {
  return family_sweep(circle, shoot_sigma0(circle, std::nullopt, options), c_min, c_max, n, options);
}

}  // namespace membif
