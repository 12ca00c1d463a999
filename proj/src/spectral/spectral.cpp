#include "membif/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>

#include "membif/stencil.hpp"

namespace membif {

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::NotApplicable: return "not-applicable";
  }
  return "unknown";
}

ModeOperator assemble_mode(const ProfileCurve& curve, int m, std::size_t n) {
  if (n < 200) throw Error(ErrorKind::GridTooCoarse, "mode assembly needs at least 200 cells");
  if (m < 0) throw Error(ErrorKind::InvalidParams, "mode index must be non-negative");
  const double c_o = curve.params().c_o();
  const double ell = curve.ell();
  const double mm = static_cast<double>(m) * m;

  std::vector<double> tau(n + 1);
  for (std::size_t k = 0; k <= n; ++k) tau[k] = ell * std::pow(static_cast<double>(k) / n, 1.5);
  tau[n] = ell;

  std::vector<double> diag(n + 1, 0.0), mass(n + 1, 0.0), off(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double h = tau[k + 1] - tau[k];
    const auto mid = curve.state_at(0.5 * (tau[k] + tau[k + 1]));
    const double flux = mid.r / (mid.z * mid.z) / h;
    diag[k] += flux;
    diag[k + 1] += flux;
    off[k] = -flux;
    // half-cell midpoint rule for the potential and the weight
    for (int side = 0; side < 2; ++side) {
      const std::size_t node = k + side;
      const auto s = curve.state_at(side == 0 ? tau[k] + 0.25 * h : tau[k + 1] - 0.25 * h);
      const double z2 = s.z * s.z;
      diag[node] += 0.5 * h * (mm / (s.r * z2) - s.r * potential(c_o, s) / z2);
      mass[node] += 0.5 * h * s.r;
    }
  }

  ModeOperator op;
  op.m = m;
  op.mesh = tau;
  const std::size_t lo = m == 0 ? 0 : 1;
  op.tau.assign(tau.begin() + lo, tau.begin() + n);
  op.diag.assign(diag.begin() + lo, diag.begin() + n);
  op.mass.assign(mass.begin() + lo, mass.begin() + n);
  op.off.assign(off.begin() + lo, off.begin() + n - 1);
  return op;
}

namespace {

struct Pairs {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;  // on op.tau, M-orthonormal
};

Pairs lowest_pairs(const ModeOperator& op, int count) {
  const lapack_int n = static_cast<lapack_int>(op.diag.size());
  std::vector<double> s(n);
  for (lapack_int i = 0; i < n; ++i) s[i] = 1.0 / std::sqrt(op.mass[i]);
  std::vector<double> d(n), e(std::max<lapack_int>(n - 1, 1));
  for (lapack_int i = 0; i < n; ++i) d[i] = op.diag[i] * s[i] * s[i];
  for (lapack_int i = 0; i + 1 < n; ++i) e[i] = op.off[i] * s[i] * s[i + 1];

  const lapack_int k = std::min<lapack_int>(count, n);
  lapack_int found = 0;
  std::vector<double> w(n), z(static_cast<std::size_t>(n) * k);
  std::vector<lapack_int> ifail(n);
  const double abstol = 2.0 * LAPACKE_dlamch('S');
  const lapack_int info = LAPACKE_dstevx(LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), e.data(), 0.0, 0.0, 1, k, abstol,
                                         &found, w.data(), z.data(), n, ifail.data());
  if (info != 0 || found != k) {
    std::ostringstream os;
    os << "tridiagonal eigensolver failed (info " << info << ", " << found << " of " << k << " pairs)";
    throw Error(ErrorKind::SolverFailure, os.str());
  }
  Pairs out;
  for (lapack_int j = 0; j < k; ++j) {
    out.values.push_back(w[j]);
    std::vector<double> v(n);
    for (lapack_int i = 0; i < n; ++i) v[i] = z[static_cast<std::size_t>(j) * n + i] * s[i];
    out.vectors.push_back(std::move(v));
  }
  return out;
}

}  // namespace

EigenResult eigen_solve(const ProfileCurve& curve, int m, int count, std::size_t n) {
  if (count < 1) throw Error(ErrorKind::InvalidParams, "eigenpair count must be positive");
  const auto coarse_op = assemble_mode(curve, m, n);
  const auto fine_op = assemble_mode(curve, m, 2 * n);
  const auto coarse = lowest_pairs(coarse_op, count);
  const auto fine = lowest_pairs(fine_op, count);

  EigenResult out;
  out.m = m;
  out.n = n;
  out.coarse_eigenvalues = coarse.values;
  out.fine_eigenvalues = fine.values;
  out.mesh = fine_op.mesh;
  for (std::size_t j = 0; j < fine.values.size(); ++j) {
    out.eigenvalues.push_back((4.0 * fine.values[j] - coarse.values[j]) / 3.0);
    // back onto the full mesh: zero at the boundary, and at the axis for m >= 1
    std::vector<double> u(fine_op.mesh.size(), 0.0);
    const std::size_t lo = m == 0 ? 0 : 1;
    const auto& v = fine.vectors[j];
    std::copy(v.begin(), v.end(), u.begin() + lo);
    const auto peak = std::max_element(u.begin(), u.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    if (*peak < 0) {
      for (auto& x : u) x = -x;
    }
    out.eigenfunctions.push_back(std::move(u));
  }
  return out;
}

double kernel_residual_m1(double c_o, const UniformSamples& u, std::span<const double> f) {
  const auto p = apply_P(c_o, u, f);
  double worst = 0.0;
  for (std::size_t i = stencil::kHalfWidth; i + stencil::kHalfWidth < u.size(); ++i) {
    worst = std::max(worst, std::abs(p[i] - f[i] / (u.r[i] * u.r[i])));
  }
  return worst;
}

double kernel_residual_m1(const ProfileCurve& curve, std::size_t n) {
  const auto u = resample_interior(curve, n);
  std::vector<double> f(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) f[i] = std::sin(u.phi[i]);
  return kernel_residual_m1(curve.params().c_o(), u, f);
}

namespace {

double min_abs(const std::vector<double>& v) {
  double best = std::numeric_limits<double>::infinity();
  for (double x : v) best = std::min(best, std::abs(x));
  return best;
}

int count_within(const std::vector<double>& v, double band) {
  return static_cast<int>(std::count_if(v.begin(), v.end(), [band](double x) { return std::abs(x) < band; }));
}

}  // namespace

BifurcationCertificate certify(const Sigma0Solution& sigma0, const LinearizedSolution& lin,
                               const CertifyOptions& options) {
  BifurcationCertificate cert;
  const auto& p = sigma0.params;
  const auto& curve = sigma0.curve;
  cert.c_o = p.c_o();
  cert.z_o = p.z_o();
  cert.R = curve.end_state().r;
  cert.Z = curve.end_state().z;
  if (!(p.c_o() > 0.0) || !p.sigma0_admissible()) {
    cert.verdict = Verdict::NotApplicable;
    cert.reason = "profile is not a tangential disc with positive spontaneous curvature";
    return cert;
  }

  std::vector<std::string> missing;
  if (curve.stop_reason() != StopReason::TangentHorizontal) missing.push_back("tangential disc profile");
  if (!lin.trajectory || lin.h.empty()) missing.push_back("solution of P[h] = -2");
  else if (std::abs(lin.ell - curve.ell()) > 1e-9 * std::max(1.0, curve.ell())) {
    missing.push_back("h solved on this profile");
  }
  if (!missing.empty()) {
    std::string msg = "certificate is missing:";
    for (const auto& m : missing) msg += " " + m + ";";
    throw Error(ErrorKind::IncompleteEvidence, msg);
  }

  // (ii) modes 0, 1, 2 concurrently
  auto job = [&](int m, int count) {
    return std::async(std::launch::async, [&curve, m, count, n = options.n] { return eigen_solve(curve, m, count, n); });
  };
  auto f0 = job(0, 3);
  auto f1 = job(1, 3);
  auto f2 = job(2, 3);
  const auto e0 = f0.get();
  const auto e1 = f1.get();
  const auto e2 = f2.get();
  cert.mesh_cells = 2 * options.n;
  cert.m0_eigenvalues = e0.eigenvalues;
  cert.m1_eigenvalues = e1.eigenvalues;
  cert.m2_eigenvalues = e2.eigenvalues;

  // scale: the m = 1 eigenvalue next closest to zero after the kernel candidate
  std::vector<double> sorted1 = e1.eigenvalues;
  std::sort(sorted1.begin(), sorted1.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  cert.m1_zero_eigenvalue = sorted1.front();
  cert.m1_scale = sorted1.size() > 1 ? std::abs(sorted1[1]) : std::abs(sorted1.front());
  cert.zero_threshold = options.zero_rel * cert.m1_scale;
  cert.m0_gap = min_abs(e0.eigenvalues);
  cert.m2_gap = min_abs(e2.eigenvalues);
  cert.m0_lowest = e0.eigenvalues.front();
  cert.kernel_dim_even = count_within(e0.eigenvalues, cert.zero_threshold) +
                         count_within(e1.eigenvalues, cert.zero_threshold) +
                         count_within(e2.eigenvalues, cert.zero_threshold);
  cert.m1_zero_residual = kernel_residual_m1(curve);

  // kernel eigenfunction against z_sigma = sin(phi)
  {
    const std::size_t j = static_cast<std::size_t>(
        std::find(e1.eigenvalues.begin(), e1.eigenvalues.end(), cert.m1_zero_eigenvalue) - e1.eigenvalues.begin());
    const auto& u = e1.eigenfunctions[j];
    std::vector<double> ref(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) ref[i] = std::sin(curve.state_at(e1.mesh[i]).phi);
    double uu = 0, ur = 0, sup = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      uu += u[i] * u[i];
      ur += u[i] * ref[i];
      sup = std::max(sup, std::abs(ref[i]));
    }
    double err = 0;
    for (std::size_t i = 0; i < u.size(); ++i) err = std::max(err, std::abs(u[i] * ur / uu - ref[i]));
    cert.m1_eigenfunction_error = err / sup;
  }

  const double floor = options.gap_rel * cert.m1_scale;
  cert.condition_ii = cert.kernel_dim_even == 1 && std::abs(cert.m1_zero_eigenvalue) < cert.zero_threshold &&
                      cert.m0_gap > floor && cert.m2_gap > floor;

  // (iii)
  cert.h_prime_boundary = lin.h_prime_boundary;
  const double solver_tol = LinearizedOptions{}.tol.rtol;
  cert.condition_iii = std::abs(lin.h_prime_boundary) > 1e3 * solver_tol;

  // (i) the fixed-boundary family exists on both sides of c_o
  {
    const BoundaryCircle circle{cert.R, cert.Z};
    const double c0 = p.c_o();
    const auto sweep = family_sweep(circle, sigma0, c0 * (1.0 - options.sweep_width), c0 * (1.0 + options.sweep_width),
                                    options.sweep_members);
    cert.family_members = static_cast<int>(sweep.members.size());
    cert.family_failures = static_cast<int>(sweep.failures.size());
    for (std::size_t i = 1; i < sweep.members.size(); ++i) {
      if ((sweep.members[i].contact_angle > 0) != (sweep.members[i - 1].contact_angle > 0)) {
        ++cert.contact_angle_sign_changes;
      }
    }
    cert.condition_i = cert.family_failures == 0 && cert.contact_angle_sign_changes == 1;
  }

  const bool ok = cert.condition_i && cert.condition_ii && cert.condition_iii;
  cert.verdict = ok ? Verdict::Pass : Verdict::Fail;
  std::ostringstream why;
  if (!cert.condition_i) why << "family continuation failed; ";
  if (!cert.condition_ii) why << "kernel is not one-dimensional with isolated zero; ";
  if (!cert.condition_iii) why << "boundary derivative of h vanishes; ";
  cert.reason = ok ? "all three conditions hold" : why.str();
  return cert;
}

}  // namespace membif
