// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "membif/cli.hpp"
#include "membif/diagnostics.hpp"
#include "membif/export.hpp"
#include "membif/linearized.hpp"
#include "membif/spectral.hpp"
#include "membif/surfaces.hpp"

using namespace membif;
namespace fs = std::filesystem;

namespace {

// m = 2 lowest eigenvalue on the (0.5, -3) disc, from the refinement study (n = 1000..4000)
constexpr double kM2Gap = 0.8278586209;
constexpr std::array<double, 5> kTableZ{-0.55, -0.6, -0.7, -0.9, -1.2};
constexpr std::array<double, 5> kTableH{-23.1896, -13.577, -7.3487, -3.8685, -2.3639};
const BoundaryCircle kDisc{0.5, -3.0};

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

ProfileCurve table_profile(double z_o) {
  IntegrationOptions io;
  io.tol = {1e-12, 1e-13};
  return integrate_profile(ModelParams(2.0, z_o), StopCondition::phi_reaches(0.0), io);
}

void c1(Outcome& o) {
  const auto rows = compute_table1(2.0, kTableZ);
  double worst = 0.0, drift = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    worst = std::max(worst, std::abs(rows[i].h_prime_boundary / kTableH[i] - 1.0));
    drift = std::max(drift, rows[i].relative_change);
  }
  o.detail << "max rel err " << fmt(worst) << ", max refinement change " << fmt(drift);
  o.require(worst < 0.02, "2% band");
  o.require(drift < 1e-3, "internal convergence");
}

void c2(Outcome& o) {
  double worst = 0.0;
  for (double c : {0.7, 1.0, 2.0, 3.5, 6.0})
    for (double k : {1.05, 1.3, 1.8, 2.5, 4.0}) {
      const ModelParams p(c, -k / c);
      worst = std::max(worst, std::abs(axis_curvature_extrapolated(p) - p.axis_rate()));
    }
  o.detail << "max abs err " << fmt(worst) << " over 25 profiles";
  o.require(worst < 1e-8, "1e-8");
}

void c3(Outcome& o) {
  const auto s = shoot_sigma0(kDisc);
  o.detail << "c_o " << s.params.c_o() << ", |phi(0)| " << fmt(std::abs(s.boundary_phi)) << ", mismatch "
           << fmt(s.match_residual);
  o.require(s.params.c_o() >= 1.45 && s.params.c_o() <= 1.55, "c_o in [1.45, 1.55]");
  o.require(std::abs(s.boundary_phi) < 1e-8, "tangency");
  o.require(s.match_residual < 1e-10, "endpoint mismatch");
}

void c4(Outcome& o) {
  double fi = 0.0, pn = 0.0, fo = 0.0, k1 = 0.0;
  for (double z : kTableZ) {
    const auto c = table_profile(z);
    fi = std::max(fi, first_integral_residual(c) / (z * z));
    pn = std::max(pn, residual_Pnu3(c));
    fo = std::max(fo, fourth_order_residual(c) / 8.0);
    k1 = std::max(k1, kernel_residual_m1(c));
  }
  o.detail << "first integral " << fmt(fi) << ", P[nu3] " << fmt(pn) << ", fourth order " << fmt(fo) << ", m=1 kernel "
           << fmt(k1);
  o.require(fi < 1e-8, "first integral");
  o.require(pn < 1e-5, "P[nu3]");
  o.require(fo < 1e-5, "fourth order");
  o.require(k1 < 1e-5, "m=1 kernel");
}

void c5(Outcome& o) {
  double worst = 0.0;
  for (double z : kTableZ) {
    const auto c = table_profile(z);
    const auto lin = solve_h(c);
    const auto oracle = h_from_support(c, lin);
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < lin.h.size(); ++i) {
      diff = std::max(diff, std::abs(lin.h[i] - oracle[i]));
      scale = std::max(scale, std::abs(oracle[i]));
    }
    worst = std::max(worst, diff / scale);
  }
  o.detail << "max rel sup " << fmt(worst);
  o.require(worst < 1e-6, "1e-6");
}

void c6(Outcome& o) {
  const auto s = shoot_sigma0(kDisc);
  const auto e0 = eigen_solve(s.curve, 0, 3);
  const auto e1 = eigen_solve(s.curve, 1, 3);
  const auto e2 = eigen_solve(s.curve, 2, 3);
  const auto cert = certify(s, solve_h(s.curve));
  const double gap1 = e1.eigenvalues[1] - e1.eigenvalues[0];
  o.detail << "m0 lowest " << fmt(e0.eigenvalues[0]) << ", m1 zero " << fmt(e1.eigenvalues[0]) << " (gap " << fmt(gap1)
           << "), z_sigma match " << fmt(cert.m1_eigenfunction_error) << ", m2 gap " << e2.eigenvalues[0];
  o.require(e0.eigenvalues[0] < 0.0, "m=0 negative");
  o.require(std::abs(e1.eigenvalues[0]) < 1e-6 * gap1, "m=1 zero");
  o.require(cert.m1_eigenfunction_error < 1e-4, "m=1 eigenfunction");
  o.require(std::abs(e2.eigenvalues[0] / kM2Gap - 1.0) < 1e-6 && e2.eigenvalues[0] > 0.0, "m=2 gap");
}

void c7(Outcome& o) {
  const auto chk = family_derivative_check(kDisc, 1e-3);
  o.detail << "rel sup err " << fmt(chk.error) << ", order " << fmt(chk.order);
  o.require(chk.error < 0.02, "2%");
  o.require(chk.order >= 1.8, "order 1.8");
}

void c8(Outcome& o) {
  double prof = 0.0, shoot = 0.0, en = 0.0;
  bool verdicts = true;
  const ModelParams base(2.0, -0.6);
  const auto a = integrate_profile(base, StopCondition::phi_reaches(0.0), IntegrationOptions{{1e-12, 1e-13}});
  const auto sa = shoot_sigma0(kDisc);
  const auto va = certify(sa, solve_h(sa.curve)).verdict;
  for (double mu : {0.5, 2.0}) {
    const auto b = integrate_profile(base.scaled(mu), StopCondition::phi_reaches(0.0), IntegrationOptions{{1e-12, 1e-13}});
    for (int i = 0; i <= 200; ++i) {
      const double t = a.ell() * i / 200.0;
      const auto x = a.state_at(t), y = b.state_at(mu * t);
      prof = std::max({prof, std::abs(y.r / mu - x.r), std::abs(y.z / mu - x.z), std::abs(y.phi - x.phi)});
    }
    prof = std::max(prof, std::abs(b.ell() / mu - a.ell()));
    en = std::max(en, std::abs(energy(b) - energy(a)));

    const auto sb = shoot_sigma0(kDisc.scaled(mu));
    shoot = std::max({shoot, std::abs(sb.params.c_o() * mu - sa.params.c_o()),
                      std::abs(sb.params.z_o() / mu - sa.params.z_o())});
    en = std::max(en, std::abs(energy(sb.curve) - energy(sa.curve)));
    verdicts = verdicts && certify(sb, solve_h(sb.curve)).verdict == va;
  }
  o.detail << "profile " << fmt(prof) << ", shooting " << fmt(shoot) << ", energy " << fmt(en) << ", verdicts "
           << (verdicts ? "equal" : "differ");
  o.require(prof < 1e-8, "profile");
  o.require(shoot < 1e-8, "shooting");
  o.require(en < 1e-8, "energy");
  o.require(verdicts && va == Verdict::Pass, "verdict");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_recipe(const std::string& recipe, const fs::path& dir) {
  const std::string out = dir.string();
  std::vector<const char*> argv{"membif", "--recipe", recipe.c_str(), "--out", out.c_str()};
  std::ostringstream sink, err;
  return cli::main(static_cast<int>(argv.size()), argv.data(), sink, err);
}

void c9(Outcome& o) {
  const auto root = fs::temp_directory_path() / "membif_acceptance";
  fs::remove_all(root);
  for (const char* r : {"fig1", "fig2", "fig3"}) o.require(run_recipe(r, root / r) == 0, std::string(r) + " exit");
  if (!o.pass) return;

  // fig1: every profile convex, axis below z = -1/c_o
  const auto rec1 = nlohmann::json::parse(slurp(root / "fig1" / "run.json"));
  const double c_o = rec1["inputs"]["c_o"].get<double>();
  int profiles = 0, bad = 0;
  for (const auto& f : rec1["artifacts"]) {
    const auto name = f.get<std::string>();
    if (name.rfind("fig1_profile_", 0) != 0) continue;
    const auto t = read_profile_csv(root / "fig1" / name);
    ++profiles;
    bool ok = t.rows.front()[3] < -1.0 / c_o;
    for (std::size_t i = 1; i + 1 < t.rows.size(); ++i) ok = ok && t.rows[i][8] < 0.0;
    bad += !ok;
  }
  o.require(profiles == 5 && bad == 0, "fig1 convex and below the dashed line");

  // fig2: contact angle changes sign exactly once
  std::istringstream fam(slurp(root / "fig2" / "family.csv"));
  std::string line;
  std::getline(fam, line);
  std::vector<double> angle;
  while (std::getline(fam, line)) {
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ls, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() == 5 && v[0] >= 1.2 - 1e-12 && v[0] <= 1.8 + 1e-12) angle.push_back(v[2]);
  }
  int changes = 0;
  for (std::size_t i = 1; i < angle.size(); ++i) changes += (angle[i - 1] < 0.0) != (angle[i] < 0.0);
  o.require(angle.size() >= 10 && changes == 1, "fig2 single contact-angle crossing");

  // fig3: theta mirror symmetry and a shared, fixed boundary ring
  const auto rec3 = nlohmann::json::parse(slurp(root / "fig3" / "run.json"));
  const double R = rec3["inputs"]["R"].get<double>(), Z = rec3["inputs"]["Z"].get<double>();
  double asym = 0.0, drift = 0.0, spread = 0.0;
  std::vector<std::array<double, 3>> ring0;
  int meshes = 0;
  for (const auto& m : rec3["derived"]["meshes"]) {
    const auto mesh = read_obj(root / "fig3" / m["file"].get<std::string>());
    const std::size_t nt = m["n_theta"].get<std::size_t>(), np = m["n_profile"].get<std::size_t>();
    ++meshes;
    for (std::size_t k = 1; k < np; ++k)
      for (std::size_t j = 0; j < nt; ++j) {
        const auto& p = mesh.vertices[1 + (k - 1) * nt + j];
        const auto& q = mesh.vertices[1 + (k - 1) * nt + (nt - j) % nt];
        asym = std::max({asym, std::abs(p[0] - q[0]), std::abs(p[1] + q[1]), std::abs(p[2] - q[2])});
      }
    std::vector<std::array<double, 3>> ring;
    for (std::size_t j = 0; j < nt; ++j) {
      const auto& p = mesh.vertices[1 + (np - 2) * nt + j];
      ring.push_back(p);
      drift = std::max({drift, std::abs(std::hypot(p[0], p[1]) - R), std::abs(p[2] - Z)});
    }
    if (ring0.empty()) ring0 = ring;
    for (std::size_t j = 0; j < ring.size() && ring.size() == ring0.size(); ++j)
      for (int d = 0; d < 3; ++d) spread = std::max(spread, std::abs(ring[j][d] - ring0[j][d]));
  }
  o.require(meshes >= 2, "fig3 meshes present");
  o.require(asym == 0.0, "fig3 mirror symmetry");
  o.require(drift < 1e-8 && spread == 0.0, "fig3 fixed boundary");
  o.detail << "fig1 " << profiles << " profiles, fig2 " << changes << " crossing over " << angle.size()
           << " members, fig3 " << meshes << " meshes (asymmetry " << fmt(asym) << ", boundary drift " << fmt(drift) << ")";
  fs::remove_all(root);
}

struct Criterion {
  int id;
  const char* name;
  double budget;  // seconds, 0 for none
  std::function<void(Outcome&)> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> all{
      {1, "tabulated transversality values", 30.0, c1},
      {2, "axis curvature", 5.0, c2},
      {3, "tangential disc through (0.5, -3)", 10.0, c3},
      {4, "identity residuals", 20.0, c4},
      {5, "h against the support-function formula", 0.0, c5},
      {6, "spectral structure", 30.0, c6},
      {7, "first-order family derivative", 0.0, c7},
      {8, "scaling equivariance", 0.0, c8},
      {9, "figure recipes", 0.0, c9},
  };
  int failures = 0;
  for (const auto& c : all) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget > 0.0 && secs > c.budget) {
      o.pass = false;
      o.detail << " [over " << c.budget << " s]";
    }
    failures += !o.pass;
    std::printf("criterion %d: %s - %s (%.2f s) %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, secs,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures;
}
