#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "membif/export.hpp"

using namespace membif;

namespace {

const BoundaryCircle kCircle{0.5, -3.0};

const Sigma0Solution& disc() {
  static const Sigma0Solution s = shoot_sigma0(kCircle);
  return s;
}

const LinearizedSolution& disc_h() {
  static const LinearizedSolution l = solve_h(disc().curve);
  return l;
}

std::array<double, 3> normal_at(const ProfileState& s, double th) {
  return {std::sin(s.phi) * std::cos(th), std::sin(s.phi) * std::sin(th), -std::cos(s.phi)};
}

// distance from p to the polyline through pts
double to_polyline(double r, double z, const std::vector<std::array<double, 2>>& pts) {
  double best = INFINITY;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double ax = pts[i][0], az = pts[i][1];
    const double dx = pts[i + 1][0] - ax, dz = pts[i + 1][1] - az;
    const double len2 = dx * dx + dz * dz;
    double u = len2 > 0 ? ((r - ax) * dx + (z - az) * dz) / len2 : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    best = std::min(best, std::hypot(r - ax - u * dx, z - az - u * dz));
  }
  return best;
}

std::filesystem::path scratch_dir(const char* name) {
  auto p = std::filesystem::temp_directory_path() / ("membif_test_" + std::string(name));
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("revolve topology and boundary") {
  const auto& s = disc();
  const auto m = revolve(s.curve, 48, 121);
  CHECK(m.vertices.size() == 120 * 48 + 1);
  CHECK(m.displacement.size() == m.vertices.size());
  CHECK(m.euler_characteristic() == 1);
  for (const auto& f : m.faces) {
    for (auto i : f) CHECK(i < m.vertices.size());
  }
  double worst = 0.0;
  for (auto i : m.boundary()) {
    const auto& v = m.vertices[i];
    worst = std::max({worst, std::abs(std::hypot(v[0], v[1]) - kCircle.R), std::abs(v[2] - kCircle.Z)});
  }
  CHECK(worst < 1e-8);
  CHECK(m.vertices[0][2] == s.curve.params().z_o());
  const double min_area = 1e-12 * kCircle.R * kCircle.R;
  for (const auto& f : m.faces) {
    const auto &a = m.vertices[f[0]], &b = m.vertices[f[1]], &c = m.vertices[f[2]];
    const double ux = b[0] - a[0], uy = b[1] - a[1], uz = b[2] - a[2];
    const double vx = c[0] - a[0], vy = c[1] - a[1], vz = c[2] - a[2];
    const double area = 0.5 * std::sqrt(std::pow(uy * vz - uz * vy, 2) + std::pow(uz * vx - ux * vz, 2) +
                                        std::pow(ux * vy - uy * vx, 2));
    CHECK(area > min_area);
  }
  CHECK_THROWS_AS(revolve(s.curve, 15), Error);
}

TEST_CASE("mesh area converges at second order") {
  const auto& curve = disc().curve;
  const double exact = 2.0 * std::numbers::pi *
                       boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                           [&](double t) { return curve.state_at(t).r; }, 0.0, curve.ell(), 12, 1e-14);
  double e[3];
  for (int k = 0; k < 3; ++k) {
    const std::size_t f = std::size_t{1} << k;
    e[k] = std::abs(revolve(curve, 32 * f, 30 * f + 1).area() - exact);
  }
  const double o1 = std::log2(e[0] / e[1]), o2 = std::log2(e[1] / e[2]);
  CHECK(o1 == doctest::Approx(2.0).epsilon(0.1));
  CHECK(o2 == doctest::Approx(2.0).epsilon(0.1));
  CHECK(e[2] < 1e-3 * exact);
}

TEST_CASE("branch perturbation") {
  const auto& s = disc();
  const std::size_t nt = 32, np = 81;
  const auto base = revolve(s.curve, nt, np);

  SUBCASE("zero amplitude is the base mesh") {
    const auto m = branch_linear_mesh(s, 0.0, nt, np);
    CHECK(m.vertices == base.vertices);
    CHECK(m.faces == base.faces);
  }
  SUBCASE("mirror symmetry, fixed boundary, declared displacement") {
    for (double amp : {-0.1, 0.05, 0.2}) {
      CAPTURE(amp);
      const auto m = branch_linear_mesh(s, amp, nt, np);
      CHECK(m.meta.at("amplitude") == amp);
      for (std::size_t k = 1; k < np; ++k) {
        for (std::size_t j = 0; j < nt; ++j) {
          const auto& a = m.vertices[m.vertex_index(k, j)];
          const auto& b = m.vertices[m.vertex_index(k, (nt - j) % nt)];
          CHECK(a[0] == b[0]);
          CHECK(a[1] == -b[1]);
          CHECK(a[2] == b[2]);
        }
      }
      for (auto i : m.boundary()) CHECK(m.vertices[i] == base.vertices[i]);
      CHECK(m.vertices[0] == base.vertices[0]);

      double worst = 0.0;
      for (std::size_t k = 1; k < np; ++k) {
        const double tau = s.curve.ell() * static_cast<double>(k) / static_cast<double>(np - 1);
        const auto st = k + 1 == np ? s.curve.end_state() : s.curve.state_at(tau);
        for (std::size_t j = 0; j < nt; ++j) {
          const auto i = m.vertex_index(k, j);
          const auto n = normal_at(st, mesh_angle(j, nt));
          double along = 0.0, perp2 = 0.0;
          for (int c = 0; c < 3; ++c) along += (m.vertices[i][c] - base.vertices[i][c]) * n[c];
          for (int c = 0; c < 3; ++c) perp2 += std::pow(m.vertices[i][c] - base.vertices[i][c] - along * n[c], 2);
          worst = std::max({worst, std::abs(along - m.displacement[i]), std::sqrt(perp2)});
          if (k + 1 < np) {
            CHECK(m.displacement[i] == doctest::Approx(amp * std::sin(st.phi) * std::cos(mesh_angle(j, nt))));
          }
        }
      }
      CHECK(worst < 1e-14);
    }
  }
  SUBCASE("oversized amplitude") {
    CHECK_THROWS_AS(branch_linear_mesh(s, 50.0, nt, np), Error);
    try {
      branch_linear_mesh(s, 50.0, nt, np);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::AmplitudeTooLarge);
    }
  }
}

TEST_CASE("family perturbation") {
  const auto& s = disc();
  const auto& lin = disc_h();
  const std::size_t nt = 32;

  CHECK(family_linear_mesh(s, lin, 0.0, nt).vertices == revolve(s.curve, nt).vertices);
  const auto m = family_linear_mesh(s, lin, 0.05, nt);
  const auto base = revolve(s.curve, nt);
  for (auto i : m.boundary()) CHECK(m.vertices[i] == base.vertices[i]);
  CHECK(m.vertices[0][2] == doctest::Approx(base.vertices[0][2] + 0.05 * lin.h_at(0.0)).epsilon(1e-14));
  // axisymmetric: every ring is a circle
  for (std::size_t k = 1; k < m.n_profile; ++k) {
    const auto& a = m.vertices[m.vertex_index(k, 0)];
    for (std::size_t j = 1; j < nt; ++j) {
      const auto& b = m.vertices[m.vertex_index(k, j)];
      CHECK(std::hypot(b[0], b[1]) == doctest::Approx(a[0]).epsilon(1e-14));
      CHECK(b[2] == a[2]);
    }
  }

  SUBCASE("second-order distance to the shot family member") {
    // Hausdorff distance between the displaced generating curve and the member at c_o + t
    auto distance = [&](double t) {
      const std::size_t np = 2001;
      const auto mesh = family_linear_mesh(s, lin, t, 16, np);
      std::vector<std::array<double, 2>> lin_curve;
      for (std::size_t k = 0; k < np; ++k) {
        const auto& v = mesh.vertices[mesh.vertex_index(k, 0)];
        lin_curve.push_back({v[0], v[2]});
      }
      const auto member = shoot_family_member(s.params.c_o() + t, kCircle, s);
      std::vector<std::array<double, 2>> true_curve;
      for (std::size_t k = 0; k < np; ++k) {
        const auto st = member.curve.state_at(member.curve.ell() * static_cast<double>(k) / (np - 1.0));
        true_curve.push_back({st.r, st.z});
      }
      double d = 0.0;
      for (const auto& p : lin_curve) d = std::max(d, to_polyline(p[0], p[1], true_curve));
      for (const auto& p : true_curve) d = std::max(d, to_polyline(p[0], p[1], lin_curve));
      return d;
    };
    const double d1 = distance(1e-2), d2 = distance(5e-3);
    MESSAGE("hausdorff " << d1 << " " << d2);
    CHECK(d1 < 1e-2 * kCircle.R);
    CHECK(std::log2(d1 / d2) == doctest::Approx(2.0).epsilon(0.1));
  }
}

TEST_CASE("profile csv round trip") {
  const auto& curve = disc().curve;
  const auto text = profile_csv(curve);
  CHECK(text.rfind(std::string(kProfileHeader) + "\n", 0) == 0);
  const auto table = parse_profile_csv(text);
  REQUIRE(table.rows.size() == curve.samples().size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& s = curve.samples()[i];
    const auto g = geometry_of(curve.params().c_o(), s);
    const auto& row = table.rows[i];
    CHECK(row[0] == s.tau);
    CHECK(row[1] == curve.ell() - s.tau);
    CHECK(row[2] == s.r);
    CHECK(row[3] == s.z);
    CHECK(row[4] == s.phi);
    CHECK(row[5] == g.H);
    CHECK(row[6] == g.K);
    CHECK(row[7] == g.nu3);
    CHECK(row[8] == g.kappa);
    CHECK(row[9] == g.q);
    CHECK(row[10] == g.xi);
  }

  const auto dir = scratch_dir("csv");
  write_text(dir / "nested" / "p.csv", text);
  CHECK(read_profile_csv(dir / "nested" / "p.csv").rows == table.rows);
  std::filesystem::remove_all(dir);

  SUBCASE("malformed input") {
    auto kind = [](const std::string& t) {
      try {
        parse_profile_csv(t);
      } catch (const Error& e) {
        return e.kind();
      }
      return ErrorKind::InvalidParams;
    };
    CHECK(kind("tau,sigma,r\n1,2,3\n") == ErrorKind::ParseError);
    CHECK(kind(std::string(kProfileHeader) + "\n1,2,3\n") == ErrorKind::ParseError);
    CHECK(kind(std::string(kProfileHeader) + "\n1,2,3,4,5,6,7,8,9,10,x\n") == ErrorKind::ParseError);
    CHECK_THROWS_AS(read_profile_csv("/nonexistent/dir/p.csv"), Error);
  }
}

TEST_CASE("obj and json output") {
  const auto& s = disc();
  const auto m = branch_linear_mesh(s, 0.1, 16, 21);
  const auto text = obj_text(m);
  std::istringstream in(text);
  std::string tag;
  std::size_t nv = 0, nf = 0;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    ls >> tag;
    if (tag == "v") {
      double x, y, z;
      ls >> x >> y >> z;
      CHECK(x == m.vertices[nv][0]);
      CHECK(y == m.vertices[nv][1]);
      CHECK(z == m.vertices[nv][2]);
      ++nv;
    } else {
      REQUIRE(tag == "f");
      long a, b, c;
      ls >> a >> b >> c;
      for (long i : {a, b, c}) {
        CHECK(i >= 1);
        CHECK(i <= static_cast<long>(m.vertices.size()));
      }
      CHECK(a - 1 == static_cast<long>(m.faces[nf][0]));
      ++nf;
    }
  }
  CHECK(nv == m.vertices.size());
  CHECK(nf == m.faces.size());
  const auto back = parse_obj(text);
  CHECK(back.vertices == m.vertices);
  CHECK(back.faces == m.faces);
  CHECK_THROWS_AS(parse_obj("v 0 0 0\nf 1 2 3\n"), Error);

  // identical inputs, identical bytes
  CHECK(obj_text(branch_linear_mesh(shoot_sigma0(kCircle), 0.1, 16, 21)) == text);
  CHECK(profile_csv(shoot_sigma0(kCircle).curve) == profile_csv(s.curve));

  const auto cert = certify(s, disc_h());
  const auto j = to_json(cert);
  CHECK(j["verdict"] == "pass");
  CHECK(j["m2"]["gap"].get<double>() == cert.m2_gap);
  CHECK(nlohmann::json::parse(j.dump(2)) == j);

  RunRecord rec;
  rec.command = "certify";
  rec.inputs = {{"R", 0.5}, {"Z", -3.0}};
  rec.artifacts = {"certificate.json"};
  const auto rj = rec.to_json();
  CHECK(rj["tool_version"] == kToolVersion);
  CHECK(rj["artifacts"][0] == "certificate.json");
  CHECK(rj.dump().find("time") == std::string::npos);

  SUBCASE("write failures") {
    const auto dir = scratch_dir("io");
    write_text(dir / "file", "x");
    try {
      write_text(dir / "file" / "below.obj", text);
      FAIL("expected IoFailure");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::IoFailure);
    }
    std::filesystem::remove_all(dir);
  }
}
