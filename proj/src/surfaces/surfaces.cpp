#include "membif/surfaces.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <utility>

namespace membif {

namespace {

using Vec3 = std::array<double, 3>;

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 face_normal(const SurfaceMesh& m, const std::array<std::size_t, 3>& f) {
  return cross(sub(m.vertices[f[1]], m.vertices[f[0]]), sub(m.vertices[f[2]], m.vertices[f[0]]));
}

// Field value for (ring, j); the ring index is passed so callers can pin the apex and boundary.
using Field = std::function<double(std::size_t ring, double tau, const ProfileState& s, double theta)>;

SurfaceMesh build(const ProfileCurve& curve, std::size_t n_theta, std::size_t n_profile, const Field& field) {
  if (n_theta < 16) throw Error(ErrorKind::InvalidParams, "n_theta must be at least 16");
  if (n_profile < 3) throw Error(ErrorKind::InvalidParams, "n_profile must be at least 3");
  SurfaceMesh m;
  m.n_theta = n_theta;
  m.n_profile = n_profile;
  const double ell = curve.ell();
  const std::size_t last = n_profile - 1;
  m.vertices.reserve(last * n_theta + 1);
  m.displacement.reserve(last * n_theta + 1);

  {
    const auto s = curve.state_at(0.0);
    const double d = field ? field(0, 0.0, s, 0.0) : 0.0;
    // nu = (0, 0, 1) on the axis since phi = pi
    m.vertices.push_back({0.0, 0.0, s.z + d});
    m.displacement.push_back(d);
  }
  for (std::size_t k = 1; k <= last; ++k) {
    const double tau = k == last ? ell : ell * static_cast<double>(k) / static_cast<double>(last);
    const auto s = k == last ? curve.end_state() : curve.state_at(tau);
    const double sp = std::sin(s.phi), cp = std::cos(s.phi);
    for (std::size_t j = 0; j < n_theta; ++j) {
      const double th = mesh_angle(j, n_theta);
      const double ct = std::cos(th);
      // theta = 0 and pi are their own mirror images
      const double st = (j == 0 || 2 * j == n_theta) ? 0.0 : std::sin(th);
      const double d = field ? field(k, tau, s, th) : 0.0;
      m.vertices.push_back({(s.r + d * sp) * ct, (s.r + d * sp) * st, s.z - d * cp});
      m.displacement.push_back(d);
    }
  }

  m.faces.reserve(n_theta * (2 * last - 1));
  for (std::size_t j = 0; j < n_theta; ++j) {
    const std::size_t jn = (j + 1) % n_theta;
    m.faces.push_back({0, m.vertex_index(1, j), m.vertex_index(1, jn)});
  }
  for (std::size_t k = 1; k < last; ++k) {
    for (std::size_t j = 0; j < n_theta; ++j) {
      const std::size_t jn = (j + 1) % n_theta;
      const auto a = m.vertex_index(k, j), b = m.vertex_index(k + 1, j);
      const auto c = m.vertex_index(k + 1, jn), d = m.vertex_index(k, jn);
      m.faces.push_back({a, b, c});
      m.faces.push_back({a, c, d});
    }
  }
  return m;
}

void check_faces(const SurfaceMesh& base, const SurfaceMesh& moved, double length) {
  const double min_area = 1e-12 * length * length;
  for (std::size_t i = 0; i < moved.faces.size(); ++i) {
    const auto n0 = face_normal(base, base.faces[i]);
    const auto n1 = face_normal(moved, moved.faces[i]);
    const double area = 0.5 * std::sqrt(dot(n1, n1));
    if (area < min_area || dot(n0, n1) <= 0.0) {
      std::ostringstream os;
      os << "perturbed triangle " << i << (area < min_area ? " collapses" : " flips");
      throw Error(ErrorKind::AmplitudeTooLarge, os.str());
    }
  }
}

double length_scale(const ProfileCurve& curve) {
  double r = 0.0;
  for (const auto& s : curve.samples()) r = std::max(r, s.r);
  return r;
}

void stamp(SurfaceMesh& m, const ProfileCurve& curve) {
  m.meta["c_o"] = curve.params().c_o();
  m.meta["z_o"] = curve.params().z_o();
  m.meta["ell"] = curve.ell();
  m.meta["n_theta"] = static_cast<double>(m.n_theta);
  m.meta["n_profile"] = static_cast<double>(m.n_profile);
}

}  // namespace

double mesh_angle(std::size_t j, std::size_t n_theta) {
  const double step = 2.0 * std::numbers::pi / static_cast<double>(n_theta);
  if (2 * j <= n_theta) return step * static_cast<double>(j);
  return -step * static_cast<double>(n_theta - j);
}

std::vector<std::size_t> SurfaceMesh::boundary() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < n_theta; ++j) out.push_back(vertex_index(n_profile - 1, j));
  return out;
}

double SurfaceMesh::area() const {
  double a = 0.0;
  for (const auto& f : faces) {
    const auto n = face_normal(*this, f);
    a += 0.5 * std::sqrt(dot(n, n));
  }
  return a;
}

long SurfaceMesh::euler_characteristic() const {
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& f : faces) {
    for (int i = 0; i < 3; ++i) {
      auto a = f[i], b = f[(i + 1) % 3];
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  }
  return static_cast<long>(vertices.size()) - static_cast<long>(edges.size()) + static_cast<long>(faces.size());
}

SurfaceMesh revolve(const ProfileCurve& curve, std::size_t n_theta, std::size_t n_profile) {
  auto m = build(curve, n_theta, n_profile, nullptr);
  m.kind = "revolve";
  stamp(m, curve);
  return m;
}

SurfaceMesh branch_linear_mesh(const Sigma0Solution& sigma0, double s, std::size_t n_theta, std::size_t n_profile) {
  const auto& curve = sigma0.curve;
  const std::size_t last = n_profile - 1;
  // z_sigma = sin(phi) vanishes on the axis (phi = pi) and on the tangential boundary (phi = 0)
  auto field = [s, last](std::size_t ring, double, const ProfileState& st, double th) {
    if (ring == 0 || ring == last) return 0.0;
    return s * std::sin(st.phi) * std::cos(th);
  };
  auto m = build(curve, n_theta, n_profile, field);
  if (s != 0.0) check_faces(build(curve, n_theta, n_profile, nullptr), m, length_scale(curve));
  m.kind = "branch";
  stamp(m, curve);
  m.meta["amplitude"] = s;
  return m;
}

SurfaceMesh family_linear_mesh(const Sigma0Solution& sigma0, const LinearizedSolution& lin, double t,
                               std::size_t n_theta, std::size_t n_profile) {
  if (lin.h.empty()) throw Error(ErrorKind::IncompleteEvidence, "family mesh needs the solved h");
  const auto& curve = sigma0.curve;
  const std::size_t last = n_profile - 1;
  // h vanishes on the boundary by construction
  auto field = [t, last, &lin](std::size_t ring, double tau, const ProfileState&, double) {
    if (ring == last) return 0.0;
    return t * lin.h_at(tau);
  };
  auto m = build(curve, n_theta, n_profile, field);
  if (t != 0.0) check_faces(build(curve, n_theta, n_profile, nullptr), m, length_scale(curve));
  m.kind = "family";
  stamp(m, curve);
  m.meta["amplitude"] = t;
  m.meta["h_prime_boundary"] = lin.h_prime_boundary;
  return m;
}

}  // namespace membif
