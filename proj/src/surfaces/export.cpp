#include "membif/export.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace membif {

std::string format17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

void row(std::string& out, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) out += ',';
    out += format17(v);
    first = false;
  }
  out += '\n';
}

// JSON numbers must be finite; keep non-finite diagnostics readable.
nlohmann::json num(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

nlohmann::json nums(const std::vector<double>& v) {
  auto a = nlohmann::json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

}  // namespace

std::string profile_csv(const ProfileCurve& curve) {
  std::string out = kProfileHeader;
  out += '\n';
  const double c_o = curve.params().c_o();
  for (const auto& s : curve.samples()) {
    const auto g = geometry_of(c_o, s);
    row(out, {s.tau, curve.ell() - s.tau, s.r, s.z, s.phi, g.H, g.K, g.nu3, g.kappa, g.q, g.xi});
  }
  return out;
}

std::string obj_text(const SurfaceMesh& mesh) {
  std::string out;
  out.reserve(mesh.vertices.size() * 64 + mesh.faces.size() * 24);
  for (const auto& v : mesh.vertices) {
    out += "v " + format17(v[0]) + ' ' + format17(v[1]) + ' ' + format17(v[2]) + '\n';
  }
  for (const auto& f : mesh.faces) {
    out += "f " + std::to_string(f[0] + 1) + ' ' + std::to_string(f[1] + 1) + ' ' + std::to_string(f[2] + 1) + '\n';
  }
  return out;
}

std::string family_csv(const FamilySweep& sweep) {
  std::string out = "c,z_o,contact_angle,ell,match_residual\n";
  for (const auto& m : sweep.members) row(out, {m.c, m.z_o, m.contact_angle, m.curve.ell(), m.match_residual});
  return out;
}

std::string table_csv(std::span<const Table1Row> rows) {
  std::string out = "c_o,z_o,h_prime_boundary\n";
  for (const auto& r : rows) row(out, {r.c_o, r.z_o, r.h_prime_boundary});
  return out;
}

std::string eigen_csv(const EigenResult& result) {
  std::string out = "tau,sigma";
  for (std::size_t j = 0; j < result.eigenfunctions.size(); ++j) out += ",u" + std::to_string(j);
  out += '\n';
  const double ell = result.mesh.empty() ? 0.0 : result.mesh.back();
  for (std::size_t i = 0; i < result.mesh.size(); ++i) {
    out += format17(result.mesh[i]) + ',' + format17(ell - result.mesh[i]);
    for (const auto& u : result.eigenfunctions) out += ',' + format17(u[i]);
    out += '\n';
  }
  return out;
}

ProfileTable parse_profile_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kProfileHeader) {
    throw Error(ErrorKind::ParseError, "line 1: expected header '" + std::string(kProfileHeader) + "'");
  }
  ProfileTable t;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::array<double, 11> values{};
    const char* p = line.c_str();
    for (std::size_t k = 0; k < values.size(); ++k) {
      char* end = nullptr;
      errno = 0;
      values[k] = std::strtod(p, &end);
      const char want = k + 1 == values.size() ? '\0' : ',';
      if (end == p || errno == ERANGE || *end != want) {
        throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": malformed field " + std::to_string(k + 1));
      }
      p = end + (want == ',' ? 1 : 0);
    }
    t.rows.push_back(values);
  }
  return t;
}

ProfileTable read_profile_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_profile_csv(ss.str());
}

SurfaceMesh parse_obj(const std::string& text) {
  SurfaceMesh m;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    auto bad = [&] { return Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": malformed '" + tag + "' record"); };
    if (tag == "v") {
      std::array<double, 3> v{};
      if (!(ls >> v[0] >> v[1] >> v[2])) throw bad();
      m.vertices.push_back(v);
    } else if (tag == "f") {
      std::array<long, 3> f{};
      if (!(ls >> f[0] >> f[1] >> f[2])) throw bad();
      std::array<std::size_t, 3> face{};
      for (int k = 0; k < 3; ++k) {
        if (f[k] < 1 || static_cast<std::size_t>(f[k]) > m.vertices.size()) throw bad();
        face[k] = static_cast<std::size_t>(f[k] - 1);
      }
      m.faces.push_back(face);
    } else {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": unsupported record '" + tag + "'");
    }
  }
  return m;
}

SurfaceMesh read_obj(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_obj(ss.str());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorKind::IoFailure, "cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw Error(ErrorKind::IoFailure, "write to " + path.string() + " failed");
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
  write_text(path, value.dump(2) + '\n');
}

nlohmann::json to_json(const BifurcationCertificate& c) {
  nlohmann::json j;
  j["verdict"] = std::string(to_string(c.verdict));
  j["reason"] = c.reason;
  j["c_o"] = num(c.c_o);
  j["z_o"] = num(c.z_o);
  j["R"] = num(c.R);
  j["Z"] = num(c.Z);
  j["conditions"] = {{"i", c.condition_i}, {"ii", c.condition_ii}, {"iii", c.condition_iii}};
  j["kernel_dim_even"] = c.kernel_dim_even;
  j["h_prime_boundary"] = num(c.h_prime_boundary);
  j["m1"] = {{"zero_eigenvalue", num(c.m1_zero_eigenvalue)},
             {"zero_threshold", num(c.zero_threshold)},
             {"scale", num(c.m1_scale)},
             {"kernel_residual", num(c.m1_zero_residual)},
             {"eigenfunction_error", num(c.m1_eigenfunction_error)},
             {"eigenvalues", nums(c.m1_eigenvalues)}};
  j["m0"] = {{"lowest", num(c.m0_lowest)}, {"gap", num(c.m0_gap)}, {"eigenvalues", nums(c.m0_eigenvalues)}};
  j["m2"] = {{"gap", num(c.m2_gap)}, {"eigenvalues", nums(c.m2_eigenvalues)}};
  j["mesh"] = {{"cells", c.mesh_cells}, {"fine_cells", 2 * c.mesh_cells}, {"grading", 1.5}};
  j["family"] = {{"members", c.family_members},
                 {"failures", c.family_failures},
                 {"contact_angle_sign_changes", c.contact_angle_sign_changes}};
  return j;
}

nlohmann::json to_json(const FamilyMember& m) {
  return {{"c", num(m.c)},
          {"z_o", num(m.z_o)},
          {"contact_angle", num(m.contact_angle)},
          {"ell", num(m.curve.ell())},
          {"match_residual", num(m.match_residual)},
          {"left_admissible_region", m.left_admissible_region}};
}

nlohmann::json to_json(const SurfaceMesh& m) {
  nlohmann::json meta = nlohmann::json::object();
  for (const auto& [k, v] : m.meta) meta[k] = num(v);
  return {{"kind", m.kind},
          {"vertices", m.vertices.size()},
          {"faces", m.faces.size()},
          {"n_theta", m.n_theta},
          {"n_profile", m.n_profile},
          {"meta", meta}};
}

nlohmann::json RunRecord::to_json() const {
  return {{"command", command},
          {"inputs", inputs},
          {"tolerances", tolerances},
          {"derived", derived},
          {"artifacts", artifacts},
          {"tool_version", tool_version}};
}

}  // namespace membif
