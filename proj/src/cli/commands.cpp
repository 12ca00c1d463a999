#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "membif/cli.hpp"
#include "membif/diagnostics.hpp"
#include "membif/export.hpp"

namespace membif::cli {

namespace {

using nlohmann::json;

class Session {
 public:
  Session(const CommandConfig& cfg, std::ostream& out) : cfg_(cfg), out_(out) {
    record_.command = cfg.command;
    for (const auto& [k, v] : cfg.values) record_.inputs[k] = typed(k);
    if (cfg.has("rtol")) {
      record_.tolerances = {{"rtol", cfg.real("rtol")}, {"atol", cfg.real("atol")}, {"tau0_rel", cfg.real("tau0_rel")}};
    }
  }

  const CommandConfig& cfg() const { return cfg_; }
  std::ostream& out() { return out_; }
  json& derived() { return record_.derived; }

  void emit(const std::string& name, const std::string& text) {
    write_text(cfg_.out_dir / name, text);
    record_.artifacts.push_back(name);
  }

  void finish() {
    emit("run.cfg", cfg_.text());
    write_json(cfg_.out_dir / "run.json", record_.to_json());
    out_ << "wrote " << record_.artifacts.size() + 1 << " files to " << cfg_.out_dir.string() << '\n';
  }

 private:
  json typed(const std::string& key) const {
    const auto spec = std::find_if(known_keys().begin(), known_keys().end(),
                                    [&](const KeySpec& k) { return k.name == key; });
    switch (spec->type) {
      case ValueType::Real: return cfg_.real(key);
      case ValueType::Integer: return cfg_.integer(key);
      case ValueType::RealList: return cfg_.reals(key);
      case ValueType::IntegerList: return cfg_.integers(key);
      case ValueType::Word: return cfg_.word(key);
    }
    return nullptr;
  }

  const CommandConfig& cfg_;
  std::ostream& out_;
  RunRecord record_;
};

std::string numbered(const std::string& stem, std::size_t i, const std::string& ext) {
  std::ostringstream os;
  os << stem << '_' << std::setw(2) << std::setfill('0') << i << ext;
  return os.str();
}

void check_tolerances(const CommandConfig& c) {
  if (!(c.real("rtol") > 0.0) || !(c.real("atol") > 0.0)) {
    throw Error(ErrorKind::InvalidParams, "tolerances must be positive");
  }
  const double t0 = c.real("tau0_rel");
  if (!(t0 > 0.0 && t0 < 1e-2)) throw Error(ErrorKind::InvalidParams, "tau0_rel must lie in (0, 1e-2)");
}

IntegrationOptions integration(const CommandConfig& c) {
  IntegrationOptions o;
  o.tol = {c.real("rtol"), c.real("atol")};
  o.tau0_rel = c.real("tau0_rel");
  return o;
}

ShootingOptions shooting(const CommandConfig& c) {
  ShootingOptions o;
  o.integration.tol = {c.real("rtol"), c.real("atol")};
  o.integration.tau0_rel = c.real("tau0_rel");
  return o;
}

LinearizedOptions linear(const CommandConfig& c) {
  LinearizedOptions o;
  o.tol = {c.real("rtol"), c.real("atol")};
  o.tau0_rel = c.real("tau0_rel");
  return o;
}

std::size_t positive(const CommandConfig& c, std::string_view key, long minimum) {
  const long v = c.integer(key);
  if (v < minimum) {
    throw Error(ErrorKind::InvalidParams, std::string(key) + " must be at least " + std::to_string(minimum));
  }
  return static_cast<std::size_t>(v);
}

BoundaryCircle circle_of(const CommandConfig& c) {
  BoundaryCircle circle{c.real("R"), c.real("Z")};
  circle.validate();
  return circle;
}

ProfileCurve horizontal_disc(const ModelParams& p, const IntegrationOptions& io) {
  if (!p.sigma0_admissible()) {
    std::ostringstream os;
    os << std::setprecision(17) << "z_o = " << p.z_o() << " is not below -1/c_o = " << -1.0 / p.c_o()
       << "; the profile never reaches a horizontal tangent";
    throw Error(ErrorKind::NotAdmissible, os.str());
  }
  return integrate_profile(p, StopCondition::phi_reaches(0.0), io);
}

// The tangential disc given either by its circle or by (c_o, z_o).
Sigma0Solution disc_of(const CommandConfig& c) {
  const bool by_params = c.has("c_o") || c.has("z_o");
  const bool by_circle = c.has("R") || c.has("Z");
  if (by_params == by_circle) {
    throw Error(ErrorKind::UsageError, "'" + c.command + "' needs either c_o and z_o, or R and Z");
  }
  if (by_circle) return shoot_sigma0(circle_of(c), std::nullopt, shooting(c));
  const ModelParams p(c.real("c_o"), c.real("z_o"));
  auto curve = horizontal_disc(p, shooting(c).integration);
  const double phi = curve.end_state().phi;
  return {p, std::move(curve), phi, 0.0};
}

void describe_disc(Session& s, const Sigma0Solution& d) {
  auto& j = s.derived();
  j["c_o"] = d.params.c_o();
  j["z_o"] = d.params.z_o();
  j["ell"] = d.curve.ell();
  j["boundary"] = {{"r", d.curve.end_state().r}, {"z", d.curve.end_state().z}, {"phi", d.boundary_phi}};
  j["match_residual"] = d.match_residual;
  j["energy"] = energy(d.curve);
}

int contact_sign_changes(const FamilySweep& sweep) {
  int n = 0;
  for (std::size_t i = 1; i < sweep.members.size(); ++i) {
    if ((sweep.members[i - 1].contact_angle < 0.0) != (sweep.members[i].contact_angle < 0.0)) ++n;
  }
  return n;
}

json sweep_json(const FamilySweep& sweep) {
  json members = json::array(), failures = json::array();
  for (const auto& m : sweep.members) members.push_back(to_json(m));
  for (const auto& f : sweep.failures) failures.push_back({{"c", f.c}, {"message", f.message}});
  // family parameter t enters as c = c_o + t; d/dt of the normal displacement is +h
  return {{"members", members},
          {"failures", failures},
          {"contact_angle_sign_changes", contact_sign_changes(sweep)},
          {"parameterization", "c = c_o + t"},
          {"normal_derivative_sign", 1}};
}

FamilySweep sweep_of(const CommandConfig& c, const BoundaryCircle& circle, const Sigma0Solution& disc) {
  const double lo = c.real("c_min"), hi = c.real("c_max");
  if (!(lo > 0.0 && lo < hi)) throw Error(ErrorKind::InvalidParams, "need 0 < c_min < c_max");
  auto sweep = family_sweep(circle, disc, lo, hi, static_cast<int>(positive(c, "members", 2)), shooting(c));
  if (sweep.members.empty()) throw Error(ErrorKind::NoConvergence, "no family member converged");
  return sweep;
}

std::string h_csv(const LinearizedSolution& lin) {
  std::string out = "tau,sigma,h,h_sigma,psi\n";
  for (std::size_t i = 0; i < lin.tau.size(); ++i) {
    out += format17(lin.tau[i]) + ',' + format17(lin.ell - lin.tau[i]) + ',' + format17(lin.h[i]) + ',' +
           format17(lin.w[i]) + ',' + format17(lin.psi[i]) + '\n';
  }
  return out;
}

void cmd_trace(Session& s) {
  const auto& c = s.cfg();
  const ModelParams p(c.real("c_o"), c.real("z_o"));
  const bool arc = c.word("stop") == "arc";
  if (arc != c.has("arc")) throw Error(ErrorKind::UsageError, "'arc' is required with stop = arc and only then");
  const auto io = integration(c);
  const auto curve = arc ? integrate_profile(p, StopCondition::arc_length(c.real("arc")), io) : horizontal_disc(p, io);
  s.emit("profile.csv", profile_csv(curve));
  const auto end = curve.end_state();
  auto& j = s.derived();
  j["c_o"] = p.c_o();
  j["z_o"] = p.z_o();
  j["ell"] = curve.ell();
  j["stop_reason"] = std::string(to_string(curve.stop_reason()));
  j["boundary"] = {{"r", end.r}, {"z", end.z}, {"phi", end.phi}};
  j["samples"] = curve.samples().size();
  j["energy"] = energy(curve);
  s.out() << std::setprecision(15) << "trace: ell = " << curve.ell() << "  end (r, z, phi) = (" << end.r << ", "
          << end.z << ", " << end.phi << ")\n";
}

void cmd_sigma0(Session& s) {
  const auto circle = circle_of(s.cfg());
  const auto d = shoot_sigma0(circle, std::nullopt, shooting(s.cfg()));
  s.emit("profile.csv", profile_csv(d.curve));
  describe_disc(s, d);
  s.derived()["iterations"] = d.iterations;
  s.derived()["used_grid"] = d.used_grid;
  s.out() << std::setprecision(15) << "sigma0: c_o = " << d.params.c_o() << "  z_o = " << d.params.z_o()
          << "  ell = " << d.curve.ell() << "  mismatch = " << d.match_residual << '\n';
}

void cmd_family(Session& s) {
  const auto circle = circle_of(s.cfg());
  const auto d = shoot_sigma0(circle, std::nullopt, shooting(s.cfg()));
  const auto sweep = sweep_of(s.cfg(), circle, d);
  s.emit("family.csv", family_csv(sweep));
  for (std::size_t i = 0; i < sweep.members.size(); ++i) {
    s.emit(numbered("member", i, ".csv"), profile_csv(sweep.members[i].curve));
  }
  s.derived()["sigma0_c_o"] = d.params.c_o();
  s.derived()["family"] = sweep_json(sweep);
  s.out() << "family: " << sweep.members.size() << " members, " << sweep.failures.size() << " failures, "
          << contact_sign_changes(sweep) << " contact-angle sign change(s)\n";
}

void cmd_linearize(Session& s) {
  const auto d = disc_of(s.cfg());
  const auto lin = solve_h(d.curve, linear(s.cfg()));
  s.emit("profile.csv", profile_csv(d.curve));
  s.emit("linearized.csv", h_csv(lin));
  describe_disc(s, d);
  s.derived()["h_prime_boundary"] = lin.h_prime_boundary;
  s.derived()["alpha"] = lin.alpha;
  s.out() << std::setprecision(15) << "linearize: h_sigma(0) = " << lin.h_prime_boundary << '\n';
}

void cmd_table1(Session& s) {
  const auto& c = s.cfg();
  const auto zs = c.reals("z_values");
  const auto opts = linear(c);
  const auto rows = compute_table1(c.real("c_o"), zs, opts);
  s.emit("table1.csv", table_csv(rows));
  json meta;
  meta["c_o"] = c.real("c_o");
  meta["tolerances"] = {{"rtol", opts.tol.rtol}, {"atol", opts.tol.atol}};
  meta["tau0_rel"] = opts.tau0_rel;
  meta["refinement"] = "tau0_rel and tolerances halved";
  json jr = json::array();
  for (const auto& r : rows) {
    IntegrationOptions io;
    io.tol = opts.tol;
    io.tau0_rel = opts.tau0_rel;
    const auto curve = integrate_profile(ModelParams(r.c_o, r.z_o), StopCondition::phi_reaches(0.0), io);
    jr.push_back({{"z_o", r.z_o},
                  {"h_prime_boundary", r.h_prime_boundary},
                  {"refined", r.refined},
                  {"relative_change", r.relative_change},
                  {"tau0", opts.tau0_rel * std::abs(r.z_o)},
                  {"profile_samples", curve.samples().size()},
                  {"ell", curve.ell()}});
  }
  meta["rows"] = jr;
  s.emit("table1.json", meta.dump(2) + '\n');
  s.derived()["rows"] = jr;
  s.out() << "table1 (c_o = " << c.real("c_o") << ")\n";
  for (const auto& r : rows) {
    s.out() << std::setprecision(6) << "  z_o = " << std::setw(6) << r.z_o << "  h_sigma(0) = " << std::setprecision(12)
            << r.h_prime_boundary << '\n';
  }
}

void cmd_eigen(Session& s) {
  const auto& c = s.cfg();
  const auto d = disc_of(c);
  const auto count = static_cast<int>(positive(c, "count", 1));
  const auto n = positive(c, "n", 200);
  describe_disc(s, d);
  json modes = json::object();
  for (long m : c.integers("modes")) {
    if (m < 0) throw Error(ErrorKind::InvalidParams, "modes must be non-negative");
    const auto e = eigen_solve(d.curve, static_cast<int>(m), count, n);
    s.emit("eigen_m" + std::to_string(m) + ".csv", eigen_csv(e));
    modes[std::to_string(m)] = {
        {"eigenvalues", e.eigenvalues}, {"fine", e.fine_eigenvalues}, {"coarse", e.coarse_eigenvalues}};
    s.out() << std::setprecision(10) << "m = " << m << ':';
    for (double x : e.eigenvalues) s.out() << ' ' << x;
    s.out() << '\n';
  }
  s.derived()["modes"] = modes;
  s.derived()["mesh_cells"] = n;
}

void cmd_certify(Session& s) {
  const auto& c = s.cfg();
  const auto circle = circle_of(c);
  const auto d = shoot_sigma0(circle, std::nullopt, shooting(c));
  const auto lin = solve_h(d.curve, linear(c));
  CertifyOptions co;
  co.n = positive(c, "n", 200);
  const auto cert = certify(d, lin, co);
  const auto j = to_json(cert);
  s.emit("certificate.json", j.dump(2) + '\n');
  describe_disc(s, d);
  s.derived()["h_prime_boundary"] = lin.h_prime_boundary;
  s.derived()["verdict"] = j["verdict"];
  s.out() << "certify: " << to_string(cert.verdict) << " (" << cert.reason << ")\n";
}

void emit_mesh(Session& s, const std::string& name, const SurfaceMesh& m, json& list) {
  s.emit(name, obj_text(m));
  auto j = to_json(m);
  j["file"] = name;
  list.push_back(j);
}

void cmd_mesh(Session& s) {
  const auto& c = s.cfg();
  const auto kind = c.word("kind");
  const auto nt = positive(c, "n_theta", 16), np = positive(c, "n_profile", 3);
  const auto d = disc_of(c);
  describe_disc(s, d);
  json meshes = json::array();
  if (kind == "revolve") {
    if (c.has("amplitude")) throw Error(ErrorKind::UsageError, "kind = revolve takes no amplitude");
    emit_mesh(s, "mesh_revolve.obj", revolve(d.curve, nt, np), meshes);
  } else {
    if (!c.has("amplitude")) throw Error(ErrorKind::UsageError, "kind = " + kind + " needs an amplitude list");
    std::optional<LinearizedSolution> lin;
    if (kind == "family") lin = solve_h(d.curve, linear(c));
    const auto amps = c.reals("amplitude");
    for (std::size_t i = 0; i < amps.size(); ++i) {
      const auto m = kind == "branch" ? branch_linear_mesh(d, amps[i], nt, np)
                                      : family_linear_mesh(d, *lin, amps[i], nt, np);
      emit_mesh(s, numbered("mesh_" + kind, i, ".obj"), m, meshes);
    }
  }
  s.derived()["meshes"] = meshes;
  s.out() << "mesh: " << meshes.size() << " surface(s)\n";
}

void recipe_fig1(Session& s) {
  const auto& c = s.cfg();
  const double c_o = c.real("c_o");
  const auto nt = positive(c, "n_theta", 16), np = positive(c, "n_profile", 3);
  const double line = -1.0 / c_o;
  json profiles = json::array();
  const auto zs = c.reals("z_values");
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const auto curve = horizontal_disc(ModelParams(c_o, zs[i]), integration(c));
    const auto shape = shape_diagnostics(curve);
    s.emit(numbered("fig1_profile", i, ".csv"), profile_csv(curve));
    s.emit(numbered("fig1_surface", i, ".obj"), obj_text(revolve(curve, nt, np)));
    profiles.push_back({{"z_o", zs[i]},
                        {"ell", curve.ell()},
                        {"convex", shape.convex},
                        {"below_dashed_line", zs[i] < line},
                        {"vertical_tangent_r", shape.vertical_tangent_r},
                        {"energy", energy(curve)}});
  }
  s.derived()["dashed_line_z"] = line;
  s.derived()["profiles"] = profiles;
  s.out() << "fig1: " << zs.size() << " profiles, dashed line z = " << line << '\n';
}

void recipe_fig2(Session& s) {
  const auto& c = s.cfg();
  const auto circle = circle_of(c);
  const auto nt = positive(c, "n_theta", 16), np = positive(c, "n_profile", 3);
  const auto d = shoot_sigma0(circle, std::nullopt, shooting(c));
  const auto sweep = sweep_of(c, circle, d);
  s.emit("family.csv", family_csv(sweep));
  s.emit("fig2_sigma0.csv", profile_csv(d.curve));
  s.emit("fig2_sigma0.obj", obj_text(revolve(d.curve, nt, np)));

  json panels = json::array();
  const auto targets = c.reals("panels");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    // continue from the nearest converged sweep member
    const auto& near = *std::min_element(sweep.members.begin(), sweep.members.end(), [&](const auto& a, const auto& b) {
      return std::abs(a.c - targets[i]) < std::abs(b.c - targets[i]);
    });
    const auto m = std::abs(near.c - targets[i]) == 0.0
                       ? near
                       : shoot_family_member(targets[i], circle, near.guess(), shooting(c));
    s.emit(numbered("fig2_panel", i, ".csv"), profile_csv(m.curve));
    s.emit(numbered("fig2_panel", i, ".obj"), obj_text(revolve(m.curve, nt, np)));
    panels.push_back(to_json(m));
  }
  describe_disc(s, d);
  s.derived()["family"] = sweep_json(sweep);
  s.derived()["panels"] = panels;
  s.out() << std::setprecision(12) << "fig2: disc c_o = " << d.params.c_o() << ", " << sweep.members.size()
          << " members, " << contact_sign_changes(sweep) << " contact-angle sign change(s)\n";
}

void recipe_fig3(Session& s) {
  const auto& c = s.cfg();
  const auto circle = circle_of(c);
  const auto nt = positive(c, "n_theta", 16), np = positive(c, "n_profile", 3);
  const auto d = shoot_sigma0(circle, std::nullopt, shooting(c));
  s.emit("fig3_sigma0.csv", profile_csv(d.curve));
  json meshes = json::array();
  const auto amps = c.reals("amplitude");
  for (std::size_t i = 0; i < amps.size(); ++i) {
    emit_mesh(s, numbered("fig3_branch", i, ".obj"), branch_linear_mesh(d, amps[i], nt, np), meshes);
  }
  describe_disc(s, d);
  s.derived()["meshes"] = meshes;
  s.out() << "fig3: " << amps.size() << " linear branch surfaces\n";
}

}  // namespace

int run(const CommandConfig& config, std::ostream& out, std::ostream& err) {
  try {
    Session s(config, out);
    if (config.has("rtol")) check_tolerances(config);
    const auto& name = config.command;
    if (name == "trace") cmd_trace(s);
    else if (name == "sigma0") cmd_sigma0(s);
    else if (name == "family") cmd_family(s);
    else if (name == "linearize") cmd_linearize(s);
    else if (name == "table1") cmd_table1(s);
    else if (name == "eigen") cmd_eigen(s);
    else if (name == "certify") cmd_certify(s);
    else if (name == "mesh") cmd_mesh(s);
    else if (name == "fig1") recipe_fig1(s);
    else if (name == "fig2") recipe_fig2(s);
    else if (name == "fig3") recipe_fig3(s);
    else throw Error(ErrorKind::UsageError, "unknown command '" + name + "'");
    s.finish();
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_numerical(e.kind()) ? 2 : 1;
  }
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Axisymmetric membrane discs: shooting, linearization, spectra and bifurcation checks."};
  app.name("membif");
  std::string command, config_path, recipe, out_flag;
  app.add_option("command", command, "trace | sigma0 | family | linearize | table1 | eigen | certify | mesh");
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--recipe", recipe, "fig1 | fig2 | fig3 | table1");
  app.add_option("--out", out_flag, "output directory (default $MEMBIF_OUT_DIR, else ./membif_out)");
  std::map<std::string, std::string> flag_text;
  std::map<std::string, CLI::Option*> flag_opts;
  for (const auto& k : known_keys()) {
    const std::string key(k.name);
    flag_opts[key] = app.add_option("--" + key, flag_text[key], std::string(k.help));
  }
  std::string footer = "Commands and recipes:\n";
  for (const auto& c : commands()) {
    footer += "  " + std::string(c.name) + (c.recipe ? " (recipe)" : "") + ": " + std::string(c.summary) + "\n    keys:";
    for (const auto& p : c.params) footer += " " + std::string(p.key) + (p.fallback.empty() ? "" : "=" + std::string(p.fallback));
    footer += "\n";
  }
  footer += "Exit status: 0 success, 1 usage or input error, 2 numerical failure.";
  app.footer(footer);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\nrun with --help for usage\n";
    return 1;
  }

  try {
    ParsedFile file;
    if (!config_path.empty()) file = load_config(config_path);
    for (const auto& w : file.warnings) err << "warning: " << w << '\n';

    RawConfig flags;
    for (const auto& [k, opt] : flag_opts) {
      if (opt->count() > 0) flags[k] = flag_text[k];
    }

    if (!command.empty() && !recipe.empty()) {
      throw Error(ErrorKind::UsageError, "give either a command or --recipe, not both");
    }
    std::string name = !command.empty() ? command : recipe;
    bool is_recipe = command.empty() && !recipe.empty();
    if (name.empty()) {
      const bool fc = file.values.count("command"), fr = file.values.count("recipe");
      if (fc && fr) throw Error(ErrorKind::UsageError, "config sets both command and recipe");
      if (fc) name = file.values.at("command");
      if (fr) name = file.values.at("recipe"), is_recipe = true;
    }
    if (name.empty()) throw Error(ErrorKind::UsageError, "no command given (see --help)");
    const auto* spec = find_command(name);
    if (!spec) throw Error(ErrorKind::UsageError, "unknown " + std::string(is_recipe ? "recipe" : "command") + " '" + name + "'");
    if (is_recipe && !spec->recipe && name != "table1") {
      throw Error(ErrorKind::UsageError, "'" + name + "' is a command, not a recipe");
    }
    if (!is_recipe && spec->recipe) throw Error(ErrorKind::UsageError, "'" + name + "' is a recipe; use --recipe " + name);

    std::filesystem::path out_dir = "membif_out";
    if (const char* env = std::getenv("MEMBIF_OUT_DIR"); env && *env) out_dir = env;
    if (!out_flag.empty()) out_dir = out_flag;

    const auto cfg = resolve(name, file.values, flags, out_dir);
    return run(cfg, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_numerical(e.kind()) ? 2 : 1;
  }
}

}  // namespace membif::cli
