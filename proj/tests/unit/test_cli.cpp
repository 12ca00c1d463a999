#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "membif/cli.hpp"
#include "membif/export.hpp"

using namespace membif;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "membif");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh(const std::string& name) {
  auto p = fs::temp_directory_path() / ("membif_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidParams;
}

}  // namespace

TEST_CASE("config file parsing") {
  const auto p = cli::parse_config("# disc\nR = 0.5\n  Z=-3   # height\n\nn = 400\n", "a.cfg");
  CHECK(p.values.at("R") == "0.5");
  CHECK(p.values.at("Z") == "-3");
  CHECK(p.values.at("n") == "400");
  CHECK(p.warnings.empty());

  const auto dup = cli::parse_config("R = 0.5\nZ = -3\nR = 0.7\n", "d.cfg");
  CHECK(dup.values.at("R") == "0.7");
  REQUIRE(dup.warnings.size() == 1);
  CHECK(dup.warnings[0].find("d.cfg:3") != std::string::npos);
  CHECK(dup.warnings[0].find("'R'") != std::string::npos);

  auto message = [](const std::string& text) {
    try {
      cli::parse_config(text, "x.cfg");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ParseError);
      return std::string(e.what());
    }
    return std::string();
  };
  const auto unknown = message("R = 1\nradius = 2\n");
  CHECK(unknown.find("x.cfg:2") != std::string::npos);
  CHECK(unknown.find("'radius'") != std::string::npos);
  const auto typed = message("n = 4.5\n");
  CHECK(typed.find("x.cfg:1") != std::string::npos);
  CHECK(typed.find("'n'") != std::string::npos);
  CHECK(!message("R 0.5\n").empty());
  CHECK(!message("R =\n").empty());
  CHECK(!message("kind = sphere\n").empty());
  CHECK(kind_of([] { cli::load_config("/nonexistent/run.cfg"); }) == ErrorKind::IoFailure);
}

TEST_CASE("config resolution") {
  SUBCASE("empty file and full flags") {
    const auto c = cli::resolve("certify", {}, {{"R", "0.5"}, {"Z", "-3"}}, "o");
    CHECK(c.real("R") == 0.5);
    CHECK(c.integer("n") == 1000);
    CHECK(c.real("rtol") == 1e-12);
  }
  SUBCASE("flags override the file") {
    const auto c = cli::resolve("certify", {{"R", "0.4"}, {"Z", "-3"}, {"n", "500"}}, {{"R", "0.5"}}, "o");
    CHECK(c.real("R") == 0.5);
    CHECK(c.integer("n") == 500);
  }
  SUBCASE("canonical values") {
    const auto c = cli::resolve("table1", {}, {{"z_values", " -0.60, -1.20 "}, {"c_o", "2.0"}}, "o");
    CHECK(c.values.at("z_values") == "-0.6,-1.2");
    CHECK(c.values.at("c_o") == "2");
    CHECK(c.text() == "command = table1\natol = 1e-13\nc_o = 2\nrtol = 1e-12\ntau0_rel = 1e-06\nz_values = -0.6,-1.2\n");
  }
  SUBCASE("keys are checked per command") {
    CHECK(kind_of([] { cli::resolve("trace", {}, {{"R", "1"}}, "o"); }) == ErrorKind::UsageError);
    CHECK(kind_of([] { cli::resolve("nope", {}, {}, "o"); }) == ErrorKind::UsageError);
    CHECK(kind_of([] { cli::resolve("sigma0", {}, {{"R", "x"}}, "o"); }) == ErrorKind::ParseError);
    CHECK(kind_of([] { cli::resolve("eigen", {}, {{"modes", "0,1.5"}}, "o"); }) == ErrorKind::ParseError);
  }
  SUBCASE("recipes carry the reference parameters") {
    const auto f2 = cli::resolve("fig2", {}, {}, "o");
    CHECK(f2.real("R") == 0.5);
    CHECK(f2.real("Z") == -3.0);
    CHECK(f2.real("c_min") == 1.2);
    CHECK(f2.real("c_max") == 1.8);
    const auto t1 = cli::resolve("table1", {}, {}, "o");
    CHECK(t1.reals("z_values") == std::vector<double>{-0.55, -0.6, -0.7, -0.9, -1.2});
    CHECK(t1.real("c_o") == 2.0);
    CHECK(cli::resolve("fig3", {}, {}, "o").reals("amplitude").size() == 4);
  }
}

TEST_CASE("exit codes") {
  const auto dir = fresh("codes");
  auto r = invoke({"trace", "--c_o", "2", "--z_o", "-0.2", "--out", dir.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("not below -1/c_o") != std::string::npos);

  CHECK(invoke({}).code == 1);
  CHECK(invoke({"frobnicate"}).code == 1);
  CHECK(invoke({"--bogus", "1"}).code == 1);
  CHECK(invoke({"trace", "--c_o", "2"}).code == 1);                        // z_o missing
  CHECK(invoke({"trace", "--c_o", "-1", "--z_o", "-1"}).code == 1);        // c_o must be positive
  CHECK(invoke({"certify", "--recipe", "fig1"}).code == 1);
  CHECK(invoke({"fig1"}).code == 1);
  CHECK(invoke({"--recipe", "certify"}).code == 1);
  CHECK(invoke({"sigma0", "--R", "0.5", "--Z", "-3", "--rtol", "0", "--out", dir.string()}).code == 1);
  const auto help = invoke({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("certify") != std::string::npos);

  r = invoke({"trace", "--c_o", "2", "--z_o", "-0.6", "--stop", "arc", "--arc", "1e9", "--out", dir.string()});
  CHECK(r.code == 2);
  CHECK(!r.err.empty());
  fs::remove_all(dir);
}

TEST_CASE("certify and table1 commands") {
  const auto dir = fresh("cert");
  auto r = invoke({"certify", "--R", "0.5", "--Z", "-3", "--out", dir.string()});
  REQUIRE(r.code == 0);
  const auto cert = nlohmann::json::parse(slurp(dir / "certificate.json"));
  CHECK(cert["verdict"] == "pass");
  const auto rec = nlohmann::json::parse(slurp(dir / "run.json"));
  CHECK(rec["command"] == "certify");
  CHECK(rec["inputs"]["R"] == 0.5);
  CHECK(rec["derived"]["h_prime_boundary"].get<double>() < 0.0);
  for (const auto& a : rec["artifacts"]) CHECK(fs::exists(dir / a.get<std::string>()));

  const auto tdir = fresh("table");
  r = invoke({"--recipe", "table1", "--out", tdir.string()});
  REQUIRE(r.code == 0);
  const auto csv = slurp(tdir / "table1.csv");
  CHECK(csv.rfind("c_o,z_o,h_prime_boundary\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  const auto meta = nlohmann::json::parse(slurp(tdir / "table1.json"));
  CHECK(meta["rows"].size() == 5);
  CHECK(meta["rows"][0]["profile_samples"].get<int>() > 10);
  fs::remove_all(dir);
  fs::remove_all(tdir);
}

TEST_CASE("output directory from the environment") {
  const auto dir = fresh("env");
  ::setenv("MEMBIF_OUT_DIR", dir.string().c_str(), 1);
  const auto r = invoke({"sigma0", "--R", "0.5", "--Z", "-3"});
  ::unsetenv("MEMBIF_OUT_DIR");
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "profile.csv"));
  CHECK(read_profile_csv(dir / "profile.csv").rows.size() > 10);
  fs::remove_all(dir);
}

TEST_CASE("a recorded run reproduces byte for byte") {
  for (const char* recipe : {"fig3", "table1"}) {
    CAPTURE(recipe);
    const auto a = fresh(std::string("repro_a_") + recipe), b = fresh(std::string("repro_b_") + recipe);
    REQUIRE(invoke({"--recipe", recipe, "--out", a.string()}).code == 0);
    // file-only re-run from the recorded configuration
    REQUIRE(invoke({"--config", (a / "run.cfg").string(), "--out", b.string()}).code == 0);
    const auto rec = nlohmann::json::parse(slurp(a / "run.json"));
    for (const auto& f : rec["artifacts"]) {
      const auto name = f.get<std::string>();
      CAPTURE(name);
      CHECK(slurp(a / name) == slurp(b / name));
    }
    CHECK(slurp(a / "run.json") == slurp(b / "run.json"));
    fs::remove_all(a);
    fs::remove_all(b);
  }

  SUBCASE("flags override a config file") {
    const auto a = fresh("cfg_override");
    const auto cfg = a / "in.cfg";
    write_text(cfg, "command = mesh\nR = 0.5\nZ = -3\nkind = branch\namplitude = 0.1\nn_theta = 16\nn_profile = 21\n");
    REQUIRE(invoke({"--config", cfg.string(), "--amplitude", "0.05,0.1", "--out", (a / "o").string()}).code == 0);
    const auto rec = nlohmann::json::parse(slurp(a / "o" / "run.json"));
    CHECK(rec["inputs"]["amplitude"] == nlohmann::json::array({0.05, 0.1}));
    CHECK(rec["derived"]["meshes"].size() == 2);
    CHECK(read_obj(a / "o" / "mesh_branch_01.obj").vertices.size() == 20 * 16 + 1);
    fs::remove_all(a);
  }
}
