#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "membif/cli.hpp"
#include "membif/error.hpp"

namespace membif::cli {

namespace {

constexpr std::string_view kTableZ = "-0.55,-0.6,-0.7,-0.9,-1.2";

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string shortest(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_real(const std::string& s, double& v) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto res = std::from_chars(first, s.data() + s.size(), v);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(v);
}

bool parse_integer(const std::string& s, long& v) {
  if (s.empty()) return false;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

const KeySpec* key_spec(std::string_view name) {
  for (const auto& k : known_keys()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

const std::map<std::string_view, std::set<std::string_view>>& word_choices() {
  static const std::map<std::string_view, std::set<std::string_view>> w{
      {"stop", {"horizontal", "arc"}},
      {"kind", {"revolve", "branch", "family"}},
  };
  return w;
}

// Canonical text for a value; throws ParseError with `where` context.
std::string canonical(const KeySpec& spec, const std::string& raw, const std::string& where) {
  auto bad = [&](const std::string& what) {
    return Error(ErrorKind::ParseError, where + ": key '" + std::string(spec.name) + "': " + what + " '" + raw + "'");
  };
  switch (spec.type) {
    case ValueType::Real: {
      double v;
      if (!parse_real(raw, v)) throw bad("expected a finite number, got");
      return shortest(v);
    }
    case ValueType::Integer: {
      long v;
      if (!parse_integer(raw, v)) throw bad("expected an integer, got");
      return std::to_string(v);
    }
    case ValueType::RealList:
    case ValueType::IntegerList: {
      std::string out;
      for (const auto& item : split_list(raw)) {
        if (!out.empty()) out += ',';
        if (spec.type == ValueType::RealList) {
          double v;
          if (!parse_real(item, v)) throw bad("expected a comma-separated list of numbers, got");
          out += shortest(v);
        } else {
          long v;
          if (!parse_integer(item, v)) throw bad("expected a comma-separated list of integers, got");
          out += std::to_string(v);
        }
      }
      return out;
    }
    case ValueType::Word: {
      const auto it = word_choices().find(spec.name);
      if (raw.empty() || (it != word_choices().end() && !it->second.count(raw))) throw bad("unsupported value");
      return raw;
    }
  }
  return raw;
}

}  // namespace

const std::vector<KeySpec>& known_keys() {
  static const std::vector<KeySpec> keys{
      {"c_o", ValueType::Real, "spontaneous curvature"},
      {"z_o", ValueType::Real, "axis height (negative)"},
      {"R", ValueType::Real, "boundary circle radius"},
      {"Z", ValueType::Real, "boundary circle height"},
      {"stop", ValueType::Word, "trace stop: horizontal | arc"},
      {"arc", ValueType::Real, "arc length for stop = arc"},
      {"c_min", ValueType::Real, "lowest curvature of a family sweep"},
      {"c_max", ValueType::Real, "highest curvature of a family sweep"},
      {"members", ValueType::Integer, "family sweep size"},
      {"panels", ValueType::RealList, "family members exported as surfaces"},
      {"z_values", ValueType::RealList, "axis heights for table1 and fig1"},
      {"modes", ValueType::IntegerList, "Fourier modes to solve"},
      {"count", ValueType::Integer, "eigenpairs per mode"},
      {"n", ValueType::Integer, "coarse spectral mesh cells"},
      {"kind", ValueType::Word, "mesh kind: revolve | branch | family"},
      {"amplitude", ValueType::RealList, "perturbation amplitudes"},
      {"n_theta", ValueType::Integer, "mesh angular resolution"},
      {"n_profile", ValueType::Integer, "mesh profile samples"},
      {"rtol", ValueType::Real, "integrator relative tolerance"},
      {"atol", ValueType::Real, "integrator absolute tolerance"},
      {"tau0_rel", ValueType::Real, "axis offset relative to |z_o|"},
  };
  return keys;
}

const std::vector<CommandSpec>& commands() {
  static const std::vector<Param> loose{{"rtol", "1e-10"}, {"atol", "1e-12"}, {"tau0_rel", "1e-6"}};
  static const std::vector<Param> tight{{"rtol", "1e-12"}, {"atol", "1e-13"}, {"tau0_rel", "1e-6"}};
  auto with = [](std::vector<Param> p, const std::vector<Param>& tol) {
    p.insert(p.end(), tol.begin(), tol.end());
    return p;
  };
  static const std::vector<CommandSpec> cmds{
      {"trace", "integrate one profile from the axis", false,
       with({{"c_o", ""}, {"z_o", ""}, {"stop", "horizontal"}, {"arc", ""}}, loose)},
      {"sigma0", "shoot the tangential disc spanning a circle", false, with({{"R", ""}, {"Z", ""}}, tight)},
      {"family", "fixed-boundary family over a curvature range", false,
       with({{"R", ""}, {"Z", ""}, {"c_min", ""}, {"c_max", ""}, {"members", "13"}}, tight)},
      {"linearize", "axisymmetric kernel and h for a disc", false,
       with({{"c_o", ""}, {"z_o", ""}, {"R", ""}, {"Z", ""}}, tight)},
      {"table1", "boundary derivative of h over axis heights", false,
       with({{"c_o", "2"}, {"z_values", kTableZ}}, tight)},
      {"eigen", "separated spectra of the linearized operator", false,
       with({{"c_o", ""}, {"z_o", ""}, {"R", ""}, {"Z", ""}, {"modes", "0,1,2"}, {"count", "4"}, {"n", "1000"}},
            tight)},
      {"certify", "check the bifurcation hypotheses on a disc", false,
       with({{"R", ""}, {"Z", ""}, {"n", "1000"}}, tight)},
      {"mesh", "triangulated surface or linear perturbation", false,
       with({{"c_o", ""}, {"z_o", ""}, {"R", ""}, {"Z", ""}, {"kind", "revolve"}, {"amplitude", ""},
             {"n_theta", "64"}, {"n_profile", "241"}},
            tight)},
      {"fig1", "profiles for several axis heights at c_o = 2", true,
       with({{"c_o", "2"}, {"z_values", kTableZ}, {"n_theta", "64"}, {"n_profile", "241"}}, loose)},
      {"fig2", "family through the disc spanning (0.5, -3)", true,
       with({{"R", "0.5"}, {"Z", "-3"}, {"c_min", "1.2"}, {"c_max", "1.8"}, {"members", "25"},
             {"panels", "1.8,1.3,1.2"}, {"n_theta", "64"}, {"n_profile", "241"}},
            tight)},
      {"fig3", "linear branch surfaces at the disc spanning (0.5, -3)", true,
       with({{"R", "0.5"}, {"Z", "-3"}, {"amplitude", "-0.1,-0.05,0.05,0.1"}, {"n_theta", "64"},
             {"n_profile", "241"}},
            tight)},
  };
  return cmds;
}

const CommandSpec* find_command(std::string_view name) {
  for (const auto& c : commands()) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

ParsedFile parse_config(const std::string& text, const std::string& origin) {
  ParsedFile out;
  std::map<std::string, std::size_t> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::ParseError, where + ": expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw Error(ErrorKind::ParseError, where + ": missing key");
    const KeySpec* spec = key_spec(key);
    if (!spec && key != "command" && key != "recipe") {
      throw Error(ErrorKind::ParseError, where + ": unknown key '" + key + "'");
    }
    if (value.empty()) throw Error(ErrorKind::ParseError, where + ": key '" + key + "' has no value");
    if (spec) canonical(*spec, value, where);  // type errors point at the line
    if (auto it = seen.find(key); it != seen.end()) {
      out.warnings.push_back(where + ": key '" + key + "' repeats line " + std::to_string(it->second) +
                             "; the last value wins");
    }
    seen[key] = lineno;
    out.values[key] = value;
  }
  return out;
}

ParsedFile load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

CommandConfig resolve(std::string_view command, const RawConfig& file, const RawConfig& flags,
                      const std::filesystem::path& out_dir) {
  const CommandSpec* cmd = find_command(command);
  if (!cmd) throw Error(ErrorKind::UsageError, "unknown command '" + std::string(command) + "'");
  CommandConfig cfg;
  cfg.command = std::string(command);
  cfg.out_dir = out_dir;

  auto takes = [cmd](const std::string& key) {
    return std::any_of(cmd->params.begin(), cmd->params.end(), [&](const Param& p) { return p.key == key; });
  };
  for (const auto* layer : {&file, &flags}) {
    for (const auto& [k, v] : *layer) {
      if (k == "command" || k == "recipe") continue;
      if (!key_spec(k)) throw Error(ErrorKind::UsageError, "unknown key '" + k + "'");
      if (!takes(k)) {
        throw Error(ErrorKind::UsageError, "'" + cfg.command + "' does not take the key '" + k + "'");
      }
    }
  }
  for (const auto& p : cmd->params) {
    const std::string key(p.key);
    std::string raw;
    std::string where = "default";
    if (!p.fallback.empty()) raw = std::string(p.fallback);
    if (auto it = file.find(key); it != file.end()) raw = it->second, where = "config";
    if (auto it = flags.find(key); it != flags.end()) raw = it->second, where = "--" + key;
    if (raw.empty()) continue;
    cfg.values[key] = canonical(*key_spec(key), raw, where);
  }
  return cfg;
}

bool CommandConfig::has(std::string_view key) const { return values.count(std::string(key)) > 0; }

namespace {
const std::string& lookup(const RawConfig& values, std::string_view key) {
  auto it = values.find(std::string(key));
  if (it == values.end()) throw Error(ErrorKind::UsageError, "missing required key '" + std::string(key) + "'");
  return it->second;
}
}  // namespace

double CommandConfig::real(std::string_view key) const {
  double v = 0;
  parse_real(lookup(values, key), v);
  return v;
}

long CommandConfig::integer(std::string_view key) const {
  long v = 0;
  parse_integer(lookup(values, key), v);
  return v;
}

std::vector<double> CommandConfig::reals(std::string_view key) const {
  std::vector<double> out;
  for (const auto& s : split_list(lookup(values, key))) {
    double v = 0;
    parse_real(s, v);
    out.push_back(v);
  }
  return out;
}

std::vector<long> CommandConfig::integers(std::string_view key) const {
  std::vector<long> out;
  for (const auto& s : split_list(lookup(values, key))) {
    long v = 0;
    parse_integer(s, v);
    out.push_back(v);
  }
  return out;
}

std::string CommandConfig::word(std::string_view key) const { return lookup(values, key); }

std::string CommandConfig::text() const {
  const auto* cmd = find_command(command);
  std::string out = (cmd && cmd->recipe ? "recipe = " : "command = ") + command + "\n";
  for (const auto& [k, v] : values) out += k + " = " + v + "\n";
  return out;
}

}  // namespace membif::cli
