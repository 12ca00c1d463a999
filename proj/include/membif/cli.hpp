#pragma once

// Command-line front end. Configuration is a flat "key = value" text format;
// every key has a matching --key flag. Precedence: recipe presets < file < flags.
//
// Exit codes: 0 success, 1 usage or input error, 2 numerical failure.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace membif::cli {

enum class ValueType { Real, Integer, RealList, IntegerList, Word };

struct KeySpec {
  std::string_view name;
  ValueType type;
  std::string_view help;
};
const std::vector<KeySpec>& known_keys();

struct Param {
  std::string_view key;
  std::string_view fallback;  // empty: no default
};

struct CommandSpec {
  std::string_view name;
  std::string_view summary;
  bool recipe = false;
  std::vector<Param> params;
};
const std::vector<CommandSpec>& commands();
const CommandSpec* find_command(std::string_view name);

/// Raw key -> text.
using RawConfig = std::map<std::string, std::string>;

struct ParsedFile {
  RawConfig values;
  std::vector<std::string> warnings;
};

/// Lines "key = value"; '#' starts a comment. `command` and `recipe` are
/// accepted besides the parameter keys. Throws ParseError naming the line and key.
ParsedFile parse_config(const std::string& text, const std::string& origin = "config");
ParsedFile load_config(const std::filesystem::path& path);

struct CommandConfig {
  std::string command;            // a command name or a recipe name
  RawConfig values;               // every parameter of the command, canonical text
  std::filesystem::path out_dir;

  bool has(std::string_view key) const;
  double real(std::string_view key) const;
  long integer(std::string_view key) const;
  std::vector<double> reals(std::string_view key) const;
  std::vector<long> integers(std::string_view key) const;
  std::string word(std::string_view key) const;

  /// Re-runnable configuration file text.
  std::string text() const;
};

/// Merges the layers, fills defaults, type-checks and canonicalizes every value.
/// Throws UsageError for keys the command does not take, ParseError for bad values.
CommandConfig resolve(std::string_view command, const RawConfig& file, const RawConfig& flags,
                      const std::filesystem::path& out_dir);

/// Runs one resolved command, writing artifacts and run.json into out_dir.
int run(const CommandConfig& config, std::ostream& out, std::ostream& err);

/// Full entry point: argument parsing, config loading, dispatch, exit code.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace membif::cli
