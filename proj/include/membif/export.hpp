#pragma once

// File artifacts: profile CSV, OBJ meshes, JSON run records. Output is a pure
// function of the inputs (fixed 17-digit formatting, no timestamps).

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "membif/spectral.hpp"
#include "membif/surfaces.hpp"

namespace membif {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kProfileHeader = "tau,sigma,r,z,phi,H,K,nu3,kappa,q,xi";

/// printf %.17g
std::string format17(double x);

std::string profile_csv(const ProfileCurve& curve);
std::string obj_text(const SurfaceMesh& mesh);
std::string family_csv(const FamilySweep& sweep);
std::string table_csv(std::span<const Table1Row> rows);
/// tau, sigma, then one column per eigenfunction.
std::string eigen_csv(const EigenResult& result);

struct ProfileTable {
  std::vector<std::array<double, 11>> rows;
};
/// Throws ParseError on a header mismatch or malformed row, IoFailure if unreadable.
ProfileTable parse_profile_csv(const std::string& text);
ProfileTable read_profile_csv(const std::filesystem::path& path);

/// Vertices and faces of an OBJ written by obj_text (other fields stay empty).
SurfaceMesh parse_obj(const std::string& text);
SurfaceMesh read_obj(const std::filesystem::path& path);

/// Writes the whole file or throws IoFailure. Parent directories are created.
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& value);

nlohmann::json to_json(const BifurcationCertificate& cert);
nlohmann::json to_json(const FamilyMember& member);
nlohmann::json to_json(const SurfaceMesh& mesh);

struct RunRecord {
  std::string command;
  nlohmann::json inputs = nlohmann::json::object();      // fully resolved configuration
  nlohmann::json tolerances = nlohmann::json::object();
  nlohmann::json derived = nlohmann::json::object();
  std::vector<std::string> artifacts;                    // relative to the output directory
  std::string tool_version = kToolVersion;

  nlohmann::json to_json() const;
};

}  // namespace membif
