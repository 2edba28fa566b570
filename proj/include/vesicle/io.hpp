#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "vesicle/continuation.hpp"
#include "vesicle/harmonics.hpp"
#include "vesicle/model.hpp"

namespace vesicle {

/// Shortest decimal string that reads back to the same double.
std::string format_double(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_row(std::vector<std::string> cells);
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

void write_text(const std::filesystem::path& path, const std::string& text);
/// Two-space indented dump with a trailing newline.
std::string dump_json(const nlohmann::json& j);

/// 64-bit FNV-1a of the string, as 16 hex digits.
std::string fnv1a_hex(const std::string& s);

struct RunConfig {
  nlohmann::json constitutive_json = nlohmann::json::object();
  Constitutive model;
  int l_max = 16;
  std::string subgroup = "D6d";
  std::vector<int> ls{2, 3, 4, 5, 6};
  std::pair<double, double> interval{0.0, 0.0};  // (0, 0) means the default search interval
  std::optional<double> root;                    // branch root target for `continue`
  ContinuationConfig continuation;
  int snapshot_every = 5;
  unsigned seed = 1;

  std::pair<double, double> search_interval() const;
};

/// Top-level keys: the constitutive keys (epsilon, pressure, W, B, E) plus l_max,
/// subgroup, l, interval, root, continuation, snapshot_every, seed.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& c);
RunConfig load_run_config(const std::filesystem::path& path);

/// Lat-long triangulation of the unit sphere (poles included).
struct SphereMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> faces;
};
SphereMesh sphere_mesh(int rings, int segments);

/// OBJ with "v x y z r g b" vertex colors (red > 0, blue < 0, intensity |s|/max|s|) and a
/// "vt t 0" per vertex carrying the scalar mapped affinely to [0, 1].
std::string obj_with_scalars(const std::vector<Eigen::Vector3d>& positions,
                             const std::vector<std::array<int, 3>>& faces,
                             const std::vector<double>& scalars);

/// Nodal-set mesh: unit sphere colored by the field.
std::string nodal_obj(const SpectralField& f, int rings = 48, int segments = 96);
/// Deformed surface e^u x colored by the total phase lambda + phi.
std::string surface_obj(const ModelState& s, double lambda, int rings = 48, int segments = 96);

nlohmann::json branch_point_json(const BranchPoint& p);
std::string branch_jsonl(const Branch& b);
/// Columns s, lambda, parameter, amplitude, energy, minJ, residual, iterations.
std::string branch_csv(const Branch& b);

nlohmann::json manifest_json(const RunConfig& cfg, const std::string& verb);

}  // namespace vesicle
