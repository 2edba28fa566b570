#include "vesicle/io.hpp"

#include <boost/version.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Core>

#include "vesicle/geometry.hpp"

#ifndef VESICLE_VERSION
#define VESICLE_VERSION "unknown"
#endif

namespace vesicle {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // folds -0 as well
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw std::logic_error("CsvTable: row width does not match header");
  rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out += ',';
      out += cells[k];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::pair<double, double> RunConfig::search_interval() const {
  if (interval.first == 0.0 && interval.second == 0.0) return root_interval(model);
  return interval;
}

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  json model = json::object();
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      if (k == "epsilon" || k == "pressure" || k == "W" || k == "B" || k == "E") model[k] = *it;
      else if (k == "l_max") c.l_max = it->get<int>();
      else if (k == "subgroup") c.subgroup = it->get<std::string>();
      else if (k == "l") c.ls = it->is_array() ? it->get<std::vector<int>>() : std::vector<int>{it->get<int>()};
      else if (k == "interval") {
        const auto v = it->get<std::vector<double>>();
        if (v.size() != 2 || !(v[0] < v[1])) throw ConfigError("interval must be [lo, hi] with lo < hi");
        c.interval = {v[0], v[1]};
      } else if (k == "root") c.root = it->get<double>();
      else if (k == "continuation") c.continuation = continuation_config_from_json(*it);
      else if (k == "snapshot_every") c.snapshot_every = it->get<int>();
      else if (k == "seed") c.seed = it->get<unsigned>();
      else throw ConfigError("unknown config key: " + k);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.l_max < 1 || c.l_max > 64) throw ConfigError("l_max must be in [1, 64]");
  for (int l : c.ls)
    if (l < 1) throw ConfigError("degrees in l must be >= 1");
  if (c.snapshot_every < 0) throw ConfigError("snapshot_every must be >= 0");
  c.constitutive_json = model;
  c.model = constitutive_from_json(model);
  catalog_subgroup(c.subgroup);  // throws ConfigError for unknown names
  if (!j.contains("continuation") || !j.at("continuation").contains("l_max")) c.continuation.l_max = c.l_max;
  if (!j.contains("continuation") || !j.at("continuation").contains("subgroup"))
    c.continuation.subgroup = c.subgroup;
  catalog_subgroup(c.continuation.subgroup);
  c.continuation.validate();
  return c;
}

json run_config_to_json(const RunConfig& c) {
  json j = c.constitutive_json;
  j["l_max"] = c.l_max;
  j["subgroup"] = c.subgroup;
  j["l"] = c.ls;
  if (!(c.interval.first == 0.0 && c.interval.second == 0.0)) j["interval"] = {c.interval.first, c.interval.second};
  if (c.root) j["root"] = *c.root;
  j["continuation"] = continuation_config_to_json(c.continuation);
  j["snapshot_every"] = c.snapshot_every;
  j["seed"] = c.seed;
  return j;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path.string());
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

SphereMesh sphere_mesh(int rings, int segments) {
  if (rings < 2 || segments < 3) throw DomainError("sphere_mesh: need rings >= 2 and segments >= 3");
  SphereMesh m;
  m.vertices.emplace_back(0.0, 0.0, 1.0);
  for (int i = 1; i < rings; ++i) {
    const double th = M_PI * i / rings;
    for (int j = 0; j < segments; ++j) {
      const double ps = 2.0 * M_PI * j / segments;
      m.vertices.emplace_back(std::sin(th) * std::cos(ps), std::sin(th) * std::sin(ps), std::cos(th));
    }
  }
  m.vertices.emplace_back(0.0, 0.0, -1.0);
  const int south = static_cast<int>(m.vertices.size()) - 1;
  auto at = [&](int ring, int j) { return 1 + (ring - 1) * segments + (j % segments); };
  for (int j = 0; j < segments; ++j) m.faces.push_back({0, at(1, j), at(1, j + 1)});
  for (int i = 1; i + 1 < rings; ++i)
    for (int j = 0; j < segments; ++j) {
      m.faces.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
      m.faces.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
    }
  for (int j = 0; j < segments; ++j) m.faces.push_back({south, at(rings - 1, j + 1), at(rings - 1, j)});
  return m;
}

std::string obj_with_scalars(const std::vector<Eigen::Vector3d>& positions,
                             const std::vector<std::array<int, 3>>& faces, const std::vector<double>& scalars) {
  if (positions.size() != scalars.size()) throw std::logic_error("obj_with_scalars: size mismatch");
  double smax = 0.0, lo = 0.0, hi = 0.0;
  if (!scalars.empty()) {
    lo = hi = scalars[0];
    for (double s : scalars) {
      smax = std::max(smax, std::abs(s));
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
  }
  std::ostringstream o;
  o << "# vertex colors: red positive, blue negative; vt carries the scalar on [0, 1]\n";
  o << "# scalar range " << format_double(lo) << " " << format_double(hi) << "\n";
  for (std::size_t k = 0; k < positions.size(); ++k) {
    const double a = smax > 0 ? scalars[k] / smax : 0.0;
    const double r = a > 0 ? 1.0 : 1.0 + a, b = a < 0 ? 1.0 : 1.0 - a, g = 1.0 - std::abs(a);
    const auto& p = positions[k];
    o << "v " << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z()) << ' '
      << format_double(r) << ' ' << format_double(g) << ' ' << format_double(b) << '\n';
  }
  for (double s : scalars) o << "vt " << format_double(hi > lo ? (s - lo) / (hi - lo) : 0.5) << " 0\n";
  for (const auto& f : faces)
    o << "f " << f[0] + 1 << '/' << f[0] + 1 << ' ' << f[1] + 1 << '/' << f[1] + 1 << ' ' << f[2] + 1 << '/'
      << f[2] + 1 << '\n';
  return o.str();
}

std::string nodal_obj(const SpectralField& f, int rings, int segments) {
  const SphereMesh m = sphere_mesh(rings, segments);
  std::vector<double> s;
  for (const auto& x : m.vertices) s.push_back(evaluate(f, x));
  return obj_with_scalars(m.vertices, m.faces, s);
}

std::string surface_obj(const ModelState& st, double lambda, int rings, int segments) {
  const SphereMesh m = sphere_mesh(rings, segments);
  std::vector<Eigen::Vector3d> pos;
  std::vector<double> s;
  for (const auto& x : m.vertices) {
    pos.push_back(std::exp(evaluate(st.u, x)) * x);
    s.push_back(lambda + evaluate(st.phi, x));
  }
  return obj_with_scalars(pos, m.faces, s);
}

json branch_point_json(const BranchPoint& p) {
  return {{"s", p.s},
          {"lambda", p.lambda},
          {"parameter", p.parameter},
          {"coefficients", std::vector<double>(p.x.data(), p.x.data() + p.x.size() - 2)},
          {"zeta", p.x(p.x.size() - 2)},
          {"xi", p.x(p.x.size() - 1)},
          {"residual", p.residual},
          {"amplitude", p.amplitude},
          {"energy", p.energy},
          {"min_J", p.min_J},
          {"iterations", p.iterations}};
}

std::string branch_jsonl(const Branch& b) {
  std::string out;
  for (const auto& p : b.points) out += branch_point_json(p).dump() + "\n";
  return out;
}

std::string branch_csv(const Branch& b) {
  CsvTable t({"s", "lambda", "parameter", "amplitude", "energy", "minJ", "residual", "iterations"});
  for (const auto& p : b.points)
    t.add_row({format_double(p.s), format_double(p.lambda), format_double(p.parameter), format_double(p.amplitude),
               format_double(p.energy), format_double(p.min_J), format_double(p.residual),
               std::to_string(p.iterations)});
  return t.str();
}

json manifest_json(const RunConfig& cfg, const std::string& verb) {
  const json config = run_config_to_json(cfg);
  return {{"verb", verb},
          {"config", config},
          {"config_hash", fnv1a_hex(config.dump())},
          {"seed", cfg.seed},
          {"versions",
           {{"vesicle", VESICLE_VERSION},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"boost", BOOST_LIB_VERSION},
            {"compiler", __VERSION__}}}};
}

}  // namespace vesicle
