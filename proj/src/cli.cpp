#include "vesicle/cli.hpp"

#include <CLI11.hpp>
#include <exception>
#include <filesystem>
#include <optional>

#include "vesicle/continuation.hpp"
#include "vesicle/io.hpp"
#include "vesicle/selfcheck.hpp"

namespace vesicle {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
  std::string config;
  std::string out = "out";
  std::optional<unsigned> seed;
  std::vector<int> ls;
  std::optional<std::string> subgroup;
  std::optional<int> lmax;
};

RunConfig resolve(const Options& o) {
  RunConfig c = o.config.empty() ? run_config_from_json(json::object()) : load_run_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.lmax) {
    c.l_max = *o.lmax;
    c.continuation.l_max = *o.lmax;
  }
  if (o.subgroup) {
    catalog_subgroup(*o.subgroup);
    c.subgroup = *o.subgroup;
    c.continuation.subgroup = *o.subgroup;
  }
  if (!o.ls.empty()) {
    c.ls = o.ls;
    c.continuation.l = o.ls.front();
  }
  for (int l : c.ls)
    if (l < 1) throw ConfigError("degrees must be >= 1");
  if (c.l_max < 1 || c.l_max > 64) throw ConfigError("l_max must be in [1, 64]");
  c.continuation.validate();
  return c;
}

void finish(const fs::path& dir, const RunConfig& cfg, const std::string& verb) {
  write_text(dir / "manifest.json", dump_json(manifest_json(cfg, verb)));
}

int cmd_roots(const RunConfig& cfg, const fs::path& dir, std::ostream& out) {
  CsvTable t({"l", "root", "crossing_slope"});
  for (int l : cfg.ls) {
    const RootReport r = characteristic_roots(l, cfg.model, cfg.search_interval());
    for (double x : r.roots) t.add_row({std::to_string(l), format_double(x), format_double(cfg.model.psi(x).d3)});
  }
  write_text(dir / "roots.csv", t.str());
  finish(dir, cfg, "roots");
  out << t.str();
  return 0;
}

int cmd_mode_table(const RunConfig& cfg, const fs::path& dir, std::ostream& out) {
  CsvTable t({"l", "lambda", "sigma", "tau", "coupled_tau", "slope", "kind", "tangential"});
  for (int l : cfg.ls) {
    const RootReport r = characteristic_roots(l, cfg.model, cfg.search_interval());
    std::vector<ModeData> modes;
    for (double x : r.roots) modes.push_back(mode_data(l, x, cfg.model));
    for (double x : r.tangential) {
      modes.push_back(mode_data(l, x, cfg.model));
      modes.back().tangential = true;
    }
    for (const auto& m : modes)
      t.add_row({std::to_string(l), format_double(m.lambda), format_double(m.sigma), format_double(m.tau),
                 format_double(coupled_tau(l, m.lambda, cfg.model)), format_double(m.slope),
                 m.pitchfork ? "pitchfork" : "transcritical", m.tangential ? "1" : "0"});
  }
  write_text(dir / "mode_table.csv", t.str());
  finish(dir, cfg, "mode-table");
  out << t.str();
  return 0;
}

int first_degree(const RunConfig& cfg) {
  if (cfg.ls.empty()) throw ConfigError("this verb needs a degree (--l)");
  return cfg.ls.front();
}

SpectralField fixed_harmonic(const FixedSpace& fs) {
  SpectralField f(fs.l);
  for (int m = -fs.l; m <= fs.l; ++m) f(fs.l, m) = fs.basis_unnormalized(m + fs.l, 0);
  return f;
}

int cmd_direction(const RunConfig& cfg, const fs::path& dir, std::ostream& out, std::ostream& err) {
  const int l = first_degree(cfg);
  const Subgroup g = catalog_subgroup(cfg.subgroup);
  const FixedSpace fs = fixed_space(l, g);
  const std::string stem = "direction_" + std::to_string(l) + "_" + g.name;
  json j = {{"l", l}, {"subgroup", g.name}, {"dimension", fs.dimension()}};
  if (fs.dimension() != 1) {
    j["direction"] = nullptr;
    write_text(dir / (stem + ".json"), dump_json(j));
    finish(dir, cfg, "direction");
    err << "fixed space of " << g.name << " at l = " << l << " has dimension " << fs.dimension()
        << "; no bifurcation direction\n";
    out << dump_json(j);
    return 1;
  }
  double smallest = std::numeric_limits<double>::infinity();
  for (int m = -l; m <= l; ++m)
    if (std::abs(fs.basis_unnormalized(m + l, 0)) > 1e-12 * fs.basis_unnormalized.cwiseAbs().maxCoeff())
      smallest = std::min(smallest, std::abs(fs.basis_unnormalized(m + l, 0)));
  json coeffs = json::array();
  for (int m = -l; m <= l; ++m) {
    const double un = fs.basis_unnormalized(m + l, 0);
    if (std::abs(un) <= 1e-12 * fs.basis_unnormalized.cwiseAbs().maxCoeff()) continue;
    coeffs.push_back({{"m", m}, {"normalized", fs.basis(m + l, 0)}, {"unnormalized", un},
                      {"unnormalized_scaled", un / smallest}});
  }
  j["coefficients"] = coeffs;
  json modes = json::array();
  for (double lam : characteristic_roots(l, cfg.model, cfg.search_interval()).roots) {
    const ModeData m = mode_data(l, lam, cfg.model);
    modes.push_back({{"lambda", lam}, {"tau", m.tau + 0.0}, {"coupled_tau", coupled_tau(l, lam, cfg.model) + 0.0},
                     {"pitchfork", m.pitchfork}});
  }
  j["modes"] = modes;
  write_text(dir / (stem + ".json"), dump_json(j));
  write_text(dir / ("nodal_" + std::to_string(l) + "_" + g.name + ".obj"), nodal_obj(fixed_harmonic(fs)));
  finish(dir, cfg, "direction");
  out << dump_json(j);
  return 0;
}

int cmd_nodal_export(const RunConfig& cfg, const fs::path& dir, std::ostream& out, std::ostream& err) {
  const int l = first_degree(cfg);
  const Subgroup g = catalog_subgroup(cfg.subgroup);
  const FixedSpace fs = fixed_space(l, g);
  if (fs.dimension() != 1) {
    err << "fixed space of " << g.name << " at l = " << l << " has dimension " << fs.dimension() << "\n";
    return 1;
  }
  const fs::path path = dir / ("nodal_" + std::to_string(l) + "_" + g.name + ".obj");
  write_text(path, nodal_obj(fixed_harmonic(fs)));
  finish(dir, cfg, "nodal-export");
  out << path.string() << "\n";
  return 0;
}

int cmd_residual_check(const RunConfig& cfg, const fs::path& dir, std::ostream& out) {
  const GridPtr grid = build_grid(cfg.l_max);
  json rows = json::array();
  double worst = 0.0;
  for (int k = 0; k < 30; ++k) {
    const double lam = -1.5 + 3.0 * k / 29.0;
    const double r = full_residual(cfg.model, ModelState(cfg.l_max), lam, grid).max_abs();
    worst = std::max(worst, r);
    rows.push_back({{"lambda", lam}, {"residual", r}});
  }
  const bool ok = worst <= 1e-9;
  const json j = {{"l_max", cfg.l_max}, {"tolerance", 1e-9}, {"max_residual", worst}, {"passed", ok}, {"samples", rows}};
  write_text(dir / "residual_check.json", dump_json(j));
  finish(dir, cfg, "residual-check");
  out << (ok ? "PASS" : "FAIL") << " trivial residual max " << format_double(worst) << " (tol 1e-9)\n";
  return ok ? 0 : 1;
}

int cmd_continue(const RunConfig& cfg, const fs::path& dir, std::ostream& out, std::ostream& err) {
  const BranchSolver solver(cfg.model, cfg.continuation);
  const auto modes = solver.detect_bifurcations(cfg.search_interval());
  if (modes.empty()) {
    err << "no bifurcation point for l = " << cfg.continuation.l << " and " << cfg.continuation.subgroup
        << " in the search interval\n";
    return 1;
  }
  ModeData mode = modes.back();
  if (cfg.root) {
    for (const auto& m : modes)
      if (std::abs(m.lambda - *cfg.root) < std::abs(mode.lambda - *cfg.root)) mode = m;
  }
  const double t0 = cfg.continuation.t0;
  const std::string stem = "branch_" + std::to_string(mode.l) + "_" + solver.subgroup().name;
  std::vector<Branch> branches(2);
  std::vector<std::string> failures(2);
#pragma omp parallel for schedule(static)
  for (int k = 0; k < 2; ++k) {
    const double t = k == 0 ? t0 : -t0;
    try {
      const BranchPoint start = solver.branch_switch(mode, t);
      branches[k] = solver.continue_branch(start, mode, t);
    } catch (const std::exception& e) {
      failures[k] = e.what();
    }
  }
  json summary = json::array();
  bool failed = false;
  for (int k = 0; k < 2; ++k) {
    const std::string name = stem + (k == 0 ? "_plus" : "_minus");
    if (!failures[k].empty()) {
      err << name << ": " << failures[k] << "\n";
      failed = true;
      continue;
    }
    const Branch& b = branches[k];
    write_text(dir / (name + ".jsonl"), branch_jsonl(b));
    write_text(dir / (name + ".csv"), branch_csv(b));
    if (cfg.snapshot_every > 0)
      for (std::size_t p = 0; p < b.points.size(); p += cfg.snapshot_every) {
        char idx[16];
        std::snprintf(idx, sizeof(idx), "%03zu", p);
        write_text(dir / (name + "_p" + idx + ".obj"), surface_obj(solver.state(b.points[p]), b.points[p].lambda));
      }
    summary.push_back({{"file", name + ".jsonl"},
                       {"t0", b.t0},
                       {"points", b.points.size()},
                       {"folds", b.folds},
                       {"termination", b.termination}});
    out << name << ": " << b.points.size() << " points, " << b.folds << " folds, " << b.termination << "\n";
  }
  json m = manifest_json(cfg, "continue");
  m["mode"] = {{"l", mode.l}, {"lambda", mode.lambda}, {"sigma", mode.sigma}, {"tau", mode.tau}};
  m["branches"] = summary;
  write_text(dir / "manifest.json", dump_json(m));
  return failed ? 1 : 0;
}

int cmd_selfcheck(const RunConfig& cfg, const fs::path& dir, std::ostream& out) {
  const auto results = run_selfcheck(cfg);
  json rows = json::array();
  bool ok = true;
  for (const auto& r : results) {
    ok = ok && r.passed;
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": measured " << format_double(r.measured) << ", tolerance "
        << format_double(r.tolerance) << " (" << r.detail << ")\n";
    rows.push_back({{"name", r.name}, {"passed", r.passed}, {"measured", r.measured}, {"tolerance", r.tolerance},
                    {"detail", r.detail}});
  }
  write_text(dir / "selfcheck.json", dump_json(rows));
  finish(dir, cfg, "selfcheck");
  return ok ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-phase vesicle bifurcation toolkit"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--l", o.ls, "degree(s)")->delimiter(',');
    sub->add_option("--subgroup", o.subgroup, "subgroup name");
    sub->add_option("--lmax", o.lmax, "truncation degree");
  };
  const std::vector<std::pair<std::string, std::string>> verbs = {
      {"roots", "characteristic roots per degree"},
      {"mode-table", "roots with sigma, tau and branch type"},
      {"direction", "fixed space and bifurcation direction"},
      {"nodal-export", "OBJ mesh of the fixed harmonic"},
      {"residual-check", "trivial-branch residual sweep"},
      {"continue", "detect, switch and continue both branches"},
      {"selfcheck", "cross-module invariant suite"}};
  for (const auto& [name, help] : verbs) add_common(app.add_subcommand(name, help));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  const std::string verb = app.get_subcommands().front()->get_name();

  try {
    const RunConfig cfg = resolve(o);
    const fs::path dir(o.out);
    if (verb == "roots") return cmd_roots(cfg, dir, out);
    if (verb == "mode-table") return cmd_mode_table(cfg, dir, out);
    if (verb == "direction") return cmd_direction(cfg, dir, out, err);
    if (verb == "nodal-export") return cmd_nodal_export(cfg, dir, out, err);
    if (verb == "residual-check") return cmd_residual_check(cfg, dir, out);
    if (verb == "continue") return cmd_continue(cfg, dir, out, err);
    if (verb == "selfcheck") return cmd_selfcheck(cfg, dir, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace vesicle
