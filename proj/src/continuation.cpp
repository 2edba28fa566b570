#include "vesicle/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "vesicle/geometry.hpp"

namespace vesicle {

namespace {

double max_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Evaluate, mapping a degenerate surface to an infinite residual.
std::optional<Eigen::VectorXd> try_eval(const VectorFn& F, const Eigen::VectorXd& y) {
  try {
    Eigen::VectorXd r = F(y);
    if (!r.allFinite()) return std::nullopt;
    return r;
  } catch (const DegenerateSurface&) {
    return std::nullopt;
  }
}

int column_degree(const Eigen::VectorXd& col) {
  Eigen::Index at;
  col.cwiseAbs().maxCoeff(&at);
  int l = 0;
  while (static_cast<Eigen::Index>(harmonic_count(l)) <= at) ++l;
  return l;
}

}  // namespace

NewtonResult newton(const VectorFn& F, const MatrixFn& J, Eigen::VectorXd y0, const NewtonOptions& opt) {
  NewtonResult out;
  out.y = std::move(y0);
  auto r0 = try_eval(F, out.y);
  if (!r0) throw DegenerateSurface("newton: initial guess is not admissible");
  Eigen::VectorXd r = *r0;
  for (;;) {
    out.residual = max_norm(r);
    out.history.push_back(out.residual);
    if (out.residual <= opt.tol) {
      out.converged = true;
      return out;
    }
    if (out.iterations >= opt.max_iter) return out;
    const Eigen::MatrixXd jac = J(out.y);
    const Eigen::VectorXd d = jac.colPivHouseholderQr().solve(-r);
    if (!d.allFinite()) return out;
    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h <= opt.max_halvings; ++h, alpha *= 0.5) {
      const Eigen::VectorXd trial = out.y + alpha * d;
      const auto rt = try_eval(F, trial);
      if (rt && rt->norm() < r.norm()) {
        out.y = trial;
        r = *rt;
        accepted = true;
        break;
      }
    }
    ++out.iterations;
    if (!accepted) {
      out.residual = max_norm(r);
      return out;
    }
  }
}

Parameter parameter_from_string(const std::string& s) {
  if (s == "lambda") return Parameter::lambda;
  if (s == "pressure") return Parameter::pressure;
  if (s == "inverse_epsilon") return Parameter::inverse_epsilon;
  throw ConfigError("unknown continuation parameter: " + s);
}

std::string to_string(Parameter p) {
  switch (p) {
    case Parameter::lambda: return "lambda";
    case Parameter::pressure: return "pressure";
    case Parameter::inverse_epsilon: return "inverse_epsilon";
  }
  return "lambda";
}

void ContinuationConfig::validate() const {
  if (l < 1) throw ConfigError("continuation: l must be >= 1");
  if (l_max < l) throw ConfigError("continuation: l_max must be >= l");
  if (!(t0 > 0.0)) throw ConfigError("continuation: t0 must be positive");
  if (!(ds_min > 0.0) || !(ds_min <= ds) || !(ds <= ds_max))
    throw ConfigError("continuation: need 0 < ds_min <= ds <= ds_max");
  if (!(tol > 0.0)) throw ConfigError("continuation: tol must be positive");
  if (max_newton < 1 || max_points < 1 || max_folds < 0)
    throw ConfigError("continuation: iteration and point limits must be positive");
}

ContinuationConfig continuation_config_from_json(const nlohmann::json& j) {
  ContinuationConfig c;
  if (!j.is_object()) throw ConfigError("continuation section must be an object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      if (k == "l") c.l = it->get<int>();
      else if (k == "subgroup") c.subgroup = it->get<std::string>();
      else if (k == "l_max") c.l_max = it->get<int>();
      else if (k == "t0") c.t0 = it->get<double>();
      else if (k == "ds") c.ds = it->get<double>();
      else if (k == "ds_min") c.ds_min = it->get<double>();
      else if (k == "ds_max") c.ds_max = it->get<double>();
      else if (k == "tol") c.tol = it->get<double>();
      else if (k == "max_newton") c.max_newton = it->get<int>();
      else if (k == "max_points") c.max_points = it->get<int>();
      else if (k == "max_folds") c.max_folds = it->get<int>();
      else if (k == "parameter") c.parameter = parameter_from_string(it->get<std::string>());
      else throw ConfigError("unknown continuation key: " + k);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("continuation: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json continuation_config_to_json(const ContinuationConfig& c) {
  return {{"l", c.l},           {"subgroup", c.subgroup},   {"l_max", c.l_max},
          {"t0", c.t0},         {"ds", c.ds},               {"ds_min", c.ds_min},
          {"ds_max", c.ds_max}, {"tol", c.tol},             {"max_newton", c.max_newton},
          {"max_points", c.max_points}, {"max_folds", c.max_folds},
          {"parameter", to_string(c.parameter)}};
}

namespace {

ReducedBasis basis_for(const ContinuationConfig& cfg, const Subgroup& g) {
  // a subgroup that fixes degree-1 harmonics leaves the translation mode in the space
  const bool pin = fixed_space(1, g).dimension() > 0;
  return reduce_basis(cfg.l_max, g, pin);
}

}  // namespace

BranchSolver::BranchSolver(Constitutive c, ContinuationConfig cfg, GridPtr grid)
    : model_(std::move(c)),
      cfg_(std::move(cfg)),
      group_(catalog_subgroup(cfg_.subgroup)),
      problem_(model_, grid ? grid : build_grid(cfg_.l_max), basis_for(cfg_, group_)) {
  cfg_.validate();
}

Constitutive BranchSolver::constitutive_at(double parameter) const {
  Constitutive c = model_;
  if (cfg_.parameter == Parameter::pressure) c.pressure = parameter;
  if (cfg_.parameter == Parameter::inverse_epsilon) c.epsilon = 1.0 / parameter;
  return c;
}

NewtonResult BranchSolver::newton_solve(double lambda, const Eigen::VectorXd& x0) const {
  NewtonOptions opt{cfg_.tol, cfg_.max_newton, 10};
  return newton([&](const Eigen::VectorXd& x) { return problem_.residual(x, lambda); },
                [&](const Eigen::VectorXd& x) { return problem_.jacobian(x, lambda); }, x0, opt);
}

Eigen::VectorXd BranchSolver::row_scales(double lambda) const {
  // size of the terms in each row of the trivial-state linearization
  const ReducedBasis& b = problem_.basis();
  const Derivs psi = model_.psi(lambda), bb = model_.B(lambda), e = model_.E(lambda);
  Eigen::VectorXd out(b.n_rows());
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < b.phi.cols(); ++j, ++k) {
    const double L = column_degree(b.phi.col(j)) * (column_degree(b.phi.col(j)) + 1.0);
    out(k) = 1.0 + model_.epsilon * L + std::abs(psi.d2) + std::abs(bb.d1 + e.d1) * (L + 2.0);
  }
  for (Eigen::Index j = 0; j < b.u_rows.cols(); ++j, ++k) {
    const double L = column_degree(b.u_rows.col(j)) * (column_degree(b.u_rows.col(j)) + 1.0);
    out(k) = 1.0 + bb.v * L * L + std::abs(bb.v - 0.5 * model_.pressure) * L + model_.pressure +
             std::abs(bb.d1 + e.d1) * (L + 2.0);
  }
  out(k++) = 1.0;
  out(k++) = 1.0;
  return out;
}

int BranchSolver::trivial_kernel_dimension(double lambda, double rel_tol) const {
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(problem_.basis().n_unknowns());
  const Eigen::MatrixXd jac = row_scales(lambda).cwiseInverse().asDiagonal() * problem_.jacobian(x, lambda);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
  const Eigen::VectorXd sv = svd.singularValues();
  int dim = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) < rel_tol * sv(0)) ++dim;
  return dim + static_cast<int>(std::max<Eigen::Index>(0, jac.cols() - jac.rows()));
}

std::vector<ModeData> BranchSolver::detect_bifurcations(std::pair<double, double> interval) const {
  std::vector<ModeData> out;
  if (fixed_space(cfg_.l, group_).dimension() != 1) return out;
  const RootReport roots = coupled_roots(cfg_.l, model_, interval);
  for (double lam : roots.roots) {
    // sign change already verified by the bracketing solver; confirm the rank drop
    if (trivial_kernel_dimension(lam) != 1) continue;
    if (trivial_kernel_dimension(lam + 1e-3) != 0) continue;
    out.push_back(mode_data(cfg_.l, lam, model_));
  }
  return out;
}

Eigen::VectorXd BranchSolver::direction(const ModeData& mode) const {
  ModeData m = mode;
  m.tau = coupled_tau(mode.l, mode.lambda, model_);
  const Direction d = bifurcation_direction(mode.l, group_, m, cfg_.l_max);
  Eigen::VectorXd z = problem_.coordinates(d.z);
  return z / z.norm();
}

Eigen::VectorXd BranchSolver::pack(const BranchPoint& p) const {
  Eigen::VectorXd y(p.x.size() + 1);
  y << p.x, p.parameter;
  return y;
}

Eigen::VectorXd BranchSolver::residual_y(const Eigen::VectorXd& y, double lambda) const {
  const Eigen::Index n = y.size() - 1;
  const double par = y(n);
  if (cfg_.parameter == Parameter::lambda) return problem_.residual(y.head(n), par);
  return problem_.residual(y.head(n), lambda, constitutive_at(par));
}

Eigen::MatrixXd BranchSolver::jacobian_y(const Eigen::VectorXd& y, double lambda) const {
  const Eigen::Index n = y.size() - 1;
  const double par = y(n);
  const double lam = cfg_.parameter == Parameter::lambda ? par : lambda;
  const Constitutive c = constitutive_at(par);
  const Eigen::MatrixXd jx = problem_.jacobian(y.head(n), lam, c);
  Eigen::MatrixXd out(jx.rows(), n + 1);
  out.leftCols(n) = jx;
  const double h = 1e-6 * std::max(1.0, std::abs(par));
  Eigen::VectorXd yp = y, ym = y;
  yp(n) += h;
  ym(n) -= h;
  out.col(n) = (residual_y(yp, lambda) - residual_y(ym, lambda)) / (2.0 * h);
  return out;
}

BranchPoint BranchSolver::make_point(const Eigen::VectorXd& y, double lambda, const NewtonResult& r) const {
  const Eigen::Index n = y.size() - 1;
  BranchPoint p;
  p.parameter = y(n);
  p.lambda = cfg_.parameter == Parameter::lambda ? y(n) : lambda;
  p.x = y.head(n);
  p.residual = r.residual;
  p.iterations = r.iterations;
  p.amplitude = p.x.head(n - 2).norm();
  const ModelState s = problem_.state(p.x);
  const Constitutive c = constitutive_at(p.parameter);
  const GeometryBundle g = geometry_from_u(s.u, problem_.grid());
  p.min_J = g.min_J;
  p.energy = energy(c, s, p.lambda, g);
  return p;
}

BranchPoint BranchSolver::branch_switch(const ModeData& mode, double t0) const {
  if (cfg_.parameter != Parameter::lambda)
    throw SolverError("branch_switch: switching runs in lambda; set the parameter after the switch");
  const Eigen::VectorXd z = direction(mode);
  const Eigen::Index n = z.size();
  Eigen::VectorXd y0(n + 1);
  y0 << t0 * z, mode.lambda;
  auto F = [&](const Eigen::VectorXd& y) {
    const Eigen::VectorXd r = residual_y(y, mode.lambda);
    Eigen::VectorXd out(r.size() + 1);
    out << r, z.dot(y.head(n)) - t0;
    return out;
  };
  auto J = [&](const Eigen::VectorXd& y) {
    const Eigen::MatrixXd j = jacobian_y(y, mode.lambda);
    Eigen::MatrixXd out(j.rows() + 1, j.cols());
    out.topRows(j.rows()) = j;
    out.bottomRows(1).setZero();
    out.bottomLeftCorner(1, n) = z.transpose();
    return out;
  };
  const NewtonResult r = newton(F, J, y0, {cfg_.tol, cfg_.max_newton, 10});
  if (!r.converged)
    throw SolverError("branch_switch: corrector did not converge (residual " + std::to_string(r.residual) +
                      ")");
  BranchPoint p = make_point(r.y, mode.lambda, r);
  if (p.amplitude < 0.1 * std::abs(t0)) throw SolverError("branch_switch: corrector fell back to the trivial branch");
  return p;
}

Eigen::VectorXd BranchSolver::kernel_tangent(const BranchPoint& p) const {
  const Eigen::MatrixXd j = jacobian_y(pack(p), p.lambda);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(j, Eigen::ComputeFullV);
  return svd.matrixV().col(j.cols() - 1);
}

std::optional<BranchPoint> BranchSolver::step(const BranchPoint& from, const Eigen::VectorXd& tangent,
                                              double ds) const {
  const Eigen::VectorXd y0 = pack(from);
  const double lambda = from.lambda;
  auto F = [&](const Eigen::VectorXd& y) {
    const Eigen::VectorXd r = residual_y(y, lambda);
    Eigen::VectorXd out(r.size() + 1);
    out << r, tangent.dot(y - y0) - ds;
    return out;
  };
  auto J = [&](const Eigen::VectorXd& y) {
    const Eigen::MatrixXd j = jacobian_y(y, lambda);
    Eigen::MatrixXd out(j.rows() + 1, j.cols());
    out.topRows(j.rows()) = j;
    out.bottomRows(1) = tangent.transpose();
    return out;
  };
  NewtonResult r;
  try {
    r = newton(F, J, y0 + ds * tangent, {cfg_.tol, cfg_.max_newton, 10});
  } catch (const DegenerateSurface&) {
    return std::nullopt;
  }
  if (!r.converged) return std::nullopt;
  BranchPoint p = make_point(r.y, lambda, r);
  p.s = from.s + (r.y - y0).norm();
  return p;
}

Branch BranchSolver::continue_branch(const BranchPoint& start, const ModeData& mode, double t0) const {
  Branch b;
  b.mode = mode;
  b.subgroup = group_.name;
  b.t0 = t0;
  b.parameter = cfg_.parameter;
  b.points.push_back(start);

  // initial tangent: kernel of the augmented Jacobian, oriented away from the trivial branch
  Eigen::VectorXd tangent = kernel_tangent(start);
  if (tangent.head(start.x.size()).dot(start.x) < 0.0) tangent = -tangent;

  double ds = cfg_.ds;
  double last_dpar = 0.0;
  while (static_cast<int>(b.points.size()) < cfg_.max_points) {
    const BranchPoint& cur = b.points.back();
    std::optional<BranchPoint> next;
    try {
      next = step(cur, tangent, ds);
    } catch (const DegenerateSurface&) {
      b.termination = "degenerate surface";
      return b;
    }
    if (!next) {
      ds *= 0.5;
      if (ds < cfg_.ds_min) {
        b.termination = "step floor";
        return b;
      }
      continue;
    }
    if (!(next->min_J > 0.0)) {
      b.termination = "degenerate surface";
      return b;
    }
    if (next->amplitude < 0.05 * std::abs(t0)) {
      b.termination = "returned to trivial branch";
      return b;
    }
    const Eigen::VectorXd chord = pack(*next) - pack(cur);
    const double dpar = chord(chord.size() - 1);
    if (last_dpar != 0.0 && dpar * last_dpar < 0.0) ++b.folds;
    if (dpar != 0.0) last_dpar = dpar;
    tangent = chord / chord.norm();
    if (next->iterations <= 3) ds = std::min(cfg_.ds_max, 1.5 * ds);
    b.points.push_back(std::move(*next));
    if (b.folds > cfg_.max_folds) {
      b.termination = "fold count";
      return b;
    }
  }
  b.termination = "max points";
  return b;
}

FrozenProbeReport frozen_u_probe(const Constitutive& c, double lambda, int trials, unsigned seed, int l_max) {
  const auto n = static_cast<Eigen::Index>(harmonic_count(l_max));
  ReducedBasis basis;
  basis.l_max = l_max;
  basis.phi = Eigen::MatrixXd::Identity(n, n);
  basis.u = Eigen::MatrixXd::Zero(n, 0);
  basis.u_rows = Eigen::MatrixXd::Identity(n, n);
  basis.label = "frozen-u";
  for (int l = 0; l <= l_max; ++l)
    for (int m = -l; m <= l; ++m) basis.phi_degree.push_back(l);
  const ReducedProblem prob(c, build_grid(l_max + 2), basis);

  FrozenProbeReport rep;
  rep.trials = trials;
  rep.min_stalled_residual = std::numeric_limits<double>::infinity();
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n + 2);
    const double amp = 0.5 * (t % 5 + 1) / 5.0;
    for (int l = 0; l <= l_max; ++l)
      for (int m = -l; m <= l; ++m) x(harmonic_offset(l, m)) = amp * u(rng) / (1.0 + l);
    NewtonResult r;
    try {
      r = newton([&](const Eigen::VectorXd& y) { return prob.residual(y, lambda); },
                 [&](const Eigen::VectorXd& y) { return prob.jacobian(y, lambda); }, x, {1e-9, 40, 20});
    } catch (const DegenerateSurface&) {
      ++rep.not_converged;
      continue;
    }
    if (!r.converged) {
      ++rep.not_converged;
      rep.min_stalled_residual = std::min(rep.min_stalled_residual, r.residual);
      continue;
    }
    const double a = r.y.head(n).norm();
    if (a > 1e-6) {
      ++rep.converged_nontrivial;
      rep.max_nontrivial_amplitude = std::max(rep.max_nontrivial_amplitude, a);
    } else {
      ++rep.converged_trivial;
    }
  }
  if (rep.not_converged == 0) rep.min_stalled_residual = 0.0;
  return rep;
}

StationarityReport lagrangian_stationarity(const Constitutive& c, const ModelState& s, double lambda,
                                           const GridPtr& grid, int directions, unsigned seed,
                                           int direction_band) {
  StationarityReport rep;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int L = s.l_max();
  const int band = std::min(direction_band, L);
  const auto [mu, gamma] = multipliers(c, s, lambda);
  for (int k = 0; k < directions; ++k) {
    ModelState d(L);
    Eigen::VectorXd dp = Eigen::VectorXd::Zero(harmonic_count(L)), du = dp;
    for (int l = 0; l <= band; ++l)
      for (int m = -l; m <= l; ++m) {
        dp(harmonic_offset(l, m)) = u(rng);
        du(harmonic_offset(l, m)) = u(rng);
      }
    dp /= dp.norm();
    du /= du.norm();
    d.phi = SpectralField::from_normalized(L, dp);
    d.u = SpectralField::from_normalized(L, du);
    const double h = 1e-4;
    auto shifted = [&](double t) {
      ModelState v = s;
      v.phi += t * d.phi;
      v.u += t * d.u;
      return v;
    };
    const ModelState sp = shifted(h), sm = shifted(-h);
    const double dl = (lagrangian(c, sp, lambda, grid) - lagrangian(c, sm, lambda, grid)) / (2 * h);
    const double de = (energy(c, sp, lambda, grid) - energy(c, sm, lambda, grid)) / (2 * h);
    const ConstraintValues cp = constraints(sp, grid), cm = constraints(sm, grid);
    const double da = (cp.area - cm.area) / (2 * h);
    const double dm = (lambda * (cp.area - cm.area) + cp.phase - cm.phase) / (2 * h);
    const double scale = std::max({std::abs(de), std::abs(gamma * da), std::abs(mu * dm), 1e-12});
    rep.derivatives.push_back(dl);
    rep.scales.push_back(scale);
    rep.max_ratio = std::max(rep.max_ratio, std::abs(dl) / scale);
  }
  return rep;
}

}  // namespace vesicle
