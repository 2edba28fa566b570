#include "vesicle/selfcheck.hpp"

#include <cmath>
#include <random>
#include <set>

#include <Eigen/LU>
#include <Eigen/QR>

#include "vesicle/geometry.hpp"
#include "vesicle/linear.hpp"
#include "vesicle/symmetry.hpp"

namespace vesicle {

namespace {

CheckResult verdict(std::string name, double measured, double tol, std::string detail = {}) {
  return {std::move(name), measured <= tol, measured, tol, std::move(detail)};
}

SpectralField random_field(int l_max, int band, double amp, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(harmonic_count(l_max));
  for (int l = 0; l <= band; ++l)
    for (int m = -l; m <= l; ++m) c(harmonic_offset(l, m)) = amp * u(rng) / (1.0 + l * l);
  return SpectralField::from_normalized(l_max, c);
}

GroupElement random_orthogonal(std::mt19937& rng, bool improper) {
  std::normal_distribution<double> n;
  Eigen::Matrix3d a;
  for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = n(rng);
  Eigen::HouseholderQR<Eigen::Matrix3d> qr(a);
  GroupElement q = qr.householderQ();
  if ((q.determinant() < 0) != improper) q.col(0) *= -1.0;
  return q;
}

double rel(const SpectralField& a, const SpectralField& b) {
  return (a - b).max_abs() / std::max(1.0, std::max(a.max_abs(), b.max_abs()));
}

}  // namespace

ResidualFn corrupted_tension_residual(const GridPtr& grid) {
  return [grid](const Constitutive& c, const ModelState& s, double lambda) {
    ResidualValue r = full_residual(c, s, lambda, grid);
    const ShapeTerms t = shape_terms(c, s, lambda, grid);
    for (std::size_t k = 0; k < r.r_shape.values.size(); ++k) r.r_shape.values[k] -= 2.0 * t.tension.values[k];
    return r;
  };
}

std::vector<CheckResult> run_selfcheck(const RunConfig& cfg, const SelfCheckOptions& opt) {
  std::vector<CheckResult> out;
  const Constitutive& c = cfg.model;
  const int L = cfg.l_max;
  const GridPtr grid = build_grid(L);
  const ResidualFn eval = opt.evaluator ? opt.evaluator(grid) : default_residual(grid);
  std::mt19937 rng(cfg.seed);

  {
    double worst = 0.0;
    for (int k = 0; k < 30; ++k) {
      const double lam = -1.5 + 3.0 * k / 29.0;
      const ResidualValue r = eval(c, ModelState(L), lam);
      worst = std::max({worst, r.max_abs()});
    }
    out.push_back(verdict("trivial residual", worst, 1e-9, "30 lambda values in [-1.5, 1.5]"));
  }

  {
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const SpectralField u = random_field(L, std::min(6, L), 0.3, rng);
      const GeometryBundle g = geometry_from_u(u, grid);
      std::vector<double> kj(grid->size());
      for (std::size_t i = 0; i < kj.size(); ++i) kj[i] = g.K[i] * g.J[i];
      worst = std::max(worst, std::abs(grid->integrate(kj) - 4.0 * M_PI));
    }
    out.push_back(verdict("Gauss-Bonnet", worst, 1e-8, "10 random band-limited u"));
  }

  {
    const int band = std::max(1, L / 4), proj = std::max(1, L / 2);
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      ModelState s(L);
      s.phi = random_field(L, band, 0.05, rng);
      s.u = random_field(L, band, 0.05, rng);
      s.zeta = 0.01 * k;
      s.xi = -0.01 * k;
      const GroupElement G = k == 0 ? GroupElement(-GroupElement::Identity()) : random_orthogonal(rng, k % 2 == 1);
      const double lam = 0.3;
      const ResidualValue r = eval(c, s, lam), rg = eval(c, act(G, s), lam);
      worst = std::max(worst, rel(act(G, analyze(r.r_phase, proj)), analyze(rg.r_phase, proj)));
      worst = std::max(worst, rel(act(G, analyze(r.r_shape, proj)), analyze(rg.r_shape, proj)));
    }
    out.push_back(verdict("equivariance", worst, 1e-6, "5 random (state, element) pairs including -I"));
  }

  {
    const int band = std::min(6, L);
    double worst = 0.0;
    for (double lam : {-0.6, 0.0, 0.45}) {
      for (int k = 0; k < 2; ++k) {
        LinearState z(L);
        z.G = random_field(L, band, 1.0, rng);
        z.nu = random_field(L, band, 1.0, rng);
        z.zeta = 0.3;
        z.xi = -0.2;
        const double h = 1e-6;
        ModelState sp(L), sm(L);
        sp.phi = h * z.G;
        sp.u = h * z.nu;
        sp.zeta = h * z.zeta;
        sp.xi = h * z.xi;
        sm.phi = -h * z.G;
        sm.u = -h * z.nu;
        sm.zeta = -h * z.zeta;
        sm.xi = -h * z.xi;
        const ResidualValue rp = eval(c, sp, lam), rm = eval(c, sm, lam);
        const LinearImage img = apply_residual_derivative(lam, z, c);
        const SpectralField dphase = (1.0 / (2 * h)) * (analyze(rp.r_phase, L) - analyze(rm.r_phase, L));
        const SpectralField dshape = (1.0 / (2 * h)) * (analyze(rp.r_shape, L) - analyze(rm.r_shape, L));
        worst = std::max({worst, rel(dphase, img.phase), rel(dshape, img.shape),
                          std::abs((rp.c_area - rm.c_area) / (2 * h) - img.area) / std::max(1.0, std::abs(img.area)),
                          std::abs((rp.c_phase - rm.c_phase) / (2 * h) - img.mass) / std::max(1.0, std::abs(img.mass))});
      }
    }
    out.push_back(verdict("linearization vs finite differences", worst, 1e-6, "3 lambda values, 2 directions each"));
  }

  {
    struct Row {
      int l;
      const char* group;
      int m_num, m_den;
      double ratio;
    };
    const Row rows[] = {{3, "D6d", 3, 3, 1.0},        {3, "O_minus", -2, -2, 1.0},
                        {4, "O2xZ2c", 0, 0, 1.0},     {4, "OxZ2c", 0, 4, 168.0},
                        {6, "IxZ2c", 0, 5, -3960.0},  {10, "IxZ2c", 0, 10, 896313600.0},
                        {10, "IxZ2c", 5, 10, 27360.0}, {12, "IxZ2c", 0, 10, 57001190400.0 / 4.0},
                        {12, "IxZ2c", 5, 10, -221760.0 / 4.0}};
    double worst = 0.0;
    std::string detail;
    for (const Row& r : rows) {
      const FixedSpace fs = fixed_space(r.l, catalog_subgroup(r.group));
      if (fs.dimension() != 1) {
        worst = std::numeric_limits<double>::infinity();
        detail += std::string(r.group) + " l=" + std::to_string(r.l) + " dimension " +
                  std::to_string(fs.dimension()) + "; ";
        continue;
      }
      const auto& v = fs.basis_unnormalized;
      const double got = v(r.m_num + r.l, 0) / v(r.m_den + r.l, 0);
      worst = std::max(worst, std::abs(got - r.ratio) / std::abs(r.ratio));
    }
    for (const auto& name : catalog_names()) {
      const int d = fixed_space(1, catalog_subgroup(name)).dimension();
      if ((name == "O2_minus") != (d > 0)) {
        worst = std::numeric_limits<double>::infinity();
        detail += name + " l=1 dimension " + std::to_string(d) + "; ";
      }
    }
    out.push_back(verdict("fixed-space table", worst, 1e-6, detail.empty() ? "example ratios and l=1 spaces" : detail));
  }

  {
    const FrozenProbeReport rep = frozen_u_probe(c, 0.2, opt.frozen_trials, cfg.seed);
    out.push_back(verdict("frozen-u probe", rep.converged_nontrivial, 0.0,
                          std::to_string(rep.converged_trivial) + " trivial, " + std::to_string(rep.not_converged) +
                              " stalled of " + std::to_string(rep.trials)));
  }

  {
    std::set<int> degrees(cfg.ls.begin(), cfg.ls.end());
    degrees.insert(cfg.continuation.l);
    const int need = 2 * *degrees.rbegin();
    out.push_back({"resolution", need <= L, static_cast<double>(need), static_cast<double>(L),
                   "quadratic content 2*max(l) = " + std::to_string(need) + " against l_max = " + std::to_string(L)});
  }
  return out;
}

}  // namespace vesicle
