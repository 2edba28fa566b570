#include "vesicle/residual.hpp"

#include <cmath>
#include <exception>
#include <limits>

#include <Eigen/SVD>

#include "vesicle/kernels.hpp"

namespace vesicle {

namespace {

GridField pointwise(const GridPtr& grid, auto&& f) {
  GridField out(grid);
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = f(k);
  return out;
}

struct Evaluation {
  GridField r_phase;
  ShapeTerms terms;
  ConstraintValues cv;
};

Evaluation evaluate(const Constitutive& c, const ModelState& s, double lambda, const GridPtr& grid,
                    bool need_phase, bool need_shape) {
  const GeometryBundle g = geometry_from_u(s.u, grid);
  const auto [mu, gamma] = multipliers(c, s, lambda);
  const std::size_t n = grid->size();
  const GridField phi = synthesize(s.phi, grid);
  const TangentField3 grad_phi = surface_gradient(s.phi, grid);

  std::vector<Derivs> w(n), b(n), e(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double pt = lambda + phi.values[k];
    w[k] = c.W(pt);
    b[k] = c.B(pt);
    e[k] = c.E(pt);
  }

  Evaluation out;
  out.cv = constraints(s, g);
  if (need_phase) {
    const GridField lap = laplace_beltrami_sigma(grad_phi, g);
    out.r_phase = pointwise(grid, [&](std::size_t k) {
      const double H = g.H[k], K = g.K[k];
      return -c.epsilon * lap.values[k] + b[k].d1 * H * H + e[k].d1 * K + w[k].d1 - mu;
    });
  }
  if (!need_shape) return out;

  ShapeTerms& t = out.terms;
  const GridField bh = pointwise(grid, [&](std::size_t k) { return b[k].v * g.H[k]; });
  t.bending = laplace_beltrami_sigma(bh, g);
  if (c.E.constant()) {
    t.gauss_laplacian = GridField(grid);
    t.gauss_contraction = GridField(grid);
  } else {
    const GridField ev = pointwise(grid, [&](std::size_t k) { return e[k].v; });
    const TangentField3 grad_e = surface_gradient(ev);
    const GridField lap_e = laplace_beltrami_sigma(grad_e, g);
    // Signs follow the first variation of the E K term (checked against the Lagrangian).
    t.gauss_laplacian = pointwise(grid, [&](std::size_t k) { return 2.0 * g.H[k] * lap_e.values[k]; });
    t.gauss_contraction = curvature_contract(grad_e, g).second;
    for (double& v : t.gauss_contraction.values) v = -v;
  }
  const GridField q1 = second_form_on_gradient(grad_phi, g);
  const GridField norm2 = grad_sigma_norm2(grad_phi, g);
  t.interface = pointwise(grid, [&](std::size_t k) {
    return c.epsilon * (q1.values[k] - g.H[k] * norm2.values[k]);
  });
  t.curvature = pointwise(grid, [&](std::size_t k) {
    const double H = g.H[k];
    return 2.0 * b[k].v * H * (H * H - g.K[k]);
  });
  t.tension = pointwise(grid, [&](std::size_t k) {
    const double pt = lambda + phi.values[k];
    return -2.0 * g.H[k] * (w[k].v - gamma - mu * pt);
  });
  t.pressure = pointwise(grid, [&](std::size_t) { return -c.pressure; });
  return out;
}

}  // namespace

double ResidualValue::max_abs() const {
  return std::max({r_phase.max_abs(), r_shape.max_abs(), std::abs(c_area), std::abs(c_phase)});
}

GridField ShapeTerms::total() const {
  GridField out(bending.grid);
  for (std::size_t k = 0; k < out.values.size(); ++k)
    out.values[k] = bending.values[k] + gauss_laplacian.values[k] + gauss_contraction.values[k] +
                    interface.values[k] + curvature.values[k] + tension.values[k] +
                    pressure.values[k];
  return out;
}

GridField phase_residual(const Constitutive& c, const ModelState& s, double lambda,
                         const GridPtr& grid) {
  return evaluate(c, s, lambda, grid, true, false).r_phase;
}

ShapeTerms shape_terms(const Constitutive& c, const ModelState& s, double lambda,
                       const GridPtr& grid) {
  return evaluate(c, s, lambda, grid, false, true).terms;
}

GridField shape_residual(const Constitutive& c, const ModelState& s, double lambda,
                         const GridPtr& grid) {
  return shape_terms(c, s, lambda, grid).total();
}

ResidualValue full_residual(const Constitutive& c, const ModelState& s, double lambda,
                            const GridPtr& grid) {
  Evaluation e = evaluate(c, s, lambda, grid, true, true);
  return {std::move(e.r_phase), e.terms.total(), e.cv.area, e.cv.phase};
}

ResidualFn default_residual(const GridPtr& grid) {
  return [grid](const Constitutive& c, const ModelState& s, double lambda) {
    return full_residual(c, s, lambda, grid);
  };
}

ReducedBasis full_basis(int l_max, bool drop_translations) {
  ReducedBasis b;
  b.l_max = l_max;
  const int n = static_cast<int>(harmonic_count(l_max));
  b.phi = Eigen::MatrixXd::Identity(n, n);
  for (int l = 0; l <= l_max; ++l)
    for (int m = -l; m <= l; ++m) b.phi_degree.push_back(l);
  const int nu = drop_translations ? n - 3 : n;
  b.u = Eigen::MatrixXd::Zero(n, nu);
  int col = 0;
  for (int l = 0; l <= l_max; ++l)
    for (int m = -l; m <= l; ++m) {
      if (drop_translations && l == 1) continue;
      b.u(harmonic_offset(l, m), col++) = 1.0;
      b.u_degree.push_back(l);
    }
  b.u_rows = b.u;
  b.label = drop_translations ? "full-no-translations" : "full";
  return b;
}

ReducedProblem::ReducedProblem(Constitutive c, GridPtr grid, ReducedBasis basis)
    : model_(std::move(c)), grid_(std::move(grid)), basis_(std::move(basis)),
      evaluator_(default_residual(grid_)) {
  if (basis_.l_max > grid_->l_max()) throw DomainError("ReducedProblem: basis degree exceeds grid");
}

ModelState ReducedProblem::state(const Eigen::VectorXd& x) const {
  const auto na = basis_.phi.cols(), nc = basis_.u.cols();
  if (x.size() != static_cast<Eigen::Index>(basis_.n_unknowns()))
    throw DomainError("ReducedProblem::state: coordinate length mismatch");
  ModelState s;
  s.phi = SpectralField::from_normalized(basis_.l_max, basis_.phi * x.head(na));
  s.u = SpectralField::from_normalized(basis_.l_max, basis_.u * x.segment(na, nc));
  s.zeta = x(na + nc);
  s.xi = x(na + nc + 1);
  return s;
}

Eigen::VectorXd ReducedProblem::coordinates(const ModelState& s) const {
  const auto na = basis_.phi.cols(), nc = basis_.u.cols();
  Eigen::VectorXd x(na + nc + 2);
  x.head(na) = basis_.phi.transpose() * s.phi.resized(basis_.l_max).normalized();
  x.segment(na, nc) = basis_.u.transpose() * s.u.resized(basis_.l_max).normalized();
  x(na + nc) = s.zeta;
  x(na + nc + 1) = s.xi;
  return x;
}

Eigen::VectorXd ReducedProblem::project(const ResidualValue& r) const {
  const int band = basis_.l_max;
  Eigen::VectorXd c1(harmonic_count(band)), c2(harmonic_count(band));
  kernels::analyze(*grid_, band, r.r_phase.values, std::span<double>(c1.data(), c1.size()));
  kernels::analyze(*grid_, band, r.r_shape.values, std::span<double>(c2.data(), c2.size()));
  const auto na = basis_.phi.cols(), nr = basis_.u_rows.cols();
  Eigen::VectorXd out(na + nr + 2);
  out.head(na) = basis_.phi.transpose() * c1;
  out.segment(na, nr) = basis_.u_rows.transpose() * c2;
  out(na + nr) = r.c_area;
  out(na + nr + 1) = r.c_phase;
  return out;
}

Eigen::VectorXd ReducedProblem::residual(const Eigen::VectorXd& x, double lambda,
                                         const Constitutive& c) const {
  return project(evaluator_(c, state(x), lambda));
}

Eigen::VectorXd ReducedProblem::residual(const Eigen::VectorXd& x, double lambda) const {
  return residual(x, lambda, model_);
}

Eigen::MatrixXd ReducedProblem::jacobian(const Eigen::VectorXd& x, double lambda,
                                         const Constitutive& c) const {
  const Eigen::Index n = x.size();
  const Eigen::Index nfield = n - 2;
  const Eigen::VectorXd f0 = residual(x, lambda, c);
  Eigen::MatrixXd jac(f0.size(), n);
  const double root_eps = std::sqrt(std::numeric_limits<double>::epsilon());
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index k = 0; k < n; ++k) {
    try {
      Eigen::VectorXd xp = x;
      if (k >= nfield) {
        // multipliers enter affinely
        xp(k) += 1.0;
        jac.col(k) = residual(xp, lambda, c) - f0;
      } else {
        const double h = root_eps * std::max(1.0, std::abs(x(k)));
        Eigen::VectorXd xm = x;
        xp(k) += h;
        xm(k) -= h;
        jac.col(k) = (residual(xp, lambda, c) - residual(xm, lambda, c)) / (2.0 * h);
      }
    } catch (...) {
#pragma omp critical(jacobian_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return jac;
}

Eigen::MatrixXd ReducedProblem::jacobian(const Eigen::VectorXd& x, double lambda) const {
  return jacobian(x, lambda, model_);
}

Eigen::VectorXd ReducedProblem::lambda_derivative(const Eigen::VectorXd& x, double lambda) const {
  const double h = 1e-6 * std::max(1.0, std::abs(lambda));
  return (residual(x, lambda + h) - residual(x, lambda - h)) / (2.0 * h);
}

double condition_number(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  const double lo = sv(sv.size() - 1);
  return lo > 0.0 ? sv(0) / lo : std::numeric_limits<double>::infinity();
}

ReducedJacobian reduced_jacobian(const Constitutive& c, const GridPtr& grid, const ModelState& s,
                                 double lambda, const ReducedBasis& basis) {
  ReducedProblem prob(c, grid, basis);
  ReducedJacobian out{basis, prob.jacobian(prob.coordinates(s), lambda), 0.0};
  out.condition = condition_number(out.matrix);
  return out;
}

}  // namespace vesicle
