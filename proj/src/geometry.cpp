#include "vesicle/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "vesicle/kernels.hpp"

namespace vesicle {

namespace {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

Mat3 tangent_projector(const Vec3& x) { return Mat3::Identity() - x * x.transpose(); }

std::vector<double> analyze_band(const QuadratureGrid& grid, std::span<const double> values) {
  std::vector<double> c(harmonic_count(grid.max_band()));
  kernels::analyze(grid, grid.max_band(), values, c);
  return c;
}

std::vector<Vec3> gradient_of_values(const QuadratureGrid& grid, std::span<const double> values) {
  const auto c = analyze_band(grid, values);
  std::vector<Vec3> out(grid.size());
  kernels::synthesize_gradient(grid, grid.max_band(), c, out);
  return out;
}

void check_grid(const GridPtr& a, const GridPtr& b) {
  if (a.get() != b.get() && (a->l_max() != b->l_max()))
    throw DomainError("geometry: field and bundle live on different grids");
}

}  // namespace

LocalFrame local_frame(const QuadratureGrid& grid, std::size_t node) {
  const int i = static_cast<int>(node / grid.n_psi());
  const int j = static_cast<int>(node % grid.n_psi());
  const double ct = grid.cos_theta(i), st = grid.sin_theta(i);
  const double cp = std::cos(grid.psi(j)), sp = std::sin(grid.psi(j));
  return {Vec3(ct * cp, ct * sp, -st), Vec3(-sp, cp, 0.0), grid.point(node)};
}

Eigen::Matrix2d frame_components(const Mat3& m, const LocalFrame& f) {
  Eigen::Matrix2d out;
  out << f.e1.dot(m * f.e1), f.e1.dot(m * f.e2), f.e2.dot(m * f.e1), f.e2.dot(m * f.e2);
  return out;
}

TangentField3 surface_gradient(const GridField& f) {
  TangentField3 t(f.grid);
  t.values = gradient_of_values(*f.grid, f.values);
  return t;
}

TangentField3 surface_gradient(const SpectralField& f, const GridPtr& grid) {
  if (f.l_max() > grid->max_band()) throw DomainError("surface_gradient: degree beyond grid band");
  TangentField3 t(grid);
  const Eigen::VectorXd cn = f.normalized();
  kernels::synthesize_gradient(*grid, f.l_max(), std::span<const double>(cn.data(), cn.size()),
                               t.values);
  return t;
}

std::vector<Mat3> surface_jacobian(const TangentField3& v) {
  const auto& grid = *v.grid;
  std::vector<Mat3> M(grid.size(), Mat3::Zero());
  std::vector<double> comp(grid.size());
  for (int i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < grid.size(); ++k) comp[k] = v.values[k][i];
    const auto g = gradient_of_values(grid, comp);
    for (std::size_t k = 0; k < grid.size(); ++k) M[k].row(i) = g[k].transpose();
  }
  return M;
}

GridField surface_divergence(const TangentField3& t) {
  const auto M = surface_jacobian(t);
  GridField d(t.grid);
  for (std::size_t k = 0; k < d.values.size(); ++k) d.values[k] = M[k].trace();
  return d;
}

std::vector<Mat3> hessian_s2(const TangentField3& grad) {
  auto M = surface_jacobian(grad);
  for (std::size_t k = 0; k < M.size(); ++k) M[k] = tangent_projector(grad.grid->point(k)) * M[k];
  return M;
}

GeometryBundle geometry_from_u(const SpectralField& u, const GridPtr& grid) {
  GeometryBundle g;
  g.grid = grid;
  g.u = u;
  const std::size_t n = grid->size();
  g.uval = synthesize(u, grid).values;
  const auto grad = surface_gradient(u, grid);
  g.gradu = grad.values;
  g.hess_u = hessian_s2(grad);
  g.expu.resize(n);
  g.J.resize(n);
  g.H.resize(n);
  g.K.resize(n);
  g.w.resize(n);
  g.n.resize(n);
  g.A.resize(n);
  g.Cinv.resize(n);
  g.Lcomp.resize(n);
  bool bad = false;
#pragma omp parallel for schedule(static) reduction(|| : bad)
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3& x = grid->point(k);
    const Vec3& du = g.gradu[k];
    const Mat3 P = tangent_projector(x);
    const Mat3& D = g.hess_u[k];
    const double s2 = du.squaredNorm();
    const double w = 1.0 + s2;
    const double eu = std::exp(g.uval[k]);
    const Mat3 A = w * P - du * du.transpose();
    const double trAD = (A.cwiseProduct(D.transpose())).sum();
    const double trD = D.trace();
    const double det2 = 0.5 * (trD * trD - (D * D).trace());
    g.expu[k] = eu;
    g.w[k] = w;
    g.A[k] = A;
    g.J[k] = eu * eu * std::sqrt(w);
    g.H[k] = 0.5 * (trAD - 2.0 * w) / (eu * w * std::sqrt(w));
    g.K[k] = (det2 - trAD + s2 + 1.0) / (eu * eu * w * w);
    g.n[k] = (x - du) / std::sqrt(w);
    g.Cinv[k] = A / (eu * eu * w);
    g.Lcomp[k] = (eu / std::sqrt(w)) * (D - du * du.transpose() - P);
    if (!(g.J[k] > 0.0) || !std::isfinite(g.J[k]) || !std::isfinite(g.H[k])) bad = true;
  }
  if (bad) throw DegenerateSurface("geometry_from_u: degenerate surface (J <= 0 or overflow)");
  g.min_J = *std::min_element(g.J.begin(), g.J.end());
  return g;
}

GridField laplace_beltrami_sigma(const TangentField3& grad_f, const GeometryBundle& g) {
  check_grid(grad_f.grid, g.grid);
  TangentField3 t(g.grid);
  for (std::size_t k = 0; k < t.values.size(); ++k)
    t.values[k] = g.A[k] * grad_f.values[k] / std::sqrt(g.w[k]);
  GridField d = surface_divergence(t);
  for (std::size_t k = 0; k < d.values.size(); ++k) d.values[k] /= g.J[k];
  return d;
}

GridField laplace_beltrami_sigma(const GridField& f, const GeometryBundle& g) {
  return laplace_beltrami_sigma(surface_gradient(f), g);
}

GridField grad_sigma_norm2(const TangentField3& grad_f, const GeometryBundle& g) {
  check_grid(grad_f.grid, g.grid);
  GridField out(g.grid);
  for (std::size_t k = 0; k < out.values.size(); ++k)
    out.values[k] = grad_f.values[k].dot(g.Cinv[k] * grad_f.values[k]);
  return out;
}

GridField grad_sigma_norm2(const GridField& f, const GeometryBundle& g) {
  return grad_sigma_norm2(surface_gradient(f), g);
}

GridField second_form_on_gradient(const TangentField3& grad_f, const GeometryBundle& g) {
  check_grid(grad_f.grid, g.grid);
  GridField q1(g.grid);
  for (std::size_t k = 0; k < q1.values.size(); ++k) {
    const Vec3 v = g.Cinv[k] * grad_f.values[k];
    q1.values[k] = v.dot(g.Lcomp[k] * v);
  }
  return q1;
}

std::pair<GridField, GridField> curvature_contract(const TangentField3& grad_f,
                                                   const GeometryBundle& g) {
  check_grid(grad_f.grid, g.grid);
  const std::size_t n = g.grid->size();
  GridField q1 = second_form_on_gradient(grad_f, g), q2(g.grid);
  std::vector<Mat3> finv_t(n);
  TangentField3 grad_sigma(g.grid);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3& x = g.grid->point(k);
    finv_t[k] = (g.A[k] + x * g.gradu[k].transpose()) / (g.expu[k] * g.w[k]);
    grad_sigma.values[k] = finv_t[k] * grad_f.values[k];
  }
  const auto M = surface_jacobian(grad_sigma);
  for (std::size_t k = 0; k < n; ++k) {
    const Mat3 finv = finv_t[k].transpose();
    const Mat3 L = finv_t[k] * g.Lcomp[k] * finv;
    const Mat3 Py = Mat3::Identity() - g.n[k] * g.n[k].transpose();
    const Mat3 D2 = Py * M[k] * finv;
    q2.values[k] = L.cwiseProduct(D2).sum();
  }
  return {std::move(q1), std::move(q2)};
}

std::pair<GridField, GridField> curvature_contract(const GridField& f, const GeometryBundle& g) {
  return curvature_contract(surface_gradient(f), g);
}

double enclosed_volume(const GeometryBundle& g) {
  std::vector<double> e3(g.expu.size());
  for (std::size_t k = 0; k < e3.size(); ++k) e3[k] = g.expu[k] * g.expu[k] * g.expu[k];
  return g.grid->integrate(e3) / 3.0;
}

double surface_area(const GeometryBundle& g) { return g.grid->integrate(g.J); }

}  // namespace vesicle
