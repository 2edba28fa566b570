#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "vesicle/harmonics.hpp"

namespace vesicle {

class DegenerateSurface : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tangent fields carried by their three ambient components.
struct TangentField3 {
  GridPtr grid;
  std::vector<Eigen::Vector3d> values;

  TangentField3() = default;
  explicit TangentField3(GridPtr g)
      : grid(std::move(g)), values(grid->size(), Eigen::Vector3d::Zero()) {}
};

struct LocalFrame {
  Eigen::Vector3d e1, e2, x;
};
LocalFrame local_frame(const QuadratureGrid& grid, std::size_t node);

/// Per-node data of the radial graph e^u x. Matrices are ambient 3x3 tensors that
/// vanish on x (tangent to S^2); frame_components gives the 2x2 frame view.
struct GeometryBundle {
  GridPtr grid;
  SpectralField u;
  std::vector<double> uval, expu, J, H, K, w;
  std::vector<Eigen::Vector3d> n, gradu;
  std::vector<Eigen::Matrix3d> A;      // (1+|Du|^2) P - Du (x) Du
  std::vector<Eigen::Matrix3d> Cinv;   // inverse pulled-back metric
  std::vector<Eigen::Matrix3d> Lcomp;  // pulled-back second form
  std::vector<Eigen::Matrix3d> hess_u; // covariant Hessian of u on S^2
  double min_J = 0.0;
};

Eigen::Matrix2d frame_components(const Eigen::Matrix3d& m, const LocalFrame& f);

/// Throws DegenerateSurface if J <= 0 or the slope overflows.
GeometryBundle geometry_from_u(const SpectralField& u, const GridPtr& grid);

// Spectral operators on S^2. Grid inputs are projected onto the grid's working band.
TangentField3 surface_gradient(const GridField& f);
TangentField3 surface_gradient(const SpectralField& f, const GridPtr& grid);
GridField surface_divergence(const TangentField3& t);
/// M_ij = (grad v_i)_j for each node.
std::vector<Eigen::Matrix3d> surface_jacobian(const TangentField3& v);
/// Covariant Hessian P M of a scalar on S^2 from its gradient.
std::vector<Eigen::Matrix3d> hessian_s2(const TangentField3& grad);

// Intrinsic operators on the deformed surface.
GridField laplace_beltrami_sigma(const GridField& f, const GeometryBundle& g);
GridField laplace_beltrami_sigma(const TangentField3& grad_f, const GeometryBundle& g);
GridField grad_sigma_norm2(const GridField& f, const GeometryBundle& g);
GridField grad_sigma_norm2(const TangentField3& grad_f, const GeometryBundle& g);
/// Second form evaluated on the surface gradient of f.
GridField second_form_on_gradient(const TangentField3& grad_f, const GeometryBundle& g);
/// (second form on the surface gradient, second form contracted with the surface Hessian)
std::pair<GridField, GridField> curvature_contract(const GridField& f, const GeometryBundle& g);
std::pair<GridField, GridField> curvature_contract(const TangentField3& grad_f,
                                                   const GeometryBundle& g);

double enclosed_volume(const GeometryBundle& g);
double surface_area(const GeometryBundle& g);

}  // namespace vesicle
