#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vesicle/geometry.hpp"
#include "vesicle/model.hpp"

namespace vesicle {

struct ResidualValue {
  GridField r_phase;
  GridField r_shape;
  double c_area = 0.0;
  double c_phase = 0.0;

  double max_abs() const;
};

/// Named terms of the shape residual; total() is their sum.
struct ShapeTerms {
  GridField bending;            // Lap_S (B H)
  GridField gauss_laplacian;    // 2 H Lap_S E
  GridField gauss_contraction;  // -L . D^2_S E
  GridField interface;          // eps (L[grad phi, grad phi] - H |grad phi|^2)
  GridField curvature;          // 2 B H (H^2 - K)
  GridField tension;            // -2 H (W - gamma - mu phi_total)
  GridField pressure;           // -p

  GridField total() const;
};

GridField phase_residual(const Constitutive& c, const ModelState& s, double lambda, const GridPtr& grid);
GridField shape_residual(const Constitutive& c, const ModelState& s, double lambda, const GridPtr& grid);
ShapeTerms shape_terms(const Constitutive& c, const ModelState& s, double lambda, const GridPtr& grid);
ResidualValue full_residual(const Constitutive& c, const ModelState& s, double lambda,
                            const GridPtr& grid);

/// Pluggable evaluator (the self-check swaps in corrupted versions).
using ResidualFn =
    std::function<ResidualValue(const Constitutive&, const ModelState&, double)>;
ResidualFn default_residual(const GridPtr& grid);

/// Symmetry-adapted basis in orthonormal coefficient space. Columns of phi and u
/// span the unknowns; rows are projected on phi and u_rows (u_rows differs from u
/// only when a coefficient is pinned).
struct ReducedBasis {
  int l_max = 0;
  Eigen::MatrixXd phi;
  Eigen::MatrixXd u;
  Eigen::MatrixXd u_rows;
  std::vector<int> phi_degree;
  std::vector<int> u_degree;
  std::string label;

  std::size_t n_unknowns() const { return phi.cols() + u.cols() + 2; }
  std::size_t n_rows() const { return phi.cols() + u_rows.cols() + 2; }
};

/// Full orthonormal basis up to l_max; with drop_translations the degree-1 u modes
/// are left out of the unknowns.
ReducedBasis full_basis(int l_max, bool drop_translations = false);

struct ReducedJacobian {
  ReducedBasis basis;
  Eigen::MatrixXd matrix;
  double condition = 0.0;
};

/// Galerkin-projected residual in the reduced coordinates x = (a, c, zeta, xi).
class ReducedProblem {
 public:
  ReducedProblem(Constitutive c, GridPtr grid, ReducedBasis basis);

  const ReducedBasis& basis() const { return basis_; }
  const Constitutive& constitutive() const { return model_; }
  const GridPtr& grid() const { return grid_; }
  void set_evaluator(ResidualFn fn) { evaluator_ = std::move(fn); }

  ModelState state(const Eigen::VectorXd& x) const;
  Eigen::VectorXd coordinates(const ModelState& s) const;
  Eigen::VectorXd project(const ResidualValue& r) const;
  Eigen::VectorXd residual(const Eigen::VectorXd& x, double lambda) const;
  Eigen::VectorXd residual(const Eigen::VectorXd& x, double lambda, const Constitutive& c) const;
  /// Central differences in the field coordinates, exact unit differences in zeta, xi.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x, double lambda) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x, double lambda, const Constitutive& c) const;
  /// Central difference in lambda.
  Eigen::VectorXd lambda_derivative(const Eigen::VectorXd& x, double lambda) const;

 private:
  Constitutive model_;
  GridPtr grid_;
  ReducedBasis basis_;
  ResidualFn evaluator_;
};

ReducedJacobian reduced_jacobian(const Constitutive& c, const GridPtr& grid, const ModelState& s,
                                 double lambda, const ReducedBasis& basis);

double condition_number(const Eigen::MatrixXd& m);

}  // namespace vesicle
