#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "vesicle/linear.hpp"
#include "vesicle/residual.hpp"
#include "vesicle/symmetry.hpp"

namespace vesicle {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NewtonOptions {
  double tol = 1e-10;  // on the max-norm of the residual
  int max_iter = 25;
  int max_halvings = 10;
};

struct NewtonResult {
  Eigen::VectorXd y;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;  // residual max-norm before each step
};

using VectorFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using MatrixFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

/// Damped Newton (Gauss-Newton when there are more rows than unknowns).
/// Steps come from a column-pivoted QR least-squares solve; the step is halved while
/// the residual 2-norm does not decrease. A DegenerateSurface thrown by F counts as
/// an increase.
NewtonResult newton(const VectorFn& F, const MatrixFn& J, Eigen::VectorXd y0, const NewtonOptions& opt);

enum class Parameter { lambda, pressure, inverse_epsilon };
Parameter parameter_from_string(const std::string& s);
std::string to_string(Parameter p);

struct ContinuationConfig {
  int l = 3;
  std::string subgroup = "D6d";
  int l_max = 16;
  double t0 = 1e-2;
  double ds = 0.02;
  double ds_min = 1e-4;
  double ds_max = 0.1;
  double tol = 1e-9;
  int max_newton = 15;
  int max_points = 12;
  int max_folds = 2;
  Parameter parameter = Parameter::lambda;

  void validate() const;
};

ContinuationConfig continuation_config_from_json(const nlohmann::json& j);
nlohmann::json continuation_config_to_json(const ContinuationConfig& c);

struct BranchPoint {
  double s = 0.0;          // accumulated chord length
  double lambda = 0.0;
  double parameter = 0.0;  // value of the released scalar (lambda, p or 1/eps)
  Eigen::VectorXd x;       // reduced coordinates (phi, u, zeta, xi)
  double residual = 0.0;
  double amplitude = 0.0;  // Euclidean norm of the (phi, u) coordinates
  double energy = 0.0;
  double min_J = 0.0;
  int iterations = 0;
};

struct Branch {
  ModeData mode;
  std::string subgroup;
  double t0 = 0.0;
  Parameter parameter = Parameter::lambda;
  std::vector<BranchPoint> points;
  int folds = 0;
  std::string termination;
};

/// Reduced problem for one (l, subgroup) pair plus the solvers that act on it.
class BranchSolver {
 public:
  BranchSolver(Constitutive c, ContinuationConfig cfg, GridPtr grid = nullptr);

  const ReducedProblem& problem() const { return problem_; }
  ReducedProblem& problem() { return problem_; }
  const Subgroup& subgroup() const { return group_; }
  const ContinuationConfig& config() const { return cfg_; }

  /// Newton on the reduced system at fixed lambda.
  NewtonResult newton_solve(double lambda, const Eigen::VectorXd& x0) const;

  /// Crossing roots in the interval whose reduced Jacobian has a one-dimensional kernel.
  std::vector<ModeData> detect_bifurcations(std::pair<double, double> interval) const;
  /// Kernel dimension of the (row-scaled) reduced Jacobian at the trivial state.
  int trivial_kernel_dimension(double lambda, double rel_tol = 1e-6) const;

  /// Direction in reduced coordinates (unit norm); uses the residual's own tau.
  Eigen::VectorXd direction(const ModeData& mode) const;

  /// First point off the trivial branch with <x, z> = t0 and lambda free.
  BranchPoint branch_switch(const ModeData& mode, double t0) const;
  /// Pseudo-arclength continuation from start.
  Branch continue_branch(const BranchPoint& start, const ModeData& mode, double t0) const;
  /// One predictor-corrector step; empty when the corrector fails.
  std::optional<BranchPoint> step(const BranchPoint& from, const Eigen::VectorXd& tangent,
                                  double ds) const;

  /// Unit kernel vector of the Jacobian in (x, parameter) at p, sign arbitrary.
  Eigen::VectorXd kernel_tangent(const BranchPoint& p) const;
  /// (x, parameter) stacked.
  Eigen::VectorXd pack(const BranchPoint& p) const;

  /// Reassembled state of a branch point.
  ModelState state(const BranchPoint& p) const { return problem_.state(p.x); }
  Constitutive constitutive_at(double parameter) const;

 private:
  BranchPoint make_point(const Eigen::VectorXd& y, double lambda, const NewtonResult& r) const;
  Eigen::VectorXd residual_y(const Eigen::VectorXd& y, double lambda) const;
  Eigen::MatrixXd jacobian_y(const Eigen::VectorXd& y, double lambda) const;
  Eigen::VectorXd row_scales(double lambda) const;

  Constitutive model_;
  ContinuationConfig cfg_;
  Subgroup group_;
  ReducedProblem problem_;
};

struct FrozenProbeReport {
  int trials = 0;
  int converged_trivial = 0;
  int converged_nontrivial = 0;
  int not_converged = 0;
  double max_nontrivial_amplitude = 0.0;
  double min_stalled_residual = 0.0;  // smallest final residual among the runs that stalled
};

/// Gauss-Newton on both field equations and the constraints with u frozen at 0.
FrozenProbeReport frozen_u_probe(const Constitutive& c, double lambda, int trials, unsigned seed,
                                 int l_max = 6);

struct StationarityReport {
  double max_ratio = 0.0;  // |dL| / scale over the directions
  std::vector<double> derivatives;
  std::vector<double> scales;
};

/// Central differences of the constrained Lagrangian along random band-limited
/// directions in (phi, u). The scale of each direction is the largest of the energy,
/// area and phase-mass derivative contributions.
StationarityReport lagrangian_stationarity(const Constitutive& c, const ModelState& s, double lambda,
                                           const GridPtr& grid, int directions, unsigned seed,
                                           int direction_band = 6);

}  // namespace vesicle
