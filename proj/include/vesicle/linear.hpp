#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "vesicle/harmonics.hpp"
#include "vesicle/model.hpp"

namespace vesicle {

struct ModeData {
  int l = 0;
  double lambda = 0.0;
  double sigma = 0.0;
  double tau = 0.0;
  double slope = 0.0;  // d(sigma_hat)/d(lambda) at the root, = Psi'''
  bool pitchfork = false;
  bool tangential = false;
};

struct RootReport {
  std::vector<double> roots;       // sign-changing
  std::vector<double> tangential;  // touching zero without a sign change
};

/// Default search interval: spinodal hull widened by 20%.
std::pair<double, double> root_interval(const Constitutive& c);

double crossing_function(double lambda, int l, const Constitutive& c);
RootReport characteristic_roots(int l, const Constitutive& c);
RootReport characteristic_roots(int l, const Constitutive& c, std::pair<double, double> interval);

std::pair<double, double> sigma_tau(int l, double lambda, const Constitutive& c);
ModeData mode_data(int l, double lambda, const Constitutive& c);
/// One row per sign-changing and tangential root, ordered by lambda.
std::vector<ModeData> mode_table(int l, const Constitutive& c);

// The residual's own derivative differs from apply_L when the moduli vary:
// the phase row couples to nu through -(B'+E')(Lap+2)nu and the Gaussian terms flip sign.
// These give the coupled amplitude and crossing function; both reduce to tau and
// sigma_hat when B' = E' = 0.
double coupled_tau(int l, double lambda, const Constitutive& c);
double coupled_crossing(double lambda, int l, const Constitutive& c);
RootReport coupled_roots(int l, const Constitutive& c, std::pair<double, double> interval);

struct LinearState {
  SpectralField G, nu;
  double zeta = 0.0, xi = 0.0;

  LinearState() = default;
  explicit LinearState(int l_max) : G(l_max), nu(l_max) {}
};

struct LinearImage {
  SpectralField phase, shape;
  double area = 0.0, mass = 0.0;
};

/// Reference linearized operator at the trivial state (constant-moduli form of the phase row).
LinearImage apply_L(double lambda, const LinearState& z, const Constitutive& c);
/// Exact derivative of full_residual at the trivial state (rows in residual units).
LinearImage apply_residual_derivative(double lambda, const LinearState& z, const Constitutive& c);

/// Dense matrix of apply_L on orthonormal coefficients, layout (G, nu, zeta, xi) for
/// columns and (phase, shape, area, mass) for rows.
Eigen::MatrixXd assemble_L(double lambda, int l_max, const Constitutive& c);

struct NullSpaceReport {
  int dimension = 0;
  Eigen::VectorXd singular_values;  // ascending, after row equilibration
  Eigen::MatrixXd basis;            // right singular vectors of the near-zero values
  double threshold = 0.0;
  double gap = 0.0;                 // first retained value / last dropped value
  bool clustered = false;           // lambda close to roots of two distinct degrees
};

NullSpaceReport null_space(double lambda, int l_max, const Constitutive& c, double rel_tol = 1e-7);

}  // namespace vesicle
