#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vesicle/geometry.hpp"
#include "vesicle/harmonics.hpp"

namespace vesicle {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Value and first three derivatives of a scalar function.
struct Derivs {
  double v = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0;
};

/// b0 + b1 * (1 + tanh(phi / width)) / 2.
struct SigmoidModulus {
  double base = 0.0;
  double jump = 0.0;
  double width = 0.2;

  Derivs operator()(double phi) const;
  bool constant() const { return jump == 0.0; }
};

/// Tabulated well (phi, W, W', W'') with monotone cubic interpolation; W''' is a
/// central difference of the interpolated W''.
class TabulatedWell {
 public:
  TabulatedWell(std::vector<double> phi, std::vector<double> w, std::vector<double> dw,
                std::vector<double> d2w);
  Derivs operator()(double phi) const;
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  double lo_, hi_;
};

class Constitutive {
 public:
  double epsilon = 0.01;
  double pressure = 0.0;
  double well_scale = 1.0;  // W = well_scale/4 (phi^2-1)^2 when no table
  SigmoidModulus B{1.0, 0.0, 0.2};
  SigmoidModulus E{0.0, 0.0, 0.2};
  std::shared_ptr<const TabulatedWell> table;

  Derivs W(double phi) const;
  Derivs bending(double phi) const { return B(phi); }
  Derivs gaussian(double phi) const { return E(phi); }
  /// Psi = W + B + E.
  Derivs psi(double lambda) const;
  bool moduli_constant() const { return B.constant() && E.constant(); }
  /// Zeros of W'' bounding the spinodal, found by sign scanning on [-3, 3].
  std::vector<double> spinodal_roots() const;
  std::pair<double, double> spinodal() const;
  /// Throws ConfigError when an admissibility condition fails.
  void validate() const;
};

struct TrivialBranch {
  double lambda = 0.0;
  double mu = 0.0;
  double gamma = 0.0;
};

TrivialBranch trivial_multipliers(const Constitutive& c, double lambda);

/// v = (phi, u, zeta, xi); phi is the deviation from lambda.
struct ModelState {
  SpectralField phi;
  SpectralField u;
  double zeta = 0.0;
  double xi = 0.0;

  ModelState() = default;
  explicit ModelState(int l_max) : phi(l_max), u(l_max) {}
  int l_max() const { return phi.l_max(); }
};

/// Multipliers mu = Psi'(lambda) + xi, gamma = trivial gamma + zeta.
std::pair<double, double> multipliers(const Constitutive& c, const ModelState& s, double lambda);

double energy(const Constitutive& c, const ModelState& s, double lambda, const GridPtr& grid);
double energy(const Constitutive& c, const ModelState& s, double lambda, const GeometryBundle& g);
/// Energy minus the multiplier terms of both constraints.
double lagrangian(const Constitutive& c, const ModelState& s, double lambda, const GridPtr& grid);

struct ConstraintValues {
  double area = 0.0;
  double phase = 0.0;
};
ConstraintValues constraints(const ModelState& s, const GridPtr& grid);
ConstraintValues constraints(const ModelState& s, const GeometryBundle& g);

Constitutive constitutive_from_json(const nlohmann::json& j);
nlohmann::json constitutive_to_json(const Constitutive& c);

}  // namespace vesicle
