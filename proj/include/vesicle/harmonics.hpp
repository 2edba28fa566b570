#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace vesicle {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct HarmonicIndex {
  int l = 0;
  int m = 0;
  bool valid() const { return l >= 0 && std::abs(m) <= l; }
};

/// Position of (l, m) in a flat coefficient vector.
constexpr std::size_t harmonic_offset(int l, int m) {
  return static_cast<std::size_t>(l * l + l + m);
}
constexpr std::size_t harmonic_count(int band) {
  return static_cast<std::size_t>((band + 1) * (band + 1));
}

/// P_{l,m}(x) = (1-x^2)^{m/2} d^m/dx^m P_l(x), no Condon-Shortley phase.
double assoc_legendre(int l, int m, double x);

/// rho_{l,m}(theta, psi) in the unnormalized real basis.
double real_harmonic(HarmonicIndex idx, double theta, double psi);
double real_harmonic(HarmonicIndex idx, const Eigen::Vector3d& x);

/// Squared L2(S^2) norm of rho_{l,m}.
double harmonic_norm_sq(int l, int m);

/// Orthonormal associated Legendre values pbar_{l,m}(x) for 0 <= m <= l <= band,
/// laid out at l*(l+1)/2 + m. Y_{l,m} = pbar cos(m psi), Y_{l,-m} = pbar sin(m psi).
void normalized_legendre(int band, double x, std::span<double> out);
constexpr std::size_t triangle_offset(int l, int m) {
  return static_cast<std::size_t>(l * (l + 1) / 2 + m);
}
constexpr std::size_t triangle_count(int band) {
  return static_cast<std::size_t>((band + 1) * (band + 2) / 2);
}

/// Gauss-Legendre in cos(theta) times equispaced azimuth. Node (i, j) is stored at
/// i * n_psi + j. Legendre tables cover the working band 2*l_max - 1, which is
/// the highest degree the grid analyzes exactly.
class QuadratureGrid {
 public:
  explicit QuadratureGrid(int l_max);

  int l_max() const { return l_max_; }
  int max_band() const { return band_; }
  int n_theta() const { return n_theta_; }
  int n_psi() const { return n_psi_; }
  std::size_t size() const { return static_cast<std::size_t>(n_theta_) * n_psi_; }

  double theta(int i) const { return theta_[i]; }
  double cos_theta(int i) const { return cos_theta_[i]; }
  double sin_theta(int i) const { return sin_theta_[i]; }
  double psi(int j) const { return 2.0 * M_PI * j / n_psi_; }
  double ring_weight(int i) const { return gl_weight_[i]; }
  double weight(std::size_t node) const { return weights_[node]; }
  std::span<const double> weights() const { return weights_; }
  const Eigen::Vector3d& point(std::size_t node) const { return points_[node]; }

  // Tables for ring i, triangle index (l, m).
  double pbar(int i, int l, int m) const { return pbar_[i * tri_ + triangle_offset(l, m)]; }
  double dpbar(int i, int l, int m) const { return dpbar_[i * tri_ + triangle_offset(l, m)]; }
  double mpbar_sin(int i, int l, int m) const { return mpbar_[i * tri_ + triangle_offset(l, m)]; }
  const double* pbar_ring(int i) const { return pbar_.data() + i * tri_; }
  const double* dpbar_ring(int i) const { return dpbar_.data() + i * tri_; }
  const double* mpbar_ring(int i) const { return mpbar_.data() + i * tri_; }
  double cos_mpsi(int j, int m) const { return cos_[j * (band_ + 1) + m]; }
  double sin_mpsi(int j, int m) const { return sin_[j * (band_ + 1) + m]; }

  double integrate(std::span<const double> values) const;

 private:
  int l_max_;
  int band_;
  int n_theta_;
  int n_psi_;
  std::size_t tri_;
  std::vector<double> theta_, cos_theta_, sin_theta_, gl_weight_, weights_;
  std::vector<Eigen::Vector3d> points_;
  std::vector<double> pbar_, dpbar_, mpbar_;
  std::vector<double> cos_, sin_;
};

using GridPtr = std::shared_ptr<const QuadratureGrid>;

GridPtr build_grid(int l_max);

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Coefficients in the unnormalized rho basis.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(int l_max) : l_max_(l_max), c_(harmonic_count(l_max), 0.0) {}

  int l_max() const { return l_max_; }
  std::size_t size() const { return c_.size(); }
  double& operator()(int l, int m) { return c_[harmonic_offset(l, m)]; }
  double operator()(int l, int m) const { return c_[harmonic_offset(l, m)]; }
  double& operator[](std::size_t k) { return c_[k]; }
  double operator[](std::size_t k) const { return c_[k]; }
  std::span<const double> coeffs() const { return c_; }
  std::span<double> coeffs() { return c_; }

  /// Coefficients in the orthonormal basis (c * ||rho||).
  Eigen::VectorXd normalized() const;
  static SpectralField from_normalized(int l_max, const Eigen::VectorXd& cn);
  /// Same field at another truncation (zero padding or cut).
  SpectralField resized(int l_max) const;

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s);
  double max_abs() const;

 private:
  int l_max_ = 0;
  std::vector<double> c_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

struct GridField {
  GridPtr grid;
  std::vector<double> values;

  GridField() = default;
  explicit GridField(GridPtr g) : grid(std::move(g)), values(grid->size(), 0.0) {}
  GridField(GridPtr g, std::vector<double> v);
  double integral() const { return grid->integrate(values); }
  double max_abs() const;
};

/// Projection of grid values onto degrees <= l_max (defaults to the grid's l_max).
SpectralField analyze(const GridField& f);
SpectralField analyze(const GridField& f, int l_max);
GridField synthesize(const SpectralField& c, const GridPtr& grid);

SpectralField laplace_beltrami_s2(const SpectralField& c);

/// Point evaluation at a unit vector.
double evaluate(const SpectralField& c, const Eigen::Vector3d& x);
/// All orthonormal harmonics up to band at the direction of x (layout harmonic_offset).
void normalized_harmonics(int band, const Eigen::Vector3d& x, std::span<double> out);

/// Normalized norm vector: norms[k] = ||rho_k|| for k < harmonic_count(band).
const std::vector<double>& harmonic_norms(int band);

}  // namespace vesicle
