#include "vesicle/linear.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <Eigen/SVD>

namespace vesicle {

namespace {

constexpr int kScanSamples = 4000;

double lap_eig(int l) { return static_cast<double>(l) * (l + 1); }

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

RootReport scan_roots(const std::function<double(double)>& f, double lo, double hi) {
  RootReport out;
  std::vector<double> x(kScanSamples + 1), y(kScanSamples + 1);
  for (int k = 0; k <= kScanSamples; ++k) {
    x[k] = lo + (hi - lo) * k / kScanSamples;
    y[k] = f(x[k]);
  }
  double scale = 0.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  const double touch_tol = 1e-12 * std::max(1.0, scale);

  for (int k = 0; k < kScanSamples; ++k) {
    if (sign_of(y[k]) * sign_of(y[k + 1]) < 0) {
      boost::uintmax_t iters = 200;
      const auto r = boost::math::tools::toms748_solve(
          f, x[k], x[k + 1], y[k], y[k + 1], boost::math::tools::eps_tolerance<double>(52), iters);
      out.roots.push_back(0.5 * (r.first + r.second));
    }
  }
  for (int k = 1; k < kScanSamples; ++k) {
    if (y[k] == 0.0) {
      const int a = sign_of(y[k - 1]), b = sign_of(y[k + 1]);
      if (a * b < 0) out.roots.push_back(x[k]);
      else if (a == b && a != 0) out.tangential.push_back(x[k]);
      continue;
    }
    const bool local_min = std::abs(y[k]) <= std::abs(y[k - 1]) && std::abs(y[k]) < std::abs(y[k + 1]);
    if (!local_min || sign_of(y[k - 1]) != sign_of(y[k]) || sign_of(y[k + 1]) != sign_of(y[k]))
      continue;
    const auto m = boost::math::tools::brent_find_minima(
        [&](double t) { return std::abs(f(t)); }, x[k - 1], x[k + 1], 52);
    if (m.second <= touch_tol) out.tangential.push_back(m.first);
  }
  std::sort(out.roots.begin(), out.roots.end());
  return out;
}

}  // namespace

std::pair<double, double> root_interval(const Constitutive& c) {
  const auto [m1, m2] = c.spinodal();
  const double pad = 0.1 * (m2 - m1);
  return {m1 - pad, m2 + pad};
}

double crossing_function(double lambda, int l, const Constitutive& c) {
  return c.epsilon * lap_eig(l) + c.psi(lambda).d2;
}

RootReport characteristic_roots(int l, const Constitutive& c, std::pair<double, double> interval) {
  if (l < 1) throw DomainError("characteristic_roots: degree must be >= 1");
  return scan_roots([&](double x) { return crossing_function(x, l, c); }, interval.first,
                    interval.second);
}

RootReport characteristic_roots(int l, const Constitutive& c) {
  return characteristic_roots(l, c, root_interval(c));
}

std::pair<double, double> sigma_tau(int l, double lambda, const Constitutive& c) {
  const double L = lap_eig(l);
  const Derivs b = c.B(lambda), e = c.E(lambda);
  const double sigma = -(e.d1 * (2.0 + L) + b.d1 * (2.0 - L)) / (L * b.v + c.pressure);
  if (l == 1) return {sigma, 0.0};
  return {sigma, 2.0 * sigma / (2.0 - L)};
}

ModeData mode_data(int l, double lambda, const Constitutive& c) {
  ModeData m;
  m.l = l;
  m.lambda = lambda;
  std::tie(m.sigma, m.tau) = sigma_tau(l, lambda, c);
  m.slope = c.psi(lambda).d3;
  m.pitchfork = (l % 2) == 1;
  return m;
}

std::vector<ModeData> mode_table(int l, const Constitutive& c) {
  const RootReport r = characteristic_roots(l, c);
  std::vector<ModeData> out;
  for (double x : r.roots) out.push_back(mode_data(l, x, c));
  for (double x : r.tangential) {
    out.push_back(mode_data(l, x, c));
    out.back().tangential = true;
  }
  std::sort(out.begin(), out.end(), [](const ModeData& a, const ModeData& b) { return a.lambda < b.lambda; });
  return out;
}

double coupled_tau(int l, double lambda, const Constitutive& c) {
  if (l < 2) return 0.0;
  const double L = lap_eig(l);
  return -2.0 * (c.B(lambda).d1 + c.E(lambda).d1) / (L * c.B(lambda).v + c.pressure);
}

double coupled_crossing(double lambda, int l, const Constitutive& c) {
  const double k = c.B(lambda).d1 + c.E(lambda).d1;
  return crossing_function(lambda, l, c) - k * (2.0 - lap_eig(l)) * coupled_tau(l, lambda, c);
}

RootReport coupled_roots(int l, const Constitutive& c, std::pair<double, double> interval) {
  if (l < 1) throw DomainError("coupled_roots: degree must be >= 1");
  return scan_roots([&](double x) { return coupled_crossing(x, l, c); }, interval.first,
                    interval.second);
}

namespace {

// Per-degree action on unnormalized coefficients; the multiplier terms only touch (0,0).
template <class Fn>
LinearImage apply_diagonal(const LinearState& z, Fn&& block) {
  const int L = z.G.l_max();
  if (z.nu.l_max() != L) throw DomainError("linear operator: G and nu degrees differ");
  LinearImage out{SpectralField(L), SpectralField(L), 0.0, 0.0};
  for (int l = 0; l <= L; ++l)
    for (int m = -l; m <= l; ++m) {
      const auto [p, s] = block(l, z.G(l, m), z.nu(l, m));
      out.phase(l, m) = p;
      out.shape(l, m) = s;
    }
  return out;
}

}  // namespace

LinearImage apply_L(double lambda, const LinearState& z, const Constitutive& c) {
  const Derivs psi = c.psi(lambda), b = c.B(lambda), e = c.E(lambda);
  const double p = c.pressure, eps = c.epsilon;
  LinearImage out = apply_diagonal(z, [&](int l, double G, double nu) {
    const double lap = -lap_eig(l);
    const double phase = -eps * lap * G + psi.d2 * G;
    const double shape = 2.0 * (e.d1 - b.d1) * lap * G + b.v * lap * lap * nu +
                         (2.0 * b.v - p) * lap * nu - 2.0 * p * nu - 4.0 * (b.d1 + e.d1) * G;
    return std::pair{phase, shape};
  });
  out.phase(0, 0) -= z.xi;
  out.shape(0, 0) -= 4.0 * (z.zeta + lambda * z.xi);
  out.area = 4.0 * M_PI * z.nu(0, 0);
  out.mass = 4.0 * M_PI * z.G(0, 0);
  return out;
}

LinearImage apply_residual_derivative(double lambda, const LinearState& z, const Constitutive& c) {
  const Derivs psi = c.psi(lambda), b = c.B(lambda), e = c.E(lambda);
  const double p = c.pressure, eps = c.epsilon, k = b.d1 + e.d1;
  LinearImage out = apply_diagonal(z, [&](int l, double G, double nu) {
    const double lap = -lap_eig(l);
    const double phase = -eps * lap * G + psi.d2 * G - k * (lap + 2.0) * nu;
    const double shape = -k * (lap + 2.0) * G + 0.5 * b.v * lap * lap * nu +
                         (b.v - 0.5 * p) * lap * nu - p * nu;
    return std::pair{phase, shape};
  });
  out.phase(0, 0) -= z.xi;
  out.shape(0, 0) -= 2.0 * (z.zeta + lambda * z.xi);
  out.area = 8.0 * M_PI * z.nu(0, 0);
  out.mass = 4.0 * M_PI * z.G(0, 0);
  return out;
}

Eigen::MatrixXd assemble_L(double lambda, int l_max, const Constitutive& c) {
  const Eigen::Index n = static_cast<Eigen::Index>(harmonic_count(l_max));
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n + 2, 2 * n + 2);
  const Derivs psi = c.psi(lambda), b = c.B(lambda), e = c.E(lambda);
  const double p = c.pressure, eps = c.epsilon;
  for (int l = 0; l <= l_max; ++l) {
    const double lap = -lap_eig(l);
    for (int mm = -l; mm <= l; ++mm) {
      const auto k = static_cast<Eigen::Index>(harmonic_offset(l, mm));
      m(k, k) = -eps * lap + psi.d2;
      m(n + k, k) = 2.0 * (e.d1 - b.d1) * lap - 4.0 * (b.d1 + e.d1);
      m(n + k, n + k) = b.v * lap * lap + (2.0 * b.v - p) * lap - 2.0 * p;
    }
  }
  // constants in orthonormal coordinates: 1 = sqrt(4 pi) Y_00, int Y_00 = sqrt(4 pi)
  const double s = std::sqrt(4.0 * M_PI);
  m(0, 2 * n + 1) = -s;
  m(n, 2 * n) = -4.0 * s;
  m(n, 2 * n + 1) = -4.0 * lambda * s;
  m(2 * n, n) = s;
  m(2 * n + 1, 0) = s;
  return m;
}

NullSpaceReport null_space(double lambda, int l_max, const Constitutive& c, double rel_tol) {
  Eigen::MatrixXd m = assemble_L(lambda, l_max, c);
  // Rows grow like l^4, which would bury the phase block; scale each row by the size of
  // its terms (not their sum, which cancels at a root).
  const Eigen::Index n = static_cast<Eigen::Index>(harmonic_count(l_max));
  const Derivs psi = c.psi(lambda), b = c.B(lambda), e = c.E(lambda);
  for (int l = 0; l <= l_max; ++l) {
    const double L = lap_eig(l);
    const double phase_scale = 1.0 + c.epsilon * L + std::abs(psi.d2);
    const double shape_scale = 1.0 + b.v * L * L + std::abs(2.0 * b.v - c.pressure) * L +
                               2.0 * c.pressure + 2.0 * std::abs(e.d1 - b.d1) * L +
                               4.0 * std::abs(b.d1 + e.d1);
    for (int mm = -l; mm <= l; ++mm) {
      const auto k = static_cast<Eigen::Index>(harmonic_offset(l, mm));
      m.row(k) /= phase_scale;
      m.row(n + k) /= shape_scale;
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();  // descending
  NullSpaceReport out;
  out.threshold = rel_tol * sv(0);
  const Eigen::Index nsv = sv.size();
  out.singular_values = sv.reverse();
  int dim = 0;
  while (dim < nsv && out.singular_values(dim) < out.threshold) ++dim;
  out.dimension = dim;
  out.basis = svd.matrixV().rightCols(dim);
  if (dim > 0 && dim < nsv)
    out.gap = out.singular_values(dim) / std::max(out.singular_values(dim - 1), 1e-300);
  else if (dim == 0)
    out.gap = out.singular_values(0) / out.threshold;

  int hits = 0;
  for (int l = 1; l <= l_max; ++l)
    if (std::abs(crossing_function(lambda, l, c)) < 1e-6 * std::max(1.0, c.epsilon * lap_eig(l)))
      ++hits;
  out.clustered = hits > 1;
  return out;
}

}  // namespace vesicle
