#include "vesicle/kernels.hpp"

#include <cmath>
#include <vector>

namespace vesicle::kernels {

namespace {

void check_band(const QuadratureGrid& grid, int band, std::size_t ncoeff) {
  if (band > grid.max_band()) throw DomainError("kernel: band exceeds grid resolution");
  if (ncoeff < harmonic_count(band)) throw DomainError("kernel: coefficient vector too short");
}

// Fourier coefficients of one ring from the Legendre table `table`.
void ring_fourier(const double* table, int band, std::span<const double> c, double* a, double* b) {
  for (int m = 0; m <= band; ++m) {
    double sa = 0.0, sb = 0.0;
    for (int l = m; l <= band; ++l) {
      const double p = table[triangle_offset(l, m)];
      sa += c[harmonic_offset(l, m)] * p;
      if (m > 0) sb += c[harmonic_offset(l, -m)] * p;
    }
    a[m] = sa;
    b[m] = sb;
  }
}

}  // namespace

void synthesize(const QuadratureGrid& grid, int band, std::span<const double> coeffs,
                std::span<double> values) {
  check_band(grid, band, coeffs.size());
  const int nt = grid.n_theta(), np = grid.n_psi();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nt; ++i) {
    std::vector<double> a(band + 1), b(band + 1);
    ring_fourier(grid.pbar_ring(i), band, coeffs, a.data(), b.data());
    double* out = values.data() + static_cast<std::size_t>(i) * np;
    for (int j = 0; j < np; ++j) {
      double v = a[0];
      for (int m = 1; m <= band; ++m) v += a[m] * grid.cos_mpsi(j, m) + b[m] * grid.sin_mpsi(j, m);
      out[j] = v;
    }
  }
}

void synthesize_reference(const QuadratureGrid& grid, int band,
                          std::span<const double> coeffs, std::span<double> values) {
  check_band(grid, band, coeffs.size());
  for (int i = 0; i < grid.n_theta(); ++i)
    for (int j = 0; j < grid.n_psi(); ++j) {
      const double psi = grid.psi(j);
      double v = 0.0;
      for (int l = 0; l <= band; ++l) {
        v += coeffs[harmonic_offset(l, 0)] * grid.pbar(i, l, 0);
        for (int m = 1; m <= l; ++m)
          v += grid.pbar(i, l, m) * (coeffs[harmonic_offset(l, m)] * std::cos(m * psi) +
                                     coeffs[harmonic_offset(l, -m)] * std::sin(m * psi));
      }
      values[static_cast<std::size_t>(i) * grid.n_psi() + j] = v;
    }
}

void analyze(const QuadratureGrid& grid, int band, std::span<const double> values,
             std::span<double> coeffs) {
  check_band(grid, band, coeffs.size());
  const int nt = grid.n_theta(), np = grid.n_psi();
  const std::size_t stride = band + 1;
  std::vector<double> a(nt * stride), b(nt * stride);
  const double dpsi = 2.0 * M_PI / np;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nt; ++i) {
    const double* f = values.data() + static_cast<std::size_t>(i) * np;
    const double w = grid.ring_weight(i) * dpsi;
    for (int m = 0; m <= band; ++m) {
      double sa = 0.0, sb = 0.0;
      for (int j = 0; j < np; ++j) {
        sa += f[j] * grid.cos_mpsi(j, m);
        sb += f[j] * grid.sin_mpsi(j, m);
      }
      a[i * stride + m] = w * sa;
      b[i * stride + m] = w * sb;
    }
  }
#pragma omp parallel for schedule(dynamic)
  for (int m = 0; m <= band; ++m) {
    for (int l = m; l <= band; ++l) {
      double sa = 0.0, sb = 0.0;
      for (int i = 0; i < nt; ++i) {
        const double p = grid.pbar(i, l, m);
        sa += p * a[i * stride + m];
        sb += p * b[i * stride + m];
      }
      coeffs[harmonic_offset(l, m)] = sa;
      if (m > 0) coeffs[harmonic_offset(l, -m)] = sb;
    }
  }
}

void analyze_reference(const QuadratureGrid& grid, int band,
                       std::span<const double> values, std::span<double> coeffs) {
  check_band(grid, band, coeffs.size());
  for (int l = 0; l <= band; ++l)
    for (int m = -l; m <= l; ++m) {
      const int am = std::abs(m);
      double s = 0.0;
      for (int i = 0; i < grid.n_theta(); ++i)
        for (int j = 0; j < grid.n_psi(); ++j) {
          const double psi = grid.psi(j);
          const double trig = m > 0 ? std::cos(am * psi) : (m < 0 ? std::sin(am * psi) : 1.0);
          const std::size_t k = static_cast<std::size_t>(i) * grid.n_psi() + j;
          s += grid.weight(k) * values[k] * grid.pbar(i, l, am) * trig;
        }
      coeffs[harmonic_offset(l, m)] = s;
    }
}

void synthesize_gradient(const QuadratureGrid& grid, int band, std::span<const double> coeffs,
                         std::span<Eigen::Vector3d> grad) {
  check_band(grid, band, coeffs.size());
  const int nt = grid.n_theta(), np = grid.n_psi();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nt; ++i) {
    std::vector<double> da(band + 1), db(band + 1), sa(band + 1), sb(band + 1);
    ring_fourier(grid.dpbar_ring(i), band, coeffs, da.data(), db.data());
    ring_fourier(grid.mpbar_ring(i), band, coeffs, sa.data(), sb.data());
    const double ct = grid.cos_theta(i), st = grid.sin_theta(i);
    for (int j = 0; j < np; ++j) {
      double ft = da[0], fp = 0.0;
      for (int m = 1; m <= band; ++m) {
        const double c = grid.cos_mpsi(j, m), s = grid.sin_mpsi(j, m);
        ft += da[m] * c + db[m] * s;
        fp += sb[m] * c - sa[m] * s;
      }
      const double cp = std::cos(grid.psi(j)), sp = std::sin(grid.psi(j));
      grad[static_cast<std::size_t>(i) * np + j] = {ft * ct * cp - fp * sp, ft * ct * sp + fp * cp,
                                                    -ft * st};
    }
  }
}

void synthesize_gradient_reference(const QuadratureGrid& grid, int band,
                                   std::span<const double> coeffs,
                                   std::span<Eigen::Vector3d> grad) {
  check_band(grid, band, coeffs.size());
  for (int i = 0; i < grid.n_theta(); ++i)
    for (int j = 0; j < grid.n_psi(); ++j) {
      const double psi = grid.psi(j);
      double ft = 0.0, fp = 0.0;
      for (int l = 0; l <= band; ++l) {
        ft += coeffs[harmonic_offset(l, 0)] * grid.dpbar(i, l, 0);
        for (int m = 1; m <= l; ++m) {
          const double cm = coeffs[harmonic_offset(l, m)], sm = coeffs[harmonic_offset(l, -m)];
          ft += grid.dpbar(i, l, m) * (cm * std::cos(m * psi) + sm * std::sin(m * psi));
          fp += grid.mpbar_sin(i, l, m) * (sm * std::cos(m * psi) - cm * std::sin(m * psi));
        }
      }
      const Eigen::Vector3d e_theta(grid.cos_theta(i) * std::cos(psi),
                                    grid.cos_theta(i) * std::sin(psi), -grid.sin_theta(i));
      const Eigen::Vector3d e_psi(-std::sin(psi), std::cos(psi), 0.0);
      grad[static_cast<std::size_t>(i) * grid.n_psi() + j] = ft * e_theta + fp * e_psi;
    }
}

}  // namespace vesicle::kernels
