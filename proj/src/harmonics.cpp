#include "vesicle/harmonics.hpp"

#include <algorithm>
#include <map>
#include <mutex>

#include "vesicle/kernels.hpp"

namespace vesicle {

double assoc_legendre(int l, int m, double x) {
  if (m < 0 || m > l) throw DomainError("assoc_legendre: need 0 <= m <= l");
  if (!(std::abs(x) <= 1.0)) throw DomainError("assoc_legendre: |x| > 1");
  const double s = std::sqrt(std::max(0.0, (1.0 - x) * (1.0 + x)));
  double pmm = 1.0;
  for (int k = 1; k <= m; ++k) pmm *= (2.0 * k - 1.0) * s;
  if (l == m) return pmm;
  double p1 = x * (2.0 * m + 1.0) * pmm;
  double p0 = pmm;
  for (int k = m + 2; k <= l; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k + m - 1.0) * p0) / (k - m);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double real_harmonic(HarmonicIndex idx, double theta, double psi) {
  if (!idx.valid()) throw DomainError("real_harmonic: invalid index");
  const int am = std::abs(idx.m);
  const double p = assoc_legendre(idx.l, am, std::clamp(std::cos(theta), -1.0, 1.0));
  if (idx.m > 0) return p * std::cos(am * psi);
  if (idx.m < 0) return -p * std::sin(idx.m * psi);
  return p;
}

double real_harmonic(HarmonicIndex idx, const Eigen::Vector3d& x) {
  const double theta = std::acos(std::clamp(x.z() / x.norm(), -1.0, 1.0));
  const double psi = std::atan2(x.y(), x.x());
  return real_harmonic(idx, theta, psi);
}

double harmonic_norm_sq(int l, int m) {
  const int am = std::abs(m);
  if (am > l) throw DomainError("harmonic_norm_sq: |m| > l");
  if (am == 0) return 4.0 * M_PI / (2.0 * l + 1.0);
  double ratio = 1.0;
  for (int k = l - am + 1; k <= l + am; ++k) ratio *= k;
  return 2.0 * M_PI / (2.0 * l + 1.0) * ratio;
}

const std::vector<double>& harmonic_norms(int band) {
  static std::mutex mutex;
  static std::map<int, std::vector<double>> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(band);
  if (it != cache.end()) return it->second;
  std::vector<double> norms(harmonic_count(band));
  for (int l = 0; l <= band; ++l)
    for (int m = -l; m <= l; ++m) norms[harmonic_offset(l, m)] = std::sqrt(harmonic_norm_sq(l, m));
  return cache.emplace(band, std::move(norms)).first->second;
}

void normalized_legendre(int band, double x, std::span<double> out) {
  const double s = std::sqrt(std::max(0.0, (1.0 - x) * (1.0 + x)));
  double qmm = 1.0 / std::sqrt(4.0 * M_PI);
  for (int m = 0; m <= band; ++m) {
    if (m > 0) qmm *= s * std::sqrt((2.0 * m + 1.0) / (2.0 * m));
    const double scale = m > 0 ? std::sqrt(2.0) : 1.0;
    out[triangle_offset(m, m)] = qmm * scale;
    if (m == band) break;
    double q0 = qmm;
    double q1 = x * std::sqrt(2.0 * m + 3.0) * qmm;
    out[triangle_offset(m + 1, m)] = q1 * scale;
    for (int l = m + 2; l <= band; ++l) {
      const double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
      const double b = std::sqrt(((l - 1.0) * (l - 1.0) - double(m) * m) /
                                 (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
      const double q2 = a * (x * q1 - b * q0);
      q0 = q1;
      q1 = q2;
      out[triangle_offset(l, m)] = q2 * scale;
    }
  }
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[n - 1 - i] = x;
    nodes[i] = -x;
    weights[i] = weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

QuadratureGrid::QuadratureGrid(int l_max)
    : l_max_(l_max), band_(2 * l_max - 1), n_theta_(2 * l_max), n_psi_(4 * l_max) {
  if (l_max < 1) throw DomainError("build_grid: l_max must be >= 1");
  tri_ = triangle_count(band_);
  std::vector<double> x, w;
  gauss_legendre(n_theta_, x, w);
  // Ring 0 nearest the north pole.
  theta_.resize(n_theta_);
  cos_theta_.resize(n_theta_);
  sin_theta_.resize(n_theta_);
  gl_weight_.resize(n_theta_);
  for (int i = 0; i < n_theta_; ++i) {
    const double xi = x[n_theta_ - 1 - i];
    cos_theta_[i] = xi;
    sin_theta_[i] = std::sqrt((1.0 - xi) * (1.0 + xi));
    theta_[i] = std::acos(xi);
    gl_weight_[i] = w[n_theta_ - 1 - i];
  }
  weights_.resize(size());
  points_.resize(size());
  const double dpsi = 2.0 * M_PI / n_psi_;
  for (int i = 0; i < n_theta_; ++i)
    for (int j = 0; j < n_psi_; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * n_psi_ + j;
      weights_[k] = gl_weight_[i] * dpsi;
      const double p = psi(j);
      points_[k] = {sin_theta_[i] * std::cos(p), sin_theta_[i] * std::sin(p), cos_theta_[i]};
    }

  pbar_.resize(n_theta_ * tri_);
  dpbar_.resize(n_theta_ * tri_);
  mpbar_.resize(n_theta_ * tri_);
  // One extra degree so the theta derivative can reach pbar_{l, m+1}.
  std::vector<double> ext(triangle_count(band_ + 1));
  for (int i = 0; i < n_theta_; ++i) {
    normalized_legendre(band_ + 1, cos_theta_[i], ext);
    auto q = [&](int l, int m) {
      // Undo the sqrt(2) factor for m > 0 so the ladder relations are uniform.
      if (m > l) return 0.0;
      return ext[triangle_offset(l, m)] / (m > 0 ? std::sqrt(2.0) : 1.0);
    };
    for (int l = 0; l <= band_; ++l)
      for (int m = 0; m <= l; ++m) {
        const double scale = m > 0 ? std::sqrt(2.0) : 1.0;
        const std::size_t k = i * tri_ + triangle_offset(l, m);
        pbar_[k] = ext[triangle_offset(l, m)];
        double d;
        if (m == 0) {
          d = -std::sqrt(double(l) * (l + 1)) * q(l, 1);
        } else {
          d = 0.5 * (std::sqrt(double(l + m) * (l - m + 1)) * q(l, m - 1) -
                     std::sqrt(double(l - m) * (l + m + 1)) * q(l, m + 1));
        }
        dpbar_[k] = d * scale;
        mpbar_[k] = m * pbar_[k] / sin_theta_[i];
      }
  }

  cos_.resize(static_cast<std::size_t>(n_psi_) * (band_ + 1));
  sin_.resize(cos_.size());
  for (int j = 0; j < n_psi_; ++j)
    for (int m = 0; m <= band_; ++m) {
      // Exact reduction of the angle keeps the tables symmetric.
      const int r = (m * j) % n_psi_;
      const double a = 2.0 * M_PI * r / n_psi_;
      cos_[j * (band_ + 1) + m] = std::cos(a);
      sin_[j * (band_ + 1) + m] = std::sin(a);
    }
}

double QuadratureGrid::integrate(std::span<const double> values) const {
  double total = 0.0;
  for (int i = 0; i < n_theta_; ++i) {
    double ring = 0.0;
    const double* v = values.data() + static_cast<std::size_t>(i) * n_psi_;
    for (int j = 0; j < n_psi_; ++j) ring += v[j];
    total += gl_weight_[i] * ring;
  }
  return total * 2.0 * M_PI / n_psi_;
}

GridPtr build_grid(int l_max) { return std::make_shared<const QuadratureGrid>(l_max); }

Eigen::VectorXd SpectralField::normalized() const {
  const auto& norms = harmonic_norms(l_max_);
  Eigen::VectorXd out(c_.size());
  for (std::size_t k = 0; k < c_.size(); ++k) out[k] = c_[k] * norms[k];
  return out;
}

SpectralField SpectralField::from_normalized(int l_max, const Eigen::VectorXd& cn) {
  SpectralField f(l_max);
  const auto& norms = harmonic_norms(l_max);
  const std::size_t n = std::min<std::size_t>(f.size(), cn.size());
  for (std::size_t k = 0; k < n; ++k) f.c_[k] = cn[k] / norms[k];
  return f;
}

SpectralField SpectralField::resized(int l_max) const {
  SpectralField f(l_max);
  const std::size_t n = std::min(f.size(), c_.size());
  std::copy_n(c_.begin(), n, f.c_.begin());
  return f;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  if (o.l_max_ != l_max_) throw DomainError("SpectralField: l_max mismatch");
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  if (o.l_max_ != l_max_) throw DomainError("SpectralField: l_max mismatch");
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (double& v : c_) v *= s;
  return *this;
}

double SpectralField::max_abs() const {
  double m = 0.0;
  for (double v : c_) m = std::max(m, std::abs(v));
  return m;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

GridField::GridField(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid->size()) throw DomainError("GridField: value count mismatch");
}

double GridField::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

SpectralField analyze(const GridField& f) { return analyze(f, f.grid->l_max()); }

SpectralField analyze(const GridField& f, int l_max) {
  if (l_max > f.grid->max_band()) throw DomainError("analyze: degree beyond grid band");
  if (f.values.size() != f.grid->size()) throw DomainError("analyze: grid mismatch");
  std::vector<double> cn(harmonic_count(l_max));
  kernels::analyze(*f.grid, l_max, f.values, cn);
  return SpectralField::from_normalized(l_max, Eigen::Map<Eigen::VectorXd>(cn.data(), cn.size()));
}

GridField synthesize(const SpectralField& c, const GridPtr& grid) {
  if (c.l_max() > grid->max_band()) throw DomainError("synthesize: degree beyond grid band");
  GridField f(grid);
  const Eigen::VectorXd cn = c.normalized();
  kernels::synthesize(*grid, c.l_max(), std::span<const double>(cn.data(), cn.size()), f.values);
  return f;
}

SpectralField laplace_beltrami_s2(const SpectralField& c) {
  SpectralField out = c;
  for (int l = 0; l <= c.l_max(); ++l)
    for (int m = -l; m <= l; ++m) out(l, m) = -l * (l + 1.0) * c(l, m);
  return out;
}

void normalized_harmonics(int band, const Eigen::Vector3d& x, std::span<double> out) {
  const double r = x.norm();
  const double ct = std::clamp(x.z() / r, -1.0, 1.0);
  const double psi = std::atan2(x.y(), x.x());
  std::vector<double> p(triangle_count(band));
  normalized_legendre(band, ct, p);
  for (int l = 0; l <= band; ++l) {
    out[harmonic_offset(l, 0)] = p[triangle_offset(l, 0)];
    for (int m = 1; m <= l; ++m) {
      out[harmonic_offset(l, m)] = p[triangle_offset(l, m)] * std::cos(m * psi);
      out[harmonic_offset(l, -m)] = p[triangle_offset(l, m)] * std::sin(m * psi);
    }
  }
}

double evaluate(const SpectralField& c, const Eigen::Vector3d& x) {
  const int band = c.l_max();
  Eigen::VectorXd y(harmonic_count(band));
  normalized_harmonics(band, x, std::span<double>(y.data(), y.size()));
  return y.dot(c.normalized());
}

}  // namespace vesicle
