#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "vesicle/harmonics.hpp"
#include "vesicle/kernels.hpp"

using namespace vesicle;

namespace {

GridField sample(const GridPtr& g, int l, int m) {
  GridField f(g);
  for (int i = 0; i < g->n_theta(); ++i)
    for (int j = 0; j < g->n_psi(); ++j)
      f.values[i * g->n_psi() + j] = oracle::harmonic(l, m, g->theta(i), g->psi(j));
  return f;
}

SpectralField random_field(int l_max, std::mt19937& rng, double decay = 1.0) {
  std::normal_distribution<double> n(0.0, 1.0);
  SpectralField c(l_max);
  for (int l = 0; l <= l_max; ++l)
    for (int m = -l; m <= l; ++m)
      c(l, m) = n(rng) / std::sqrt(harmonic_norm_sq(l, m)) / std::pow(1.0 + l, decay);
  return c;
}

}  // namespace

TEST_CASE("assoc_legendre values") {
  CHECK(assoc_legendre(1, 0, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(assoc_legendre(2, 0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(assoc_legendre(3, 3, 0.0) == doctest::Approx(15.0).epsilon(1e-14));
  CHECK(oracle::assoc_legendre(3, 3, 0.0) == doctest::Approx(15.0).epsilon(1e-14));
  CHECK_THROWS_AS(assoc_legendre(2, 3, 0.1), DomainError);
  CHECK_THROWS_AS(assoc_legendre(2, 1, 1.5), DomainError);
}

TEST_CASE("assoc_legendre agrees with term-by-term differentiation") {
  for (int l = 0; l <= 12; ++l)
    for (int m = 0; m <= l; ++m)
      for (double x : {-0.93, -0.4, 0.0, 0.17, 0.66, 0.999}) {
        const double ref = oracle::assoc_legendre(l, m, x);
        CHECK(std::abs(assoc_legendre(l, m, x) - ref) <= 1e-11 * std::max(1.0, std::abs(ref)));
      }
}

TEST_CASE("real harmonic convention") {
  const double th = 0.7, ps = 1.9;
  CHECK(real_harmonic({1, 1}, th, ps) == doctest::Approx(std::sin(th) * std::cos(ps)));
  CHECK(real_harmonic({1, -1}, th, ps) == doctest::Approx(std::sin(th) * std::sin(ps)));
  CHECK(real_harmonic({1, 0}, th, ps) == doctest::Approx(std::cos(th)));
  CHECK(real_harmonic({4, 0}, 0.0, 0.3) == doctest::Approx(1.0));
  CHECK(real_harmonic({3, 3}, M_PI / 2, 0.0) == doctest::Approx(15.0));
  // 30 xyz
  const Eigen::Vector3d x(std::sin(th) * std::cos(ps), std::sin(th) * std::sin(ps), std::cos(th));
  CHECK(real_harmonic({3, -2}, th, ps) == doctest::Approx(30.0 * x.x() * x.y() * x.z()));
  CHECK(real_harmonic({3, -2}, x) == doctest::Approx(30.0 * x.x() * x.y() * x.z()));
}

TEST_CASE("grid weights and basic integrals") {
  auto g = build_grid(8);
  CHECK(g->n_theta() == 16);
  CHECK(g->n_psi() == 32);
  double total = 0.0;
  for (double w : g->weights()) total += w;
  CHECK(std::abs(total - 4.0 * M_PI) <= 1e-12 * 4.0 * M_PI);
  for (int i = 0; i < g->n_theta(); ++i) {
    CHECK(g->theta(i) > 0.0);
    CHECK(g->theta(i) < M_PI);
  }
  auto f = sample(g, 2, 0);
  CHECK(std::abs(f.integral()) <= 1e-12);
  for (double& v : f.values) v *= v;
  const double ref =
      2.0 * M_PI * oracle::integrate([](double x) { return std::pow(1.5 * x * x - 0.5, 2); }, -1, 1);
  CHECK(std::abs(ref - 4.0 * M_PI / 5.0) <= 1e-10);
  CHECK(std::abs(f.integral() - ref) <= 1e-10);
}

TEST_CASE("basis norms agree with quadrature") {
  auto g = build_grid(8);
  for (int l = 0; l <= 8; ++l)
    for (int m = -l; m <= l; ++m) {
      auto f = sample(g, l, m);
      for (double& v : f.values) v *= v;
      const double ref = m == 0 ? 4 * M_PI / (2 * l + 1)
                                : 2 * M_PI / (2 * l + 1) * oracle::factorial_ratio(l, std::abs(m));
      CHECK(std::abs(f.integral() - ref) <= 1e-11 * ref);
      CHECK(std::abs(harmonic_norm_sq(l, m) - ref) <= 1e-13 * ref);
    }
}

TEST_CASE("orthogonality over all pairs") {
  const int L = 6;
  auto g = build_grid(L);
  std::vector<GridField> basis;
  std::vector<double> norms;
  for (int l = 0; l <= L; ++l)
    for (int m = -l; m <= l; ++m) {
      basis.push_back(sample(g, l, m));
      norms.push_back(std::sqrt(harmonic_norm_sq(l, m)));
    }
  double worst = 0.0;
  for (std::size_t a = 0; a < basis.size(); ++a)
    for (std::size_t b = 0; b < a; ++b) {
      double s = 0.0;
      for (std::size_t k = 0; k < g->size(); ++k)
        s += g->weight(k) * basis[a].values[k] * basis[b].values[k];
      worst = std::max(worst, std::abs(s) / (norms[a] * norms[b]));
    }
  CHECK(worst <= 1e-10);
}

TEST_CASE("analyze and synthesize") {
  auto g = build_grid(8);
  auto c = analyze(sample(g, 3, -2));
  for (int l = 0; l <= 8; ++l)
    for (int m = -l; m <= l; ++m) CHECK(std::abs(c(l, m) - ((l == 3 && m == -2) ? 1.0 : 0.0)) <= 1e-10);

  SpectralField zero(8);
  for (double v : synthesize(zero, g).values) CHECK(v == 0.0);

  GridField f(g);
  auto a = sample(g, 1, 0), b = sample(g, 4, 4);
  for (std::size_t k = 0; k < g->size(); ++k) f.values[k] = 2.5 * a.values[k] + 0.3 * b.values[k];
  auto d = analyze(f);
  CHECK(d(1, 0) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(d(4, 4) == doctest::Approx(0.3).epsilon(1e-10));
  d(1, 0) = 0.0;
  d(4, 4) = 0.0;
  CHECK(d.max_abs() <= 1e-10);

  CHECK_THROWS_AS(analyze(f, 16), DomainError);
}

TEST_CASE("round trip on random band-limited fields") {
  std::mt19937 rng(11);
  auto g = build_grid(12);
  for (int trial = 0; trial < 5; ++trial) {
    auto c = random_field(12, rng, 0.0);
    auto f = synthesize(c, g);
    auto back = synthesize(analyze(f), g);
    double err = 0.0;
    for (std::size_t k = 0; k < g->size(); ++k) err = std::max(err, std::abs(back.values[k] - f.values[k]));
    CHECK(err <= 1e-10 * f.max_abs());
  }
}

TEST_CASE("laplace_beltrami_s2") {
  SpectralField c(4);
  c(2, 1) = 1.0;
  CHECK(laplace_beltrami_s2(c)(2, 1) == doctest::Approx(-6.0));
  SpectralField k(4);
  k(0, 0) = 3.0;
  CHECK(laplace_beltrami_s2(k).max_abs() == 0.0);
  auto g = build_grid(4);
  SpectralField x3(4);
  x3(1, 0) = 1.0;
  auto lap = synthesize(laplace_beltrami_s2(x3), g);
  for (std::size_t n = 0; n < g->size(); ++n)
    CHECK(std::abs(lap.values[n] + 2.0 * g->point(n).z()) <= 1e-10);
}

TEST_CASE("addition theorem") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int l = 5;
  auto kernel = [&](double t1, double p1, double t2, double p2) {
    double s = 0.0;
    for (int m = -l; m <= l; ++m)
      s += real_harmonic({l, m}, t1, p1) * real_harmonic({l, m}, t2, p2) / harmonic_norm_sq(l, m);
    return s;
  };
  for (int trial = 0; trial < 10; ++trial) {
    const double t1 = std::acos(2 * u(rng) - 1), p1 = 2 * M_PI * u(rng);
    const double t2 = std::acos(2 * u(rng) - 1), p2 = 2 * M_PI * u(rng);
    const double dot = std::sin(t1) * std::sin(t2) * std::cos(p1 - p2) + std::cos(t1) * std::cos(t2);
    // same separation, different absolute position
    const double t3 = std::acos(dot);
    CHECK(std::abs(kernel(t1, p1, t2, p2) - kernel(0.0, 0.0, t3, 0.4)) <= 1e-8);
    CHECK(std::abs(kernel(t1, p1, t2, p2) - (2 * l + 1) / (4 * M_PI) * oracle::assoc_legendre(l, 0, dot)) <= 1e-8);
  }
}

TEST_CASE("legendre derivative tables match finite differences") {
  auto g = build_grid(6);
  const auto& norms = harmonic_norms(g->max_band());
  for (int i = 0; i < g->n_theta(); i += 3)
    for (int l = 0; l <= g->max_band(); ++l)
      for (int m = 0; m <= l; ++m) {
        const double scale = norms[harmonic_offset(l, m)];
        const double th = g->theta(i), h = 1e-6;
        const double p = oracle::assoc_legendre(l, m, std::cos(th)) / scale;
        const double dp = (oracle::assoc_legendre(l, m, std::cos(th + h)) -
                           oracle::assoc_legendre(l, m, std::cos(th - h))) / (2 * h) / scale;
        const double tol = 1e-7 * (1.0 + l * l);
        CHECK(std::abs(g->pbar(i, l, m) - p) <= 1e-11);
        CHECK(std::abs(g->dpbar(i, l, m) - dp) <= tol);
        CHECK(std::abs(g->mpbar_sin(i, l, m) - m * p / std::sin(th)) <= 1e-10 * (1 + m));
      }
}

TEST_CASE("parallel kernels match serial references") {
  std::mt19937 rng(3);
  auto g = build_grid(7);
  const int band = g->max_band();
  auto c = random_field(band, rng, 0.0).normalized();
  std::span<const double> cs(c.data(), c.size());
  std::vector<double> v1(g->size()), v2(g->size());
  kernels::synthesize(*g, band, cs, v1);
  kernels::synthesize_reference(*g, band, cs, v2);
  for (std::size_t k = 0; k < v1.size(); ++k) CHECK(std::abs(v1[k] - v2[k]) <= 1e-11);

  std::vector<double> a1(harmonic_count(band)), a2(harmonic_count(band));
  kernels::analyze(*g, band, v1, a1);
  kernels::analyze_reference(*g, band, v1, a2);
  for (std::size_t k = 0; k < a1.size(); ++k) {
    CHECK(std::abs(a1[k] - a2[k]) <= 1e-11);
    CHECK(std::abs(a1[k] - c[k]) <= 1e-10);
  }

  std::vector<Eigen::Vector3d> g1(g->size()), g2(g->size());
  kernels::synthesize_gradient(*g, band, cs, g1);
  kernels::synthesize_gradient_reference(*g, band, cs, g2);
  for (std::size_t k = 0; k < g1.size(); ++k) {
    CHECK((g1[k] - g2[k]).norm() <= 1e-9);
    CHECK(std::abs(g1[k].dot(g->point(k))) <= 1e-10 * (1 + g1[k].norm()));
  }
}

TEST_CASE("point evaluation") {
  SpectralField c(5);
  c(3, -2) = 0.7;
  c(5, 4) = -0.01;
  c(0, 0) = 1.5;
  const double th = 1.1, ps = -2.3;
  const Eigen::Vector3d x(std::sin(th) * std::cos(ps), std::sin(th) * std::sin(ps), std::cos(th));
  const double ref = 1.5 + 0.7 * oracle::harmonic(3, -2, th, ps) - 0.01 * oracle::harmonic(5, 4, th, ps);
  CHECK(evaluate(c, x) == doctest::Approx(ref).epsilon(1e-12));
  CHECK(evaluate(c, Eigen::Vector3d(0, 0, 1)) == doctest::Approx(1.5));
}
