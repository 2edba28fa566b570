#pragma once

// Independent reference computations used by the tests. Nothing here calls into
// the library.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

// Adaptive Simpson quadrature.
inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                           double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-13) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return simpson_step(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50);
}

// Polynomial coefficients (ascending powers) of P_l from Rodrigues' formula.
inline std::vector<long double> legendre_poly(int l) {
  // (x^2 - 1)^l via binomial expansion.
  std::vector<long double> c(2 * l + 1, 0.0L);
  long double binom = 1.0L;
  for (int k = 0; k <= l; ++k) {
    c[2 * k] = binom * (((l - k) % 2) ? -1.0L : 1.0L);
    binom = binom * (l - k) / (k + 1);
  }
  for (int d = 0; d < l; ++d) {
    std::vector<long double> dc(c.size() > 1 ? c.size() - 1 : 1, 0.0L);
    for (std::size_t i = 1; i < c.size(); ++i) dc[i - 1] = c[i] * static_cast<long double>(i);
    c = dc;
  }
  long double denom = 1.0L;
  for (int k = 1; k <= l; ++k) denom *= 2.0L * k;
  for (auto& v : c) v /= denom;
  return c;
}

// (1-x^2)^{m/2} d^m/dx^m P_l by term-by-term differentiation.
inline double assoc_legendre(int l, int m, double x) {
  auto c = legendre_poly(l);
  for (int d = 0; d < m; ++d) {
    std::vector<long double> dc(c.size() > 1 ? c.size() - 1 : 1, 0.0L);
    for (std::size_t i = 1; i < c.size(); ++i) dc[i - 1] = c[i] * static_cast<long double>(i);
    c = dc;
  }
  long double v = 0.0L;
  for (std::size_t i = c.size(); i-- > 0;) v = v * x + c[i];
  return static_cast<double>(v * std::pow(static_cast<long double>(1.0 - x * x), m / 2.0L));
}

// Harmonic in the unnormalized basis built on the polynomial oracle.
inline double harmonic(int l, int m, double theta, double psi) {
  const double p = assoc_legendre(l, std::abs(m), std::cos(theta));
  if (m > 0) return p * std::cos(m * psi);
  if (m < 0) return p * std::sin(-m * psi);
  return p;
}

inline double factorial_ratio(int l, int m) {
  double r = 1.0;
  for (int k = l - m + 1; k <= l + m; ++k) r *= k;
  return r;
}

}  // namespace oracle
