#include "vesicle/model.hpp"

#include <algorithm>
#include <cmath>

// pchip.hpp in Boost 1.74 calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

namespace vesicle {

using nlohmann::json;

Derivs SigmoidModulus::operator()(double phi) const {
  if (jump == 0.0) return {base, 0.0, 0.0, 0.0};
  const double t = std::tanh(phi / width);
  const double s1 = 0.5 * (1.0 - t * t);
  const double s2 = -t * (1.0 - t * t);
  const double s3 = (1.0 - t * t) * (3.0 * t * t - 1.0);
  return {base + jump * 0.5 * (1.0 + t), jump * s1 / width, jump * s2 / (width * width),
          jump * s3 / (width * width * width)};
}

struct TabulatedWell::Impl {
  using Pchip = boost::math::interpolators::pchip<std::vector<double>>;
  Pchip w, dw, d2w;
};

TabulatedWell::TabulatedWell(std::vector<double> phi, std::vector<double> w,
                             std::vector<double> dw, std::vector<double> d2w) {
  const std::size_t n = phi.size();
  if (n < 4 || w.size() != n || dw.size() != n || d2w.size() != n)
    throw ConfigError("tabulated W: need at least 4 rows of equal length");
  for (std::size_t k = 1; k < n; ++k)
    if (!(phi[k] > phi[k - 1])) throw ConfigError("tabulated W: phi must increase strictly");
  lo_ = phi.front();
  hi_ = phi.back();
  impl_ = std::make_shared<const Impl>(Impl{Impl::Pchip(std::vector<double>(phi), std::move(w)),
                                            Impl::Pchip(std::vector<double>(phi), std::move(dw)),
                                            Impl::Pchip(std::move(phi), std::move(d2w))});
}

Derivs TabulatedWell::operator()(double phi) const {
  if (phi < lo_ || phi > hi_) throw DomainError("tabulated W: phi outside table range");
  const double h = 1e-5 * std::max(1.0, hi_ - lo_);
  const double a = std::max(lo_, phi - h), b = std::min(hi_, phi + h);
  return {impl_->w(phi), impl_->dw(phi), impl_->d2w(phi), (impl_->d2w(b) - impl_->d2w(a)) / (b - a)};
}

Derivs Constitutive::W(double phi) const {
  if (table) return (*table)(phi);
  const double q = phi * phi - 1.0;
  return {0.25 * well_scale * q * q, well_scale * phi * q, well_scale * (3.0 * phi * phi - 1.0),
          6.0 * well_scale * phi};
}

Derivs Constitutive::psi(double lambda) const {
  const Derivs w = W(lambda), b = B(lambda), e = E(lambda);
  return {w.v + b.v + e.v, w.d1 + b.d1 + e.d1, w.d2 + b.d2 + e.d2, w.d3 + b.d3 + e.d3};
}

std::vector<double> Constitutive::spinodal_roots() const {
  double lo = -3.0, hi = 3.0;
  if (table) {
    lo = std::max(lo, table->lo());
    hi = std::min(hi, table->hi());
  }
  const int n = 6000;
  std::vector<double> roots;
  double xa = lo, fa = W(lo).d2;
  for (int k = 1; k <= n; ++k) {
    const double xb = lo + (hi - lo) * k / n;
    const double fb = W(xb).d2;
    if (fa == 0.0) roots.push_back(xa);
    else if (fa * fb < 0.0) {
      double a = xa, b = xb, f = fa;
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        if (m == a || m == b) break;
        const double fm = W(m).d2;
        if ((fm < 0.0) == (f < 0.0)) {
          a = m;
          f = fm;
        } else {
          b = m;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    xa = xb;
    fa = fb;
  }
  return roots;
}

std::pair<double, double> Constitutive::spinodal() const {
  const auto r = spinodal_roots();
  if (r.size() < 2) throw ConfigError("constitutive: W'' does not change sign twice");
  return {r.front(), r.back()};
}

void Constitutive::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(pressure >= 0.0)) throw ConfigError("pressure must be nonnegative");
  if (!(B.width > 0.0) || !(E.width > 0.0)) throw ConfigError("modulus width must be positive");
  double lo = -3.0, hi = 3.0;
  if (table) {
    lo = std::max(lo, table->lo());
    hi = std::min(hi, table->hi());
  }
  for (int k = 0; k <= 600; ++k) {
    const double phi = -3.0 + 6.0 * k / 600;
    if (B(phi).v < epsilon) throw ConfigError("bending modulus must satisfy B >= epsilon");
    if (phi >= lo && phi <= hi && W(phi).v < -1e-12) throw ConfigError("W must be nonnegative");
  }
  if (spinodal_roots().size() != 2) throw ConfigError("W'' must have exactly two zeros");
}

TrivialBranch trivial_multipliers(const Constitutive& c, double lambda) {
  const Derivs p = c.psi(lambda);
  return {lambda, p.d1, c.W(lambda).v - lambda * p.d1 - 0.5 * c.pressure};
}

std::pair<double, double> multipliers(const Constitutive& c, const ModelState& s, double lambda) {
  const TrivialBranch t = trivial_multipliers(c, lambda);
  return {t.mu + s.xi, t.gamma + s.zeta};
}

double energy(const Constitutive& c, const ModelState& s, double lambda, const GeometryBundle& g) {
  const auto& grid = g.grid;
  const GridField phi = synthesize(s.phi, grid);
  const GridField grad2 = grad_sigma_norm2(surface_gradient(s.phi, grid), g);
  std::vector<double> density(grid->size());
  for (std::size_t k = 0; k < density.size(); ++k) {
    const double pt = lambda + phi.values[k];
    density[k] = (c.B(pt).v * g.H[k] * g.H[k] + c.E(pt).v * g.K[k] +
                  0.5 * c.epsilon * grad2.values[k] + c.W(pt).v) *
                 g.J[k];
  }
  return grid->integrate(density) - c.pressure * enclosed_volume(g);
}

double energy(const Constitutive& c, const ModelState& s, double lambda, const GridPtr& grid) {
  return energy(c, s, lambda, geometry_from_u(s.u, grid));
}

ConstraintValues constraints(const ModelState& s, const GeometryBundle& g) {
  const GridField phi = synthesize(s.phi, g.grid);
  std::vector<double> pj(g.grid->size());
  for (std::size_t k = 0; k < pj.size(); ++k) pj[k] = phi.values[k] * g.J[k];
  return {surface_area(g) - 4.0 * M_PI, g.grid->integrate(pj)};
}

ConstraintValues constraints(const ModelState& s, const GridPtr& grid) {
  return constraints(s, geometry_from_u(s.u, grid));
}

double lagrangian(const Constitutive& c, const ModelState& s, double lambda, const GridPtr& grid) {
  const GeometryBundle g = geometry_from_u(s.u, grid);
  const auto [mu, gamma] = multipliers(c, s, lambda);
  const ConstraintValues cv = constraints(s, g);
  // integral of the total phase minus 4 pi lambda
  const double phase_total = lambda * cv.area + cv.phase;
  return energy(c, s, lambda, g) - gamma * cv.area - mu * phase_total;
}

namespace {

SigmoidModulus modulus_from_json(const json& j, const char* base_key, const char* jump_key,
                                 SigmoidModulus fallback) {
  if (!j.is_object()) throw ConfigError("modulus entry must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != base_key && it.key() != jump_key && it.key() != "width")
      throw ConfigError("unknown modulus key: " + it.key());
  SigmoidModulus m = fallback;
  m.base = j.value(base_key, fallback.base);
  m.jump = j.value(jump_key, fallback.jump);
  m.width = j.value("width", fallback.width);
  return m;
}

std::vector<double> number_list(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) throw ConfigError(std::string("tabulated W: missing ") + key);
  return j.at(key).get<std::vector<double>>();
}

}  // namespace

Constitutive constitutive_from_json(const json& j) {
  Constitutive c;
  try {
    if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
    if (j.contains("pressure")) c.pressure = j.at("pressure").get<double>();
    if (j.contains("W")) {
      const json& w = j.at("W");
      const std::string type = w.value("type", "quartic_double_well");
      if (type == "quartic_double_well") {
        c.well_scale = w.value("scale", 1.0);
        if (!(c.well_scale > 0.0)) throw ConfigError("W scale must be positive");
      } else if (type == "tabulated") {
        c.table = std::make_shared<const TabulatedWell>(number_list(w, "phi"), number_list(w, "W"),
                                                        number_list(w, "dW"), number_list(w, "d2W"));
      } else {
        throw ConfigError("unknown W type: " + type);
      }
    }
    if (j.contains("B")) c.B = modulus_from_json(j.at("B"), "b0", "b1", c.B);
    if (j.contains("E")) c.E = modulus_from_json(j.at("E"), "e0", "e1", c.E);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("constitutive config: ") + e.what());
  }
  c.validate();
  return c;
}

json constitutive_to_json(const Constitutive& c) {
  json j;
  j["epsilon"] = c.epsilon;
  j["pressure"] = c.pressure;
  if (c.table)
    j["W"] = {{"type", "tabulated"}};
  else
    j["W"] = {{"type", "quartic_double_well"}, {"scale", c.well_scale}};
  j["B"] = {{"b0", c.B.base}, {"b1", c.B.jump}, {"width", c.B.width}};
  j["E"] = {{"e0", c.E.base}, {"e1", c.E.jump}, {"width", c.E.width}};
  return j;
}

}  // namespace vesicle
