#include <doctest.h>

#include "vesicle/model.hpp"

using namespace vesicle;
using nlohmann::json;

TEST_CASE("psi and trivial multipliers for the default constitutive") {
  Constitutive c;
  CHECK(c.psi(0.0).v == doctest::Approx(1.25));
  CHECK(c.psi(0.0).d2 == doctest::Approx(-1.0));
  CHECK(c.psi(1.0).d2 == doctest::Approx(2.0));
  for (double l : {-1.2, -0.3, 0.4, 0.9}) {
    CHECK(c.psi(l).d2 == c.W(l).d2);
    CHECK(c.psi(l).d3 == c.W(l).d3);
    CHECK(trivial_multipliers(c, -l).mu == doctest::Approx(-trivial_multipliers(c, l).mu));
  }
  auto t = trivial_multipliers(c, 0.0);
  CHECK(t.mu == 0.0);
  CHECK(t.gamma == doctest::Approx(0.25));
  c.pressure = 2.0;
  CHECK(trivial_multipliers(c, 0.0).gamma == doctest::Approx(-0.75));
}

TEST_CASE("constitutive derivatives match finite differences") {
  Constitutive c;
  c.B = {1.0, 0.5, 0.3};
  c.E = {-0.2, 0.3, 0.25};
  const double h = 1e-5;
  for (double x : {-0.7, -0.1, 0.05, 0.6}) {
    for (auto f : {+[](const Constitutive& k, double p) { return k.W(p); },
                   +[](const Constitutive& k, double p) { return k.B(p); },
                   +[](const Constitutive& k, double p) { return k.E(p); }}) {
      const Derivs a = f(c, x), p = f(c, x + h), m = f(c, x - h);
      CHECK(a.d1 == doctest::Approx((p.v - m.v) / (2 * h)).epsilon(1e-7));
      CHECK(a.d2 == doctest::Approx((p.d1 - m.d1) / (2 * h)).epsilon(1e-7));
      CHECK(a.d3 == doctest::Approx((p.d2 - m.d2) / (2 * h)).epsilon(1e-6));
    }
  }
}

TEST_CASE("spinodal and validation") {
  Constitutive c;
  auto [m1, m2] = c.spinodal();
  CHECK(m1 == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-12));
  CHECK(m2 == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
  CHECK_NOTHROW(c.validate());
  Constitutive bad = c;
  bad.B = {0.001, 0.0, 0.2};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.pressure = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("tabulated well reproduces the quartic") {
  json j = {{"epsilon", 0.01}, {"W", {{"type", "tabulated"}}}};
  std::vector<double> phi, w, dw, d2w;
  for (int k = 0; k <= 600; ++k) {
    const double x = -3.0 + 6.0 * k / 600;
    phi.push_back(x);
    w.push_back(0.25 * std::pow(x * x - 1, 2));
    dw.push_back(x * (x * x - 1));
    d2w.push_back(3 * x * x - 1);
  }
  j["W"]["phi"] = phi;
  j["W"]["W"] = w;
  j["W"]["dW"] = dw;
  j["W"]["d2W"] = d2w;
  auto c = constitutive_from_json(j);
  Constitutive q;
  for (double x : {-0.8, 0.1, 0.55}) {
    CHECK(c.W(x).v == doctest::Approx(q.W(x).v).epsilon(1e-4));
    CHECK(c.W(x).d2 == doctest::Approx(q.W(x).d2).epsilon(1e-3));
    CHECK(c.W(x).d3 == doctest::Approx(q.W(x).d3).epsilon(2e-2));
  }
  CHECK(c.spinodal().second == doctest::Approx(1 / std::sqrt(3.0)).epsilon(1e-4));
}

TEST_CASE("config parsing") {
  auto c = constitutive_from_json(json::parse(R"({"epsilon": 0.02, "pressure": 0.5,
      "W": {"type": "quartic_double_well"}, "B": {"b0": 1.5, "b1": 0.2, "width": 0.1},
      "E": {"e0": 0.1}})"));
  CHECK(c.epsilon == 0.02);
  CHECK(c.B.base == 1.5);
  CHECK(c.B.jump == 0.2);
  CHECK(c.E.base == 0.1);
  CHECK_THROWS_AS(constitutive_from_json(json::parse(R"({"W": {"type": "sextic"}})")), ConfigError);
  CHECK_THROWS_AS(constitutive_from_json(json::parse(R"({"B": {"stiffness": 1}})")), ConfigError);
  CHECK_THROWS_AS(constitutive_from_json(json::parse(R"({"epsilon": "small"})")), ConfigError);
}

TEST_CASE("energy and constraints") {
  auto g = build_grid(8);
  Constitutive c;
  c.pressure = 0.3;
  for (double lam : {-0.4, 0.0, 0.7}) {
    ModelState s(8);
    CHECK(energy(c, s, lam, g) ==
          doctest::Approx(4 * M_PI * c.psi(lam).v - 4 * M_PI / 3 * c.pressure).epsilon(1e-13));
    auto cv = constraints(s, g);
    CHECK(std::abs(cv.area) <= 1e-13);
    CHECK(std::abs(cv.phase) <= 1e-13);
  }
  ModelState d(8);
  d.u(0, 0) = 0.2;
  auto cv = constraints(d, g);
  CHECK(cv.area == doctest::Approx(4 * M_PI * (std::exp(0.4) - 1)).epsilon(1e-12));
  CHECK(std::abs(cv.phase) <= 1e-13);

  ModelState p(8);
  p.phi(3, 2) = 0.01;
  cv = constraints(p, g);
  CHECK(std::abs(cv.area) <= 1e-13);
  CHECK(std::abs(cv.phase) <= 1e-13);

  c.pressure = 0.0;
  for (double delta : {0.1, 0.3}) {
    ModelState a(8), b(8);
    a.phi(1, 0) = delta;
    b.phi(1, 0) = -delta;
    CHECK(energy(c, a, 0.0, g) == doctest::Approx(energy(c, b, 0.0, g)).epsilon(1e-13));
  }
}

TEST_CASE("gradient term isolated by a quadratic fit") {
  auto g = build_grid(8);
  Constitutive c;
  c.epsilon = 0.05;
  const double lam = 0.2;
  const double e0 = energy(c, ModelState(8), lam, g);
  // E(delta) - E0 = a delta^2 + b delta^4 for the even part; fit from two amplitudes.
  auto excess = [&](double d) {
    ModelState s(8);
    s.phi(2, 0) = d;
    ModelState t(8);
    t.phi(2, 0) = -d;
    return 0.5 * (energy(c, s, lam, g) + energy(c, t, lam, g)) - e0;
  };
  const double d1 = 1e-2, d2 = 2e-2;
  const double a = (16 * excess(d1) - excess(d2)) / (12 * d1 * d1);
  const double norm2 = 4 * M_PI / 5;
  const double expected = 0.5 * (c.W(lam).d2 + 6 * c.epsilon) * norm2;
  CHECK(a == doctest::Approx(expected).epsilon(1e-8));
  // the gradient part alone
  CHECK(a - 0.5 * c.W(lam).d2 * norm2 == doctest::Approx(0.5 * c.epsilon * 6 * norm2).epsilon(1e-7));
}
