#include <doctest.h>

#include <algorithm>
#include <random>

#include <Eigen/LU>
#include <Eigen/QR>

#include "oracles.hpp"
#include "vesicle/symmetry.hpp"

using namespace vesicle;

namespace {

GroupElement random_orthogonal(std::mt19937& rng, bool improper) {
  std::normal_distribution<double> n;
  Eigen::Matrix3d a;
  for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = n(rng);
  Eigen::HouseholderQR<Eigen::Matrix3d> qr(a);
  GroupElement q = qr.householderQ();
  if ((q.determinant() < 0) != improper) q.col(0) *= -1.0;
  return q;
}

// Field value from the polynomial oracle, unnormalized coefficients of degree l.
double oracle_value(int l, const Eigen::VectorXd& c, const Eigen::Vector3d& x) {
  const double theta = std::acos(std::clamp(x.z(), -1.0, 1.0));
  const double psi = std::atan2(x.y(), x.x());
  double v = 0.0;
  for (int m = -l; m <= l; ++m) v += c(m + l) * oracle::harmonic(l, m, theta, psi);
  return v;
}

Eigen::Vector3d random_unit(std::mt19937& rng) {
  std::normal_distribution<double> n;
  return Eigen::Vector3d(n(rng), n(rng), n(rng)).normalized();
}

// Invariance checked pointwise against the oracle: f(G^T x) = f(x).
double pointwise_defect(int l, const Eigen::VectorXd& c, const Subgroup& g) {
  std::mt19937 rng(11);
  double worst = 0.0, scale = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Eigen::Vector3d x = random_unit(rng);
    const double fx = oracle_value(l, c, x);
    scale = std::max(scale, std::abs(fx));
    for (const auto& G : g.sample_elements())
      worst = std::max(worst, std::abs(oracle_value(l, c, G.transpose() * x) - fx));
  }
  return worst / scale;
}

double ratio(const FixedSpace& fs, int m_num, int m_den) {
  return fs.basis_unnormalized(m_num + fs.l, 0) / fs.basis_unnormalized(m_den + fs.l, 0);
}

}  // namespace

TEST_CASE("l = 1 representation is G itself") {
  std::mt19937 rng(1);
  for (int k = 0; k < 4; ++k) {
    const GroupElement G = random_orthogonal(rng, k % 2 == 1);
    const Eigen::MatrixXd T = rep_matrix_unnormalized(1, G);
    // coefficient order (rho_{1,-1}, rho_{1,0}, rho_{1,1}) = (y, z, x)
    const int perm[3] = {1, 2, 0};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(T(i, j) == doctest::Approx(G(perm[i], perm[j])).epsilon(1e-12));
  }
}

TEST_CASE("parity and identity") {
  const GroupElement minus = -GroupElement::Identity();
  CHECK((rep_matrix(3, minus) + Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((rep_matrix(4, minus) - Eigen::MatrixXd::Identity(9, 9)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((rep_matrix(6, GroupElement::Identity()) - Eigen::MatrixXd::Identity(13, 13)).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("representation is an orthogonal homomorphism") {
  std::mt19937 rng(2);
  for (const auto& name : catalog_names()) {
    const Subgroup g = catalog_subgroup(name);
    const auto el = g.sample_elements();
    std::uniform_int_distribution<std::size_t> pick(0, el.size() - 1);
    for (int trial = 0; trial < 3; ++trial) {
      const GroupElement a = el[pick(rng)], b = el[pick(rng)];
      for (int l : {2, 5, 12}) {
        const Eigen::MatrixXd ab = rep_matrix(l, a * b);
        CHECK((ab - rep_matrix(l, a) * rep_matrix(l, b)).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((ab.transpose() * ab - Eigen::MatrixXd::Identity(2 * l + 1, 2 * l + 1)).cwiseAbs().maxCoeff() <
              1e-9);
      }
    }
  }
}

TEST_CASE("act matches composition with G^T") {
  SpectralField f(2);
  f(2, 1) = 1.0;
  const SpectralField g = act(rotation(Eigen::Vector3d::UnitZ(), M_PI), f);
  CHECK(g(2, 1) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK((g + f).max_abs() < 1e-12);

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  SpectralField h(5);
  for (std::size_t k = 0; k < h.size(); ++k) h[k] = u(rng) / (1.0 + k);
  const GroupElement G = random_orthogonal(rng, true), H = random_orthogonal(rng, false);
  const SpectralField rotated = act(G, h);
  for (int k = 0; k < 10; ++k) {
    const Eigen::Vector3d x = random_unit(rng);
    CHECK(evaluate(rotated, x) == doctest::Approx(evaluate(h, G.transpose() * x)).epsilon(1e-11));
  }
  CHECK((act(G, act(H, h)) - act(G * H, h)).max_abs() < 1e-9);
}

TEST_CASE("closure orders") {
  CHECK(catalog_subgroup("T").elements.size() == 12);
  CHECK(catalog_subgroup("D6d").elements.size() == 12);
  CHECK(catalog_subgroup("O").elements.size() == 24);
  CHECK(catalog_subgroup("O_minus").elements.size() == 24);
  CHECK(catalog_subgroup("OxZ2c").elements.size() == 48);
  CHECK(catalog_subgroup("I").elements.size() == 60);
  CHECK(catalog_subgroup("IxZ2c").elements.size() == 120);
  // an irrational rotation never closes
  CHECK_THROWS_AS(close_subgroup({rotation(Eigen::Vector3d::UnitZ(), 1.0)}), DomainError);
}

TEST_CASE("example fixed spaces") {
  SUBCASE("D6d, l = 3: rho_{3,3}") {
    const FixedSpace fs = fixed_space(3, catalog_subgroup("D6d"));
    REQUIRE(fs.dimension() == 1);
    CHECK(std::abs(fs.basis(3 + 3, 0)) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("O_minus, l = 3: rho_{3,-2}") {
    const FixedSpace fs = fixed_space(3, catalog_subgroup("O_minus"));
    REQUIRE(fs.dimension() == 1);
    CHECK(std::abs(fs.basis(-2 + 3, 0)) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("O2xZ2c, l = 4: rho_{4,0}") {
    const FixedSpace fs = fixed_space(4, catalog_subgroup("O2xZ2c"));
    REQUIRE(fs.dimension() == 1);
    CHECK(std::abs(fs.basis(4, 0)) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("OxZ2c, l = 4: 168 : 1") {
    const FixedSpace fs = fixed_space(4, catalog_subgroup("OxZ2c"));
    REQUIRE(fs.dimension() == 1);
    CHECK(ratio(fs, 0, 4) == doctest::Approx(168.0).epsilon(1e-6));
    CHECK(pointwise_defect(4, fs.basis_unnormalized.col(0), catalog_subgroup("OxZ2c")) < 1e-10);
  }
  SUBCASE("IxZ2c, l = 6: 3960 : -1") {
    const FixedSpace fs = fixed_space(6, catalog_subgroup("IxZ2c"));
    REQUIRE(fs.dimension() == 1);
    CHECK(ratio(fs, 0, 5) == doctest::Approx(-3960.0).epsilon(1e-6));
    CHECK(pointwise_defect(6, fs.basis_unnormalized.col(0), catalog_subgroup("IxZ2c")) < 1e-10);
  }
  SUBCASE("IxZ2c, l = 10: 896313600 : 27360 : 1") {
    const FixedSpace fs = fixed_space(10, catalog_subgroup("IxZ2c"));
    REQUIRE(fs.dimension() == 1);
    CHECK(ratio(fs, 0, 10) == doctest::Approx(896313600.0).epsilon(1e-6));
    CHECK(ratio(fs, 5, 10) == doctest::Approx(27360.0).epsilon(1e-6));
  }
  SUBCASE("IxZ2c, l = 12: 57001190400 : -221760 : 4") {
    const FixedSpace fs = fixed_space(12, catalog_subgroup("IxZ2c"));
    REQUIRE(fs.dimension() == 1);
    CHECK(ratio(fs, 0, 10) == doctest::Approx(57001190400.0 / 4.0).epsilon(1e-6));
    CHECK(ratio(fs, 5, 10) == doctest::Approx(-221760.0 / 4.0).epsilon(1e-6));
  }
}

TEST_CASE("fixed vectors are invariant under every element") {
  for (const auto& name : catalog_names()) {
    const Subgroup g = catalog_subgroup(name);
    for (int l = 0; l <= 8; ++l) {
      const FixedSpace fs = fixed_space(l, g);
      for (const auto& G : g.sample_elements()) {
        const Eigen::MatrixXd T = rep_matrix(l, G);
        if (fs.dimension() > 0) CHECK((T * fs.basis - fs.basis).cwiseAbs().maxCoeff() < 1e-9);
      }
    }
  }
}

TEST_CASE("l = 1 fixed space vanishes except for O2_minus") {
  for (const auto& name : catalog_names()) {
    const int dim = fixed_space(1, catalog_subgroup(name)).dimension();
    if (name == "O2_minus") CHECK(dim == 1);
    else CHECK(dim == 0);
  }
  CHECK(fixed_space(0, catalog_subgroup("T")).dimension() == 1);
}

TEST_CASE("icosahedral degrees up to 12") {
  CHECK(fixed_degrees(12, catalog_subgroup("IxZ2c")) == std::vector<int>{0, 6, 10, 12});
}

TEST_CASE("direction assembly") {
  Constitutive c;
  const ModeData mode = mode_data(3, 0.54, c);
  const Direction d = bifurcation_direction(3, catalog_subgroup("D6d"), mode, 8);
  CHECK(d.z.u.max_abs() < 1e-15);
  CHECK(d.z.phi.normalized().norm() == doctest::Approx(1.0).epsilon(1e-12));
  // D6d fixes rho_{2,0} alone at l = 2; l = 6 is the first two-dimensional case
  CHECK(fixed_space(2, catalog_subgroup("D6d")).dimension() == 1);
  CHECK_THROWS_AS(bifurcation_direction(6, catalog_subgroup("D6d"), mode_data(6, 0.5, c), 8), DomainError);

  c.B = {1.0, 0.5, 0.3};
  const ModeData m4 = mode_data(4, 0.4, c);
  const Direction d4 = bifurcation_direction(4, catalog_subgroup("OxZ2c"), m4, 8);
  const double norm2 = d4.z.phi.normalized().squaredNorm() + d4.z.u.normalized().squaredNorm();
  CHECK(norm2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((d4.z.u - m4.tau * d4.z.phi).max_abs() < 1e-14);
}

TEST_CASE("linearization commutes with the representation") {
  Constitutive c;
  c.B = {1.0, 0.5, 0.3};
  c.E = {-0.2, 0.3, 0.25};
  const int L = 6;
  const Eigen::MatrixXd M = assemble_L(0.3, L, c);
  const auto n = static_cast<Eigen::Index>(harmonic_count(L));
  std::mt19937 rng(5);
  const GroupElement G = random_orthogonal(rng, true);
  const auto blocks = rep_blocks(L, G);
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(2 * n + 2, 2 * n + 2);
  for (int l = 0; l <= L; ++l) {
    const auto off = static_cast<Eigen::Index>(harmonic_offset(l, -l));
    R.block(off, off, 2 * l + 1, 2 * l + 1) = blocks[l];
    R.block(n + off, n + off, 2 * l + 1, 2 * l + 1) = blocks[l];
  }
  CHECK((R * M - M * R).cwiseAbs().maxCoeff() < 1e-8 * M.cwiseAbs().maxCoeff());
}

TEST_CASE("full residual is equivariant") {
  Constitutive c;
  c.epsilon = 0.02;
  c.pressure = 0.4;
  c.B = {1.0, 0.5, 0.3};
  c.E = {-0.2, 0.3, 0.25};
  const GridPtr grid = build_grid(24);
  std::mt19937 rng(6);
  std::uniform_real_distribution<double> u(-1, 1);
  ModelState s(24);
  for (int l = 0; l <= 3; ++l)
    for (int m = -l; m <= l; ++m) {
      const double scale = 0.05 / std::sqrt(harmonic_norm_sq(l, m) / (4 * M_PI));
      s.phi(l, m) = scale * u(rng);
      s.u(l, m) = scale * u(rng);
    }
  s.zeta = 0.1;
  s.xi = -0.05;
  const GroupElement G = random_orthogonal(rng, true);
  const ResidualValue r = full_residual(c, s, 0.2, grid);
  const ResidualValue rg = full_residual(c, act(G, s), 0.2, grid);
  const int band = 16;
  for (auto [a, b] : {std::pair{&r.r_phase, &rg.r_phase}, std::pair{&r.r_shape, &rg.r_shape}}) {
    const SpectralField expect = act(G, analyze(*a, band));
    const SpectralField got = analyze(*b, band);
    CHECK((expect - got).max_abs() < 1e-9 * std::max(1.0, got.max_abs()));
  }
  CHECK(rg.c_area == doctest::Approx(r.c_area).epsilon(1e-12));
  CHECK(rg.c_phase == doctest::Approx(r.c_phase).epsilon(1e-12));
}

TEST_CASE("reduced basis") {
  const Subgroup d6 = catalog_subgroup("D6d");
  const ReducedBasis b = reduce_basis(8, d6);
  CHECK(std::find(b.phi_degree.begin(), b.phi_degree.end(), 1) == b.phi_degree.end());
  CHECK(b.phi_degree.front() == 0);
  CHECK(b.phi.cols() == b.u.cols());

  const ReducedBasis pinned = reduce_basis(5, catalog_subgroup("O2_minus"), true);
  CHECK(pinned.u.cols() == pinned.phi.cols() - 1);
  CHECK(pinned.u_rows.cols() == pinned.phi.cols());

  // the residual of a symmetric state stays in the reduced space
  Constitutive c;
  c.B = {1.0, 0.5, 0.3};
  // 48 azimuthal nodes: the grid itself is D6d-invariant, so aliasing commutes with the group
  const GridPtr grid = build_grid(12);
  ReducedProblem prob(c, grid, b);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.n_unknowns());
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = u(rng);
  const ModelState s = prob.state(x);
  for (const auto& G : d6.elements) CHECK((act(G, s).phi - s.phi).max_abs() < 1e-12);
  const ResidualValue r = full_residual(c, s, 0.1, grid);
  const Eigen::VectorXd rp = analyze(r.r_phase, 8).normalized();
  const Eigen::VectorXd inside = b.phi * (b.phi.transpose() * rp);
  CHECK((rp - inside).cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, rp.cwiseAbs().maxCoeff()));
}

TEST_CASE("subgroup from json") {
  const nlohmann::json j = {{"name", "z2"}, {"generators", {{-1, 0, 0, 0, -1, 0, 0, 0, 1}}}};
  const Subgroup g = subgroup_from_json(j);
  CHECK(g.elements.size() == 2);
  const nlohmann::json bad = {{"generators", {{1, 1, 0, 0, 1, 0, 0, 0, 1}}}};
  CHECK_THROWS_AS(subgroup_from_json(bad), ConfigError);
}
