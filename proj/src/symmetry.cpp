#include "vesicle/symmetry.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

namespace vesicle {

namespace {

struct SamplingTables {
  GridPtr grid;
  Eigen::MatrixXd weighted_y;  // nodes x harmonics, Y(x_k) w_k
};

const SamplingTables& sampling_tables(int band) {
  static std::mutex mutex;
  static std::map<int, SamplingTables> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(band);
  if (it != cache.end()) return it->second;
  SamplingTables t;
  t.grid = build_grid(band + 1);
  const auto n = static_cast<Eigen::Index>(harmonic_count(band));
  t.weighted_y.resize(static_cast<Eigen::Index>(t.grid->size()), n);
  Eigen::VectorXd y(n);
  for (std::size_t k = 0; k < t.grid->size(); ++k) {
    normalized_harmonics(band, t.grid->point(k), std::span<double>(y.data(), y.size()));
    t.weighted_y.row(static_cast<Eigen::Index>(k)) = t.grid->weight(k) * y.transpose();
  }
  return cache.emplace(band, std::move(t)).first->second;
}

bool same_element(const GroupElement& a, const GroupElement& b) {
  return (a - b).cwiseAbs().maxCoeff() < 1e-9;
}

struct Closure {
  std::vector<GroupElement> elements;
  std::vector<int> parent;     // element = generators[gen] * elements[parent]
  std::vector<int> generator;
};

Closure close_with_words(const std::vector<GroupElement>& gens, std::size_t max_order) {
  Closure c;
  c.elements.push_back(GroupElement::Identity());
  c.parent.push_back(-1);
  c.generator.push_back(-1);
  for (std::size_t i = 0; i < c.elements.size(); ++i) {
    for (std::size_t k = 0; k < gens.size(); ++k) {
      const GroupElement p = gens[k] * c.elements[i];
      bool seen = false;
      for (const auto& e : c.elements)
        if (same_element(e, p)) {
          seen = true;
          break;
        }
      if (seen) continue;
      if (c.elements.size() >= max_order)
        throw DomainError("close_subgroup: more than " + std::to_string(max_order) +
                          " elements, group is probably not finite");
      c.elements.push_back(p);
      c.parent.push_back(static_cast<int>(i));
      c.generator.push_back(static_cast<int>(k));
    }
  }
  return c;
}

void check_orthogonal(const GroupElement& G) {
  if ((G.transpose() * G - GroupElement::Identity()).cwiseAbs().maxCoeff() > 1e-12)
    throw DomainError("group element is not orthogonal");
}

// reps[e] = degree-l block for element e of the closure
std::vector<Eigen::MatrixXd> closure_reps(const Closure& c, const std::vector<GroupElement>& gens,
                                          int l) {
  std::vector<Eigen::MatrixXd> gen_rep;
  for (const auto& g : gens) gen_rep.push_back(rep_matrix(l, g));
  std::vector<Eigen::MatrixXd> reps(c.elements.size());
  reps[0] = Eigen::MatrixXd::Identity(2 * l + 1, 2 * l + 1);
  for (std::size_t e = 1; e < reps.size(); ++e) reps[e] = gen_rep[c.generator[e]] * reps[c.parent[e]];
  return reps;
}

Eigen::VectorXd norms_block(int l) {
  const auto& norms = harmonic_norms(l);
  Eigen::VectorXd out(2 * l + 1);
  for (int m = -l; m <= l; ++m) out(m + l) = norms[harmonic_offset(l, m)];
  return out;
}

}  // namespace

GroupElement rotation(const Eigen::Vector3d& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

std::vector<Eigen::MatrixXd> rep_blocks(int band, const GroupElement& G) {
  check_orthogonal(G);
  const SamplingTables& t = sampling_tables(band);
  const auto n = static_cast<Eigen::Index>(harmonic_count(band));
  Eigen::MatrixXd rotated(static_cast<Eigen::Index>(t.grid->size()), n);
  Eigen::VectorXd y(n);
  for (std::size_t k = 0; k < t.grid->size(); ++k) {
    normalized_harmonics(band, G.transpose() * t.grid->point(k), std::span<double>(y.data(), y.size()));
    rotated.row(static_cast<Eigen::Index>(k)) = y.transpose();
  }
  std::vector<Eigen::MatrixXd> out;
  for (int l = 0; l <= band; ++l) {
    const auto off = static_cast<Eigen::Index>(harmonic_offset(l, -l));
    const Eigen::Index w = 2 * l + 1;
    Eigen::MatrixXd T = t.weighted_y.middleCols(off, w).transpose() * rotated.middleCols(off, w);
    for (Eigen::Index j = 0; j < w; ++j)
      if (std::abs(T.col(j).norm() - 1.0) > 1e-9)
        throw std::logic_error("rep_matrix: projection leaks outside the degree block");
    out.push_back(std::move(T));
  }
  return out;
}

Eigen::MatrixXd rep_matrix(int l, const GroupElement& G) {
  if (l < 0) throw DomainError("rep_matrix: negative degree");
  return rep_blocks(l, G)[l];
}

Eigen::MatrixXd rep_matrix_unnormalized(int l, const GroupElement& G) {
  const Eigen::VectorXd nrm = norms_block(l);
  return nrm.cwiseInverse().asDiagonal() * rep_matrix(l, G) * nrm.asDiagonal();
}

SpectralField act(const GroupElement& G, const SpectralField& f) {
  const int L = f.l_max();
  const auto blocks = rep_blocks(L, G);
  Eigen::VectorXd cn = f.normalized();
  for (int l = 0; l <= L; ++l) {
    const auto off = static_cast<Eigen::Index>(harmonic_offset(l, -l));
    cn.segment(off, 2 * l + 1) = blocks[l] * cn.segment(off, 2 * l + 1).eval();
  }
  return SpectralField::from_normalized(L, cn);
}

ModelState act(const GroupElement& G, const ModelState& s) {
  ModelState out = s;
  out.phi = act(G, s.phi);
  out.u = act(G, s.u);
  return out;
}

std::vector<GroupElement> close_subgroup(const std::vector<GroupElement>& generators,
                                         std::size_t max_order) {
  for (const auto& g : generators) check_orthogonal(g);
  return close_with_words(generators, max_order).elements;
}

std::vector<GroupElement> Subgroup::sample_elements() const {
  std::vector<GroupElement> out = elements;
  if (axial) {
    const std::size_t n = elements.size();
    for (double angle : {0.7, 2.1, 4.0})
      for (std::size_t k = 0; k < n; ++k)
        out.push_back(rotation(Eigen::Vector3d::UnitZ(), angle) * elements[k]);
  }
  return out;
}

Subgroup make_subgroup(std::string name, std::vector<GroupElement> generators, bool axial) {
  Subgroup g;
  g.name = std::move(name);
  g.generators = std::move(generators);
  g.axial = axial;
  if (axial)
    for (const auto& e : g.generators) {
      // the finite part must normalize the rotations about e3
      if ((e * Eigen::Vector3d::UnitZ()).cross(Eigen::Vector3d::UnitZ()).norm() > 1e-12)
        throw DomainError("axial subgroup generator does not preserve the e3 axis");
    }
  g.elements = close_subgroup(g.generators);
  return g;
}

std::vector<std::string> catalog_names() {
  return {"T", "O", "I", "D6d", "O_minus", "OxZ2c", "IxZ2c", "O2", "O2xZ2c", "O2_minus"};
}

Subgroup catalog_subgroup(const std::string& name) {
  GroupElement g1, g2, r4, flip_x, mirror_x, d1;
  g1 << 0, 1, 0, 0, 0, 1, 1, 0, 0;
  g2 = Eigen::Vector3d(-1, -1, 1).asDiagonal();
  r4 << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  flip_x = Eigen::Vector3d(1, -1, -1).asDiagonal();
  mirror_x = Eigen::Vector3d(-1, 1, 1).asDiagonal();
  const GroupElement minus = -GroupElement::Identity();
  const double c3 = std::cos(2 * M_PI / 3), s3 = std::sin(2 * M_PI / 3);
  d1 << c3, s3, 0, -s3, c3, 0, 0, 0, 1;
  const GroupElement i1 = rotation(Eigen::Vector3d::UnitZ(), 2 * M_PI / 5);
  const GroupElement i2 =
      rotation(Eigen::Vector3d(-2.0 / std::sqrt(5.0), 0.0, 1.0 / std::sqrt(5.0)), 2 * M_PI / 5);

  if (name == "T") return make_subgroup(name, {g1, g2});
  if (name == "O") return make_subgroup(name, {g1, g2, r4});
  if (name == "O_minus") return make_subgroup(name, {g1, g2, GroupElement(-r4)});
  if (name == "OxZ2c") return make_subgroup(name, {g1, g2, r4, minus});
  if (name == "I") return make_subgroup(name, {i1, i2});
  if (name == "IxZ2c") return make_subgroup(name, {i1, i2, minus});
  if (name == "D6d")
    return make_subgroup(name, {d1, flip_x, GroupElement(Eigen::Vector3d(1, 1, -1).asDiagonal())});
  if (name == "O2") return make_subgroup(name, {flip_x}, true);
  if (name == "O2xZ2c") return make_subgroup(name, {flip_x, minus}, true);
  if (name == "O2_minus") return make_subgroup(name, {mirror_x}, true);
  throw ConfigError("unknown subgroup: " + name);
}

Subgroup subgroup_from_json(const nlohmann::json& j) {
  try {
    std::vector<GroupElement> gens;
    for (const auto& row : j.at("generators")) {
      const auto v = row.get<std::vector<double>>();
      if (v.size() != 9) throw ConfigError("subgroup generator needs 9 entries");
      GroupElement g;
      g << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
      if ((g.transpose() * g - GroupElement::Identity()).cwiseAbs().maxCoeff() > 1e-9)
        throw ConfigError("subgroup generator is not orthogonal");
      // re-orthogonalize entries given to limited precision
      Eigen::JacobiSVD<GroupElement> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
      gens.push_back(svd.matrixU() * svd.matrixV().transpose());
    }
    return make_subgroup(j.value("name", std::string("custom")), std::move(gens), j.value("axial", false));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("subgroup file: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("subgroup file: ") + e.what());
  }
}

FixedSpace fixed_space(int l, const Subgroup& g) {
  const Closure c = close_with_words(g.generators, 400);
  const auto reps = closure_reps(c, g.generators, l);
  const Eigen::Index w = 2 * l + 1;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(w, w);
  for (const auto& r : reps) P += r;
  P /= static_cast<double>(reps.size());
  if (g.axial) {
    Eigen::MatrixXd m0 = Eigen::MatrixXd::Zero(w, w);
    m0(l, l) = 1.0;
    P = P * m0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (P + P.transpose()));
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < w; ++k)
    if (eig.eigenvalues()(k) > 1.0 - 1e-8) keep.push_back(k);
  FixedSpace out;
  out.l = l;
  out.subgroup = g.name;
  out.basis.resize(w, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) out.basis.col(k) = eig.eigenvectors().col(keep[k]);
  const Eigen::VectorXd nrm = norms_block(l);
  out.basis_unnormalized = nrm.cwiseInverse().asDiagonal() * out.basis;
  if (out.dimension() == 1) {
    // sign: largest unnormalized coefficient positive
    Eigen::Index at;
    out.basis_unnormalized.col(0).cwiseAbs().maxCoeff(&at);
    if (out.basis_unnormalized(at, 0) < 0) {
      out.basis *= -1.0;
      out.basis_unnormalized *= -1.0;
    }
  }
  return out;
}

Direction bifurcation_direction(int l, const Subgroup& g, const ModeData& mode, int l_max) {
  if (l > l_max) throw DomainError("bifurcation_direction: degree above l_max");
  Direction d;
  d.l = l;
  d.space = fixed_space(l, g);
  if (d.space.dimension() != 1)
    throw DomainError("bifurcation_direction: fixed space of " + g.name + " at l = " +
                      std::to_string(l) + " has dimension " + std::to_string(d.space.dimension()));
  d.tau = mode.tau;
  const double scale = 1.0 / std::sqrt(1.0 + d.tau * d.tau);
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(harmonic_count(l_max));
  phi.segment(harmonic_offset(l, -l), 2 * l + 1) = scale * d.space.basis.col(0);
  d.z = ModelState(l_max);
  d.z.phi = SpectralField::from_normalized(l_max, phi);
  d.z.u = SpectralField::from_normalized(l_max, d.tau * phi);
  d.rho_hat = scale * d.space.basis_unnormalized.col(0);
  return d;
}

std::vector<int> fixed_degrees(int l_max, const Subgroup& g) {
  std::vector<int> out;
  for (int l = 0; l <= l_max; ++l)
    if (fixed_space(l, g).dimension() > 0) out.push_back(l);
  return out;
}

ReducedBasis reduce_basis(int l_max, const Subgroup& g, bool pin_translation) {
  const auto n = static_cast<Eigen::Index>(harmonic_count(l_max));
  std::vector<Eigen::VectorXd> cols;
  std::vector<int> degree;
  for (int l = 0; l <= l_max; ++l) {
    const FixedSpace fs = fixed_space(l, g);
    for (Eigen::Index k = 0; k < fs.basis.cols(); ++k) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
      v.segment(harmonic_offset(l, -l), 2 * l + 1) = fs.basis.col(k);
      cols.push_back(std::move(v));
      degree.push_back(l);
    }
  }
  ReducedBasis b;
  b.l_max = l_max;
  b.label = g.name;
  b.phi.resize(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) b.phi.col(k) = cols[k];
  b.phi_degree = degree;
  b.u_rows = b.phi;
  std::vector<Eigen::Index> ucols;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (pin_translation && degree[k] == 1 && std::abs(cols[k](harmonic_offset(1, 0))) > 1e-12) continue;
    ucols.push_back(static_cast<Eigen::Index>(k));
    b.u_degree.push_back(degree[k]);
  }
  b.u.resize(n, static_cast<Eigen::Index>(ucols.size()));
  for (std::size_t k = 0; k < ucols.size(); ++k) b.u.col(k) = b.phi.col(ucols[k]);
  return b;
}

}  // namespace vesicle
