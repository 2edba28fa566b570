#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "vesicle/harmonics.hpp"
#include "vesicle/linear.hpp"
#include "vesicle/model.hpp"
#include "vesicle/residual.hpp"

namespace vesicle {

using GroupElement = Eigen::Matrix3d;

/// Degree-l block of the action f -> f(G^T x) on orthonormal coefficients.
Eigen::MatrixXd rep_matrix(int l, const GroupElement& G);
/// Same block in the unnormalized coefficients of SpectralField.
Eigen::MatrixXd rep_matrix_unnormalized(int l, const GroupElement& G);
/// Blocks for every degree up to band, from one sampling pass.
std::vector<Eigen::MatrixXd> rep_blocks(int band, const GroupElement& G);

SpectralField act(const GroupElement& G, const SpectralField& f);
ModelState act(const GroupElement& G, const ModelState& s);

/// Closure of a finite generating set; throws DomainError beyond max_order elements.
std::vector<GroupElement> close_subgroup(const std::vector<GroupElement>& generators,
                                         std::size_t max_order = 400);

/// A subgroup of O(3). Axial groups contain every rotation about e3 and are stored as
/// SO(2) together with the finite group generated by `generators`.
struct Subgroup {
  std::string name;
  std::vector<GroupElement> generators;
  bool axial = false;
  std::vector<GroupElement> elements;  // closure of the generators

  /// Elements to test invariance with (for axial groups a few sampled rotations are added).
  std::vector<GroupElement> sample_elements() const;
};

Subgroup make_subgroup(std::string name, std::vector<GroupElement> generators, bool axial = false);
/// Names: T, O, I, D6d, O_minus, OxZ2c, IxZ2c, O2, O2xZ2c, O2_minus.
Subgroup catalog_subgroup(const std::string& name);
std::vector<std::string> catalog_names();
/// {"name": ..., "axial": bool, "generators": [[9 row-major entries], ...]}
Subgroup subgroup_from_json(const nlohmann::json& j);

struct FixedSpace {
  int l = 0;
  std::string subgroup;
  Eigen::MatrixXd basis;               // orthonormal columns, normalized convention
  Eigen::MatrixXd basis_unnormalized;  // same columns converted to SpectralField coefficients
  int dimension() const { return static_cast<int>(basis.cols()); }
};

FixedSpace fixed_space(int l, const Subgroup& g);

struct Direction {
  int l = 0;
  FixedSpace space;
  Eigen::VectorXd rho_hat;  // unnormalized coefficients of the fixed harmonic, index m + l
  ModelState z;             // (rho_hat, tau rho_hat, 0, 0), unit norm in normalized coefficients
  double tau = 0.0;
};

/// Throws DomainError when the fixed space is not one-dimensional.
Direction bifurcation_direction(int l, const Subgroup& g, const ModeData& mode, int l_max);

/// Symmetry-adapted basis up to l_max. With pin_translation the u-unknown on Y_{1,0}
/// is dropped while its shape row is kept.
ReducedBasis reduce_basis(int l_max, const Subgroup& g, bool pin_translation = false);
/// Degrees with a nonzero fixed space.
std::vector<int> fixed_degrees(int l_max, const Subgroup& g);

GroupElement rotation(const Eigen::Vector3d& axis, double angle);

}  // namespace vesicle
