#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vesicle/io.hpp"
#include "vesicle/residual.hpp"

namespace vesicle {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct SelfCheckOptions {
  /// Builds the residual evaluator on a grid; empty means default_residual.
  std::function<ResidualFn(const GridPtr&)> evaluator;
  int frozen_trials = 10;
};

/// Cross-module invariant suite: trivial residual, Gauss-Bonnet, equivariance,
/// linearization against finite differences, fixed-space table, frozen-u probe and a
/// resolution guard for the requested degrees.
std::vector<CheckResult> run_selfcheck(const RunConfig& cfg, const SelfCheckOptions& opt = {});

/// Residual with the sign of the tension term in the shape equation flipped.
ResidualFn corrupted_tension_residual(const GridPtr& grid);

}  // namespace vesicle
