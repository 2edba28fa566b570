#pragma once

#include <ostream>

namespace vesicle {

/// Verbs: roots, mode-table, direction, nodal-export, residual-check, continue, selfcheck.
/// Returns 0 on success, 1 on a computation failure, 2 on a configuration error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vesicle
