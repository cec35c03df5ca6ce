#pragma once

#include <memory>
#include <string>

#include "nbplan/lp.hpp"

namespace nbplan::lp {

std::unique_ptr<SolverBackend> make_simplex_backend();

/// Returns nullptr when the HiGHS library cannot be loaded.
std::unique_ptr<SolverBackend> make_highs_backend();

/// Library path tried for the HiGHS backend: $NBPLAN_HIGHS_LIBRARY, then the
/// path found at configure time, then the default soname.
std::string highs_library_path();

}  // namespace nbplan::lp
