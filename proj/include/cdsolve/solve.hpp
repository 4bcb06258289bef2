#pragma once

#include <cdsolve/accel.hpp>
#include <cdsolve/options.hpp>
#include <cdsolve/pdcd.hpp>

namespace cdsolve {

// Runs the algorithm selected in opts.
Result solve(const Problem& pb, const SolveOptions& opts = {});

}  // namespace cdsolve
