#pragma once

#include <cdsolve/accel.hpp>
#include <cdsolve/atoms.hpp>
#include <cdsolve/blockops.hpp>
#include <cdsolve/diagnostics.hpp>
#include <cdsolve/io.hpp>
#include <cdsolve/linalg.hpp>
#include <cdsolve/options.hpp>
#include <cdsolve/pdcd.hpp>
#include <cdsolve/problem.hpp>
#include <cdsolve/screening.hpp>
#include <cdsolve/solve.hpp>
#include <cdsolve/sparse.hpp>
#include <cdsolve/spec_file.hpp>
#include <cdsolve/state.hpp>
