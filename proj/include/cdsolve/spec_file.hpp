#pragma once

#include <cdsolve/options.hpp>
#include <cdsolve/problem.hpp>

#include <stdexcept>
#include <string>

namespace cdsolve {

// Schema violation in a problem specification file; the message names the file and key.
class SpecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ProblemSpec {
    ProblemInputs inputs;
    SolveOptions options;
};

/*
 * Reads a JSON problem specification. Matrix and vector entries may be
 * inline values or file names relative to the specification file. See
 * README.md for the schema.
 */
ProblemSpec load_spec(const std::string& path);
ProblemSpec parse_spec(const std::string& text, const std::string& base_dir, const std::string& origin = "<spec>");

Problem load_problem(const std::string& path);

}  // namespace cdsolve
