#include <cdsolve/cdsolve.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNotConverged = 1;
constexpr int kExitInput = 2;

bool ends_with(const std::string& s, const std::string& suffix)
{
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void describe(const cdsolve::Problem& pb, std::ostream& os)
{
    const auto nnz = pb.Af.nnz() + pb.Ah.nnz() + (pb.Q ? pb.Q->nnz() : 0);
    os << "N " << pb.N << '\n'
       << "I " << pb.num_blocks() << '\n'
       << "J " << pb.f.size() << '\n'
       << "L " << pb.h.size() << '\n'
       << "rows_f " << pb.rows_f() << '\n'
       << "rows_h " << pb.rows_h() << '\n'
       << "nnz " << nnz << '\n'
       << "nnz_Af " << pb.Af.nnz() << '\n'
       << "nnz_Ah " << pb.Ah.nnz() << '\n'
       << "nnz_Q " << (pb.Q ? pb.Q->nnz() : 0) << '\n'
       << "duplication " << pb.dup.total << '\n';
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Coordinate descent solver for structured nonsmooth convex problems"};
    app.require_subcommand(1);

    std::string spec_path;
    auto* solve_cmd = app.add_subcommand("solve", "Solve the problem described by a specification file");
    solve_cmd->add_option("spec", spec_path, "Problem specification (JSON)")->required();
    std::string algo, sampling, screening, trace_path, solution_path;
    std::optional<double> tol, max_time;
    std::optional<std::uint64_t> max_iter, seed;
    bool verbose = false;
    solve_cmd->add_option("--algo", algo, "pdcd or smartcd")->check(CLI::IsMember({"pdcd", "smartcd"}));
    solve_cmd->add_option("--tol", tol, "Stopping tolerance on the smoothed gap");
    solve_cmd->add_option("--max-iter", max_iter, "Maximum number of epochs");
    solve_cmd->add_option("--max-time", max_time, "Time budget in seconds");
    solve_cmd->add_option("--sampling", sampling, "uniform or kink_half")->check(CLI::IsMember({"uniform", "kink_half"}));
    solve_cmd->add_option("--screening", screening, "on or off")->check(CLI::IsMember({"on", "off"}));
    solve_cmd->add_option("--seed", seed, "Random seed");
    solve_cmd->add_option("--trace", trace_path, "Write the trace (.csv or .json)");
    solve_cmd->add_option("--solution", solution_path, "Write the solution, one value per line");
    solve_cmd->add_flag("-v,--verbose", verbose, "Print progress to stderr");

    auto* validate_cmd = app.add_subcommand("validate", "Check a specification file");
    validate_cmd->add_option("spec", spec_path, "Problem specification (JSON)")->required();

    auto* describe_cmd = app.add_subcommand("describe", "Print problem statistics");
    describe_cmd->add_option("spec", spec_path, "Problem specification (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    if (const char* threads = std::getenv("CD_SOLVER_THREADS")) {
        if (std::string(threads) != "1") {
            std::cerr << "error: CD_SOLVER_THREADS must be 1\n";
            return kExitInput;
        }
    }

    cdsolve::ProblemSpec spec;
    cdsolve::Problem pb;
    try {
        spec = cdsolve::load_spec(spec_path);
        pb = cdsolve::build_problem(spec.inputs);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    for (const auto& w : pb.warnings) std::cerr << "warning: " << w << '\n';

    if (*validate_cmd) {
        std::cout << "ok\n";
        return kExitOk;
    }
    if (*describe_cmd) {
        describe(pb, std::cout);
        return kExitOk;
    }

    auto opts = spec.options;
    if (!algo.empty()) opts.algo = *cdsolve::parse_algorithm(algo);
    if (!sampling.empty()) opts.sampling = *cdsolve::parse_sampling(sampling);
    if (!screening.empty()) opts.screening = screening == "on";
    if (tol) opts.tolerance = *tol;
    if (max_iter) opts.max_iter = *max_iter;
    if (max_time) opts.max_time = *max_time;
    if (seed) opts.seed = *seed;
    opts.verbose = opts.verbose || verbose;

    cdsolve::Result res;
    try {
        res = cdsolve::solve(pb, opts);
    } catch (const cdsolve::SolverError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNotConverged;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    for (const auto& w : res.warnings)
        if (std::find(pb.warnings.begin(), pb.warnings.end(), w) == pb.warnings.end())
            std::cerr << "warning: " << w << '\n';

    try {
        if (!solution_path.empty()) {
            cdsolve::write_vector(solution_path, res.x);
        } else {
            cdsolve::write_vector(std::cout, res.x);
        }
        if (!trace_path.empty()) {
            std::ofstream out(trace_path);
            if (!out) throw cdsolve::IoError(trace_path + ": cannot open file for writing");
            if (ends_with(trace_path, ".json")) {
                res.trace.write_json(out);
            } else {
                res.trace.write_csv(out);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }

    const auto& last = res.trace.records.back();
    std::cerr << "status " << cdsolve::to_string(res.status) << "  iterations " << res.iterations << "  objective "
              << last.objective << "  gap " << last.gap << '\n';
    return res.status == cdsolve::Status::Converged ? kExitOk : kExitNotConverged;
}
