#include <cdsolve/solve.hpp>

namespace cdsolve {

std::optional<Algorithm> parse_algorithm(std::string_view s)
{
    if (s == "pdcd") return Algorithm::Pdcd;
    if (s == "smartcd") return Algorithm::SmartCd;
    return std::nullopt;
}

std::optional<SamplingKind> parse_sampling(std::string_view s)
{
    if (s == "uniform") return SamplingKind::Uniform;
    if (s == "kink_half") return SamplingKind::KinkHalf;
    return std::nullopt;
}

std::string_view to_string(Algorithm a) { return a == Algorithm::Pdcd ? "pdcd" : "smartcd"; }

std::string_view to_string(SamplingKind s) { return s == SamplingKind::Uniform ? "uniform" : "kink_half"; }

Result solve(const Problem& pb, const SolveOptions& opts)
{
    Result res = opts.algo == Algorithm::Pdcd ? run_pdcd(pb, opts) : run_accel(pb, opts);
    res.warnings.insert(res.warnings.begin(), pb.warnings.begin(), pb.warnings.end());
    return res;
}

}  // namespace cdsolve
