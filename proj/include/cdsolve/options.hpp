#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cdsolve {

enum class Algorithm { Pdcd, SmartCd };
enum class SamplingKind { Uniform, KinkHalf };

std::optional<Algorithm> parse_algorithm(std::string_view s);
std::optional<SamplingKind> parse_sampling(std::string_view s);
std::string_view to_string(Algorithm a);
std::string_view to_string(SamplingKind s);

// Restart(k) predicate of the accelerated loop, k counted in iterations from the start.
struct RestartPolicy {
    enum class Kind { FixedPeriod, Doubling };
    Kind kind = Kind::Doubling;
    // Period (fixed) or initial period (doubling); 0 selects 2 * number of blocks.
    std::uint64_t period = 0;

    // True when a restart happens right after iteration k (1-based count of
    // completed iterations). With doubling and initial period p the
    // restarts fall at p, 3p, 7p, ...
    bool due(std::uint64_t k, std::uint64_t n_blocks) const;
};

struct SolveOptions {
    Algorithm algo = Algorithm::Pdcd;
    // Budget in epochs; one epoch is as many block updates as there are blocks.
    std::uint64_t max_iter = 1000;
    double max_time = std::numeric_limits<double>::infinity();  // seconds
    // Stop once the smoothed gap and both of its smoothing parameters are below this.
    double tolerance = 1e-6;
    // Epochs between diagnostics evaluations (trace records and stopping test).
    std::uint64_t print_period = 10;
    SamplingKind sampling = SamplingKind::Uniform;
    std::uint64_t seed = 0;
    double safety = 0.95;
    std::optional<std::vector<double>> sigma;
    // Block updates between from-scratch residual recomputations; 0 selects 10 * blocks.
    std::uint64_t refresh_period = 0;
    // Block updates between kink detections for kink_half; 0 selects the number of blocks.
    std::uint64_t kink_refresh_period = 0;
    bool screening = false;
    std::uint64_t screening_period = 10;  // epochs
    // Initial smoothing of the accelerated loop; 0 selects the largest column norm of Ah.
    double gamma1 = 0.;
    RestartPolicy restart;
    bool bypass_square = true;
    bool verbose = false;
};

}  // namespace cdsolve
