#pragma once

#include <cdsolve/diagnostics.hpp>
#include <cdsolve/options.hpp>
#include <cdsolve/problem.hpp>
#include <cdsolve/state.hpp>

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdsolve {

using Rng = std::mt19937_64;

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StepSizes {
    std::vector<double> tau;    // per primal block
    std::vector<double> sigma;  // per h-block
    std::vector<double> beta;   // coordinate Lipschitz constants of grad F
};

// beta_i = rho(Q_ii + sum_j cf_j L_j (Af_ji)^T Af_ji), an upper bound on the
// Lipschitz constant of grad_i F along block i.
std::vector<double> compute_beta(const Problem& pb);

// rho(sum_{l in J(i)} m_l sigma_l (Ah_li)^T Ah_li) for every block i.
std::vector<double> dual_coupling_radius(const Problem& pb, std::span<const double> sigma);

StepSizes compute_step_sizes(const Problem& pb, double safety = 0.95,
                             const std::optional<std::vector<double>>& sigma = std::nullopt);

/*
 * Block sampling law. Uniform over active blocks, or kink_half: with k
 * kinks among n active blocks each kink has probability 1/(2n) and each
 * other block 1/(2n) + 1/(2(n-k)). All-kink and kink-free sets fall back to
 * uniform.
 */
class BlockSampler {
public:
    BlockSampler(SamplingKind kind, index_t n_blocks);

    index_t sample(Rng& rng) const;
    void set_kinks(const std::vector<char>& kink_flags);
    void deactivate(index_t i);

    double probability(index_t i) const;
    index_t active_count() const { return n_active_; }
    bool is_active(index_t i) const { return active_[i] != 0; }
    SamplingKind kind() const { return kind_; }

private:
    void rebuild();

    SamplingKind kind_;
    std::vector<char> active_;
    std::vector<char> kink_;
    std::vector<index_t> all_;
    std::vector<index_t> kinks_;
    std::vector<index_t> others_;
    index_t n_active_ = 0;
};

index_t sample_block(const BlockSampler& sampler, Rng& rng);

// IS_KINK of g_i at Dg_i x^(i) - bg_i for every block.
std::vector<char> detect_kinks(const Problem& pb, std::span<const double> x);

struct PdcdWorkspace {
    explicit PdcdWorkspace(const Problem& pb);
    GradientWorkspace grad_ws;
    std::vector<double> grad, u, xbar, ybar, aty;
    std::vector<index_t> block_offset;
};

// One primal-dual update on block i.
void pdcd_update_block(SolverState& st, const StepSizes& steps, index_t i, const Problem& pb, PdcdWorkspace& ws);

// Draw a block and update it; returns the block.
index_t pdcd_iterate(SolverState& st, const StepSizes& steps, const BlockSampler& sampler, Rng& rng,
                     const Problem& pb, PdcdWorkspace& ws);

enum class Status { Converged, MaxIterations, MaxTime };
std::string_view to_string(Status s);

struct Result {
    std::vector<double> x;
    std::vector<double> y;      // dual estimate, one entry per row of Ah
    std::vector<double> y_dup;  // duplicated duals (pdcd only)
    Trace trace;
    Status status = Status::MaxIterations;
    std::uint64_t iterations = 0;
    std::uint64_t screened = 0;
    std::vector<index_t> screened_blocks;  // in the order they were fixed
    std::vector<std::string> warnings;
};

Result run_pdcd(const Problem& pb, const SolveOptions& opts);

}  // namespace cdsolve
