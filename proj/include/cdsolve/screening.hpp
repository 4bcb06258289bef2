#pragma once

#include <cdsolve/problem.hpp>

#include <span>
#include <vector>

namespace cdsolve {

class BlockSampler;
struct SolverState;

/*
 * Gap Safe screening for problems without h.
 *
 * The dual of min 1/2 x^T Q x + f(Af x) + G(x) is
 *   max_{zeta, omega} -f^*(zeta) - 1/2 omega^T Q^+ omega - G^*(-Af^T zeta - omega)
 * which is (1/L)-strongly concave with L = max(max_j cf_j L_j, rho(Q)). Any
 * dual feasible point at duality gap Gap is therefore within sqrt(2 L Gap)
 * of the dual optimum, and a block is fixed at a kink x_hat when every point
 * of that ball certifies -(Af^T zeta + omega)_i in the interior of
 * the subdifferential of G_i at x_hat.
 */
struct ScreeningContext {
    double L_fQ = 0.;
    std::vector<double> op_bound;  // norm of (zeta, omega) -> (Af^T zeta + omega)_i
    std::vector<char> active;

    // last evaluation
    double scale = 1.;
    double gap = kInf;
    double radius = kInf;
};

ScreeningContext make_screening_context(const Problem& pb);

struct DualCenter {
    std::vector<double> zeta;
    std::vector<double> omega;
    double scale = 1.;
};

// (zeta, omega) = (grad f(Af x), Q x) divided by the scaling that makes them dual feasible.
DualCenter dual_scaling_center(std::span<const double> x, const Problem& pb);

// Duality gap at x and the center; the Q^+ term is computed as x^T Q x / (2 scale^2).
double gap_value(std::span<const double> x, const DualCenter& center, const Problem& pb);

// Polar of the support function of the subdifferential of g at the kink p, evaluated at u.
double polar_support(PolarKind kind, std::span<const double> p, std::span<const double> u);

// True when sigma° < 1 on the whole ball of the given radius around u (interior
// of the subdifferential for the orthant kind).
bool polar_ball_test(PolarKind kind, std::span<const double> p, std::span<const double> u, double radius);

struct ScreenedBlock {
    index_t block;
    std::vector<double> value;
};

// Runs the test on every active block, marks passing blocks inactive and
// returns them with the value they are fixed at. x is not modified.
std::vector<ScreenedBlock> screening_test(ScreeningContext& ctx, std::span<const double> x, const Problem& pb);

// screening_test followed by fixing the blocks in the state and in the sampler.
std::vector<index_t> screen(ScreeningContext& ctx, SolverState& st, const Problem& pb, BlockSampler& sampler);

}  // namespace cdsolve
