#pragma once

#include <cdsolve/pdcd.hpp>

namespace cdsolve {

// Unique positive root of t^3 + t^2 + theta^2 t - theta^2 (has_h) or t^2 + theta^2 t - theta^2.
double theta_next(double theta, bool has_h);

/*
 * Iterate of the accelerated smoothed coordinate descent. The primal point
 * is x = c * x_hat + x_tilde; products of both parts with Af, Q and Ah are
 * cached so that a block update costs the nonzeros of its columns.
 */
struct AccelState {
    std::vector<double> x_hat, x_tilde;
    std::vector<double> y_dot;
    double theta0 = 1.;
    double theta = 1.;
    double c = 1.;
    double c_last = 1.;
    double gamma1 = 1.;
    double gamma = 1.;
    std::uint64_t restarts = 0;

    std::vector<double> beta;    // coordinate Lipschitz constants of grad F
    std::vector<double> h_norm;  // rho((Ah_{:,i})^T Ah_{:,i})

    // Af x_hat, Af x_tilde - bf, Q x_hat, Q x_tilde, Ah x_hat, Ah x_tilde
    std::vector<double> af_hat, af_tilde, q_hat, q_tilde, ah_hat, ah_tilde;

    AccelState() = default;
    AccelState(const Problem& pb, double gamma1_opt = 0.);

    double B(index_t i) const { return beta[i] + h_norm[i] / gamma; }
    std::vector<double> combined() const;
};

void rebuild_caches(AccelState& as, const Problem& pb);

struct AccelWorkspace {
    explicit AccelWorkspace(const Problem& pb);
    GradientWorkspace grad_ws;
    std::vector<double> grad, u, xbar, ybar, delta;
    std::vector<index_t> block_offset;
};

// Full smoothed dual point prox_{H^*/gamma}(y_dot + (c Ah x_hat + Ah x_tilde)/gamma).
std::vector<double> accel_dual(const AccelState& as, const Problem& pb);

// One update of the accelerated loop on block i.
void accel_update_block(AccelState& as, index_t i, const Problem& pb, AccelWorkspace& ws);
index_t accel_iterate(AccelState& as, const BlockSampler& sampler, Rng& rng, const Problem& pb, AccelWorkspace& ws);

// Collapse to x_tilde + c x_hat, anchor y_dot at y_bar, reset c, theta and gamma.
void restart(AccelState& as, const Problem& pb, std::vector<double> y_bar = {});

// Fix block i at value (used by screening).
void accel_fix_block(AccelState& as, index_t i, std::span<const double> value, const Problem& pb);

Result run_accel(const Problem& pb, const SolveOptions& opts);

}  // namespace cdsolve
