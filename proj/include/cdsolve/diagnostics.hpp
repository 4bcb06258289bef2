#pragma once

#include <cdsolve/problem.hpp>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace cdsolve {

// Full objective; +inf when an indicator is violated.
double primal_objective(std::span<const double> x, const Problem& pb);

// Euclidean distance from Ah x - bh to dom H; 0 when h is absent.
double infeasibility(std::span<const double> x, const Problem& pb);

/*
 * Smoothed gap G_{beta,gamma}(x, y, zeta, omega). y has the size of the rows
 * of Ah, zeta the rows of Af, omega has size N. beta or gamma equal to 0
 * selects the unsmoothed value of the corresponding part.
 */
double smoothed_gap(std::span<const double> x, std::span<const double> y, std::span<const double> zeta,
                    std::span<const double> omega, const Problem& pb, double beta, double gamma);

// zeta = grad of the f part at Af x, omega = Q x.
void default_dual_pair(std::span<const double> x, const Problem& pb, std::vector<double>& zeta,
                       std::vector<double>& omega);

// max(1, max_i gauge of dom G_i^* at v_i), over the blocks whose gauge is known and finite.
double dual_scaling_factor(std::span<const double> v, const Problem& pb);

// (1/2) omega^T Q^+ omega by conjugate gradients; omega must lie in the range of Q.
// Without Q the value is 0 for omega = 0 and +inf otherwise.
double half_pinv_quadratic(std::span<const double> omega, const Problem& pb);

struct GapReport {
    double objective = 0.;
    double gap = 0.;
    double beta = 0.;
    double gamma = 0.;
    double infeasibility = 0.;
};

// Gap with the default (zeta, omega) and the distance rule for beta and gamma.
GapReport evaluate_gap(std::span<const double> x, std::span<const double> y, const Problem& pb);

struct TraceRecord {
    double epoch = 0.;
    double elapsed = 0.;
    double objective = 0.;
    double gap = 0.;
    double beta = 0.;
    double gamma = 0.;
    double infeasibility = 0.;
    std::uint64_t screened = 0;
};

struct Trace {
    std::vector<TraceRecord> records;

    static constexpr const char* kColumns = "epoch,elapsed,objective,gap,beta,gamma,infeasibility,screened";

    void write_csv(std::ostream& os) const;
    void write_json(std::ostream& os) const;
};

}  // namespace cdsolve
