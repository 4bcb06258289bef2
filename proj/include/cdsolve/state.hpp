#pragma once

#include <cdsolve/problem.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace cdsolve {

/*
 * Scratch space for block partial derivatives of
 *   F(x) = 1/2 x^T Q x + sum_j cf_j f_j(Af_j x - bf_j).
 * Gradients of multi-dimensional f blocks are computed once per call and
 * memoized with a stamp.
 */
class GradientWorkspace {
public:
    explicit GradientWorkspace(const Problem& pb);

    // Set to false to route the square atom through its generic kernel.
    bool bypass_square = true;

    template <class ResidF, class QAt>
    void block_gradient(const Problem& pb, index_t i, ResidF&& resid_f, QAt&& q_at, std::span<double> out);

private:
    std::vector<double> fgrad_;
    std::vector<double> fin_;
    std::vector<std::uint64_t> stamp_;
    std::vector<char> is_square_;
    std::uint64_t tick_ = 0;
};

/*
 * Primal-dual iterate of the coordinate-descent loop with incrementally
 * maintained residuals:
 *   r_f = Af x - bf,   r_Q = Q x,   r_h = Ah x   (bh is applied by consumers)
 *   z^(l) = (1/m_l) sum_{i in I(l)} y^(l)(i)
 *   w^(i) = sum_{l in J(i)} (Ah_{l,i})^T y^(l)(i)
 */
struct SolverState {
    std::vector<double> x;
    std::vector<double> y_dup;
    std::vector<double> w;
    std::vector<double> z;
    std::vector<double> r_f;
    std::vector<double> r_Q;
    std::vector<double> r_h;

    // Residual entries written by apply_primal_update since construction.
    std::uint64_t touched = 0;

    // scratch for apply_dual_update
    std::vector<double> dual_delta;
    std::vector<index_t> block_offset;

    SolverState() = default;
    explicit SolverState(const Problem& pb);
    SolverState(const Problem& pb, std::vector<double> x0, std::vector<double> y0);
};

// grad_i F(x) from the maintained residuals, written into out (size N_i).
void partial_gradient(const SolverState& st, index_t i, const Problem& pb, GradientWorkspace& ws,
                      std::span<double> out);
std::vector<double> partial_gradient(const SolverState& st, index_t i, const Problem& pb);

// Replace x^(i) and propagate the change to r_f, r_Q and r_h.
void apply_primal_update(SolverState& st, index_t i, std::span<const double> x_new_i, const Problem& pb);

// Overwrite y^(l)(i) for every l in J(i) with y_bar (segments concatenated in
// J(i) order) and update w^(i) and z accordingly.
void apply_dual_update(SolverState& st, index_t i, std::span<const double> y_bar, const Problem& pb);

// Recompute residuals and aggregates from x and y_dup; returns the largest
// absolute correction applied.
double refresh_residuals(SolverState& st, const Problem& pb);

// From-scratch values, used by refresh and by tests.
void compute_residuals(const Problem& pb, std::span<const double> x, std::vector<double>& r_f,
                       std::vector<double>& r_Q, std::vector<double>& r_h);
void compute_dual_aggregates(const Problem& pb, std::span<const double> y_dup, std::vector<double>& w,
                             std::vector<double>& z);

// ---------------------------------------------------------------------------

template <class ResidF, class QAt>
void GradientWorkspace::block_gradient(const Problem& pb, index_t i, ResidF&& resid_f, QAt&& q_at,
                                       std::span<double> out)
{
    const index_t first = pb.blocks.begin(i);
    const index_t last = pb.blocks.end(i);
    if (pb.Q) {
        for (index_t c = first; c < last; ++c) out[c - first] = q_at(c);
    } else {
        for (index_t c = first; c < last; ++c) out[c - first] = 0.;
    }
    if (pb.f.empty()) return;
    ++tick_;
    const auto col_ptr = pb.Af.col_ptr();
    const auto row_idx = pb.Af.row_idx();
    const auto vals = pb.Af.values();
    for (index_t c = first; c < last; ++c) {
        double acc = 0.;
        for (index_t k = col_ptr[c]; k < col_ptr[c + 1]; ++k) {
            const index_t r = row_idx[k];
            const index_t j = pb.inv_blocks_f[r];
            double gr;
            if (bypass_square && is_square_[j]) {
                gr = 2. * resid_f(r);
            } else {
                if (stamp_[j] != tick_) {
                    stamp_[j] = tick_;
                    const index_t b0 = pb.blocks_f.begin(j), b1 = pb.blocks_f.end(j);
                    for (index_t rr = b0; rr < b1; ++rr) fin_[rr - b0] = resid_f(rr);
                    pb.f[j]->kernel(std::span<const double>(fin_.data(), b1 - b0),
                                    std::span<double>(fgrad_.data() + b0, b1 - b0), Mode::Grad, 1., 1.);
                }
                gr = fgrad_[r];
            }
            acc += pb.cf[j] * vals[k] * gr;
        }
        out[c - first] += acc;
    }
}

}  // namespace cdsolve
