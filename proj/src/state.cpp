#include <cdsolve/state.hpp>

#include <algorithm>
#include <cmath>

namespace cdsolve {

GradientWorkspace::GradientWorkspace(const Problem& pb)
    : fgrad_(pb.rows_f(), 0.),
      fin_(pb.blocks_f.max_size(), 0.),
      stamp_(pb.f.size(), 0),
      is_square_(pb.f.size(), 0)
{
    const Atom* sq = catalog_find("square");
    for (std::size_t j = 0; j < pb.f.size(); ++j) is_square_[j] = pb.f[j] == sq ? 1 : 0;
}

SolverState::SolverState(const Problem& pb) : SolverState(pb, pb.x_init, pb.y_init) {}

SolverState::SolverState(const Problem& pb, std::vector<double> x0, std::vector<double> y0)
    : x(std::move(x0)), y_dup(std::move(y0))
{
    if (x.size() != pb.N) throw std::invalid_argument("initial x has the wrong length");
    if (y_dup.empty()) y_dup.assign(pb.dup.total, 0.);
    if (y_dup.size() != pb.dup.total) throw std::invalid_argument("initial duplicated dual has the wrong length");
    compute_residuals(pb, x, r_f, r_Q, r_h);
    compute_dual_aggregates(pb, y_dup, w, z);
}

void compute_residuals(const Problem& pb, std::span<const double> x, std::vector<double>& r_f,
                       std::vector<double>& r_Q, std::vector<double>& r_h)
{
    r_f.assign(pb.rows_f(), 0.);
    pb.Af.multiply(x, r_f);
    for (index_t r = 0; r < r_f.size(); ++r) r_f[r] -= pb.bf[r];
    r_Q.assign(pb.N, 0.);
    if (pb.Q) pb.Q->multiply(x, r_Q);
    r_h.assign(pb.rows_h(), 0.);
    pb.Ah.multiply(x, r_h);
}

void compute_dual_aggregates(const Problem& pb, std::span<const double> y_dup, std::vector<double>& w,
                             std::vector<double>& z)
{
    const auto& dup = pb.dup;
    w.assign(pb.N, 0.);
    z.assign(pb.rows_h(), 0.);
    for (index_t l = 0; l < pb.blocks_h.count(); ++l) {
        if (dup.m[l] == 0) continue;
        const index_t r0 = pb.blocks_h.begin(l), r1 = pb.blocks_h.end(l);
        for (index_t seg : dup.primal_segments_of(l))
            for (index_t r = r0; r < r1; ++r) z[r] += y_dup[seg + r - r0];
        const double inv_m = 1. / static_cast<double>(dup.m[l]);
        for (index_t r = r0; r < r1; ++r) z[r] *= inv_m;
    }
    // w^(i) = sum_{l in J(i)} (Ah_{l,i})^T y^(l)(i)
    std::vector<index_t> seg_of(pb.blocks_h.count(), 0);
    for (index_t i = 0; i < pb.num_blocks(); ++i) {
        const auto J = dup.blocks_of(i);
        const auto segs = dup.segments_of(i);
        for (std::size_t k = 0; k < J.size(); ++k) seg_of[J[k]] = segs[k];
        for (index_t c = pb.blocks.begin(i); c < pb.blocks.end(i); ++c) {
            double s = 0.;
            for (index_t k = pb.Ah.col_begin(c); k < pb.Ah.col_end(c); ++k) {
                const index_t r = pb.Ah.row_idx()[k];
                const index_t l = pb.inv_blocks_h[r];
                s += pb.Ah.values()[k] * y_dup[seg_of[l] + r - pb.blocks_h.begin(l)];
            }
            w[c] = s;
        }
    }
}

void partial_gradient(const SolverState& st, index_t i, const Problem& pb, GradientWorkspace& ws,
                      std::span<double> out)
{
    ws.block_gradient(
        pb, i, [&](index_t r) { return st.r_f[r]; }, [&](index_t c) { return st.r_Q[c]; }, out);
}

std::vector<double> partial_gradient(const SolverState& st, index_t i, const Problem& pb)
{
    GradientWorkspace ws(pb);
    std::vector<double> out(pb.blocks.size(i));
    partial_gradient(st, i, pb, ws, out);
    return out;
}

void apply_primal_update(SolverState& st, index_t i, std::span<const double> x_new_i, const Problem& pb)
{
    const index_t first = pb.blocks.begin(i);
    const index_t last = pb.blocks.end(i);
    for (index_t c = first; c < last; ++c) {
        const double delta = x_new_i[c - first] - st.x[c];
        if (delta == 0.) continue;
        st.x[c] = x_new_i[c - first];
        const SparseColMatrix* mats[3] = {&pb.Af, pb.Q ? &*pb.Q : nullptr, &pb.Ah};
        std::vector<double>* res[3] = {&st.r_f, &st.r_Q, &st.r_h};
        for (int m = 0; m < 3; ++m) {
            if (!mats[m]) continue;
            const auto rows = mats[m]->row_idx();
            const auto vals = mats[m]->values();
            auto& r = *res[m];
            const index_t k0 = mats[m]->col_begin(c), k1 = mats[m]->col_end(c);
            for (index_t k = k0; k < k1; ++k) r[rows[k]] += vals[k] * delta;
            st.touched += k1 - k0;
        }
    }
}

void apply_dual_update(SolverState& st, index_t i, std::span<const double> y_bar, const Problem& pb)
{
    const auto& dup = pb.dup;
    const auto J = dup.blocks_of(i);
    const auto segs = dup.segments_of(i);
    st.dual_delta.resize(y_bar.size());
    st.block_offset.resize(pb.blocks_h.count());
    index_t offset = 0;
    for (std::size_t k = 0; k < J.size(); ++k) {
        const index_t l = J[k];
        const index_t r0 = pb.blocks_h.begin(l), r1 = pb.blocks_h.end(l);
        const double inv_m = 1. / static_cast<double>(dup.m[l]);
        st.block_offset[l] = offset;
        for (index_t r = r0; r < r1; ++r) {
            double& y = st.y_dup[segs[k] + r - r0];
            const double delta = y_bar[offset + r - r0] - y;
            st.dual_delta[offset + r - r0] = delta;
            y = y_bar[offset + r - r0];
            st.z[r] += inv_m * delta;
        }
        offset += r1 - r0;
    }
    const auto rows = pb.Ah.row_idx();
    const auto vals = pb.Ah.values();
    for (index_t c = pb.blocks.begin(i); c < pb.blocks.end(i); ++c) {
        double s = 0.;
        for (index_t k = pb.Ah.col_begin(c); k < pb.Ah.col_end(c); ++k) {
            const index_t r = rows[k];
            const index_t l = pb.inv_blocks_h[r];
            s += vals[k] * st.dual_delta[st.block_offset[l] + r - pb.blocks_h.begin(l)];
        }
        st.w[c] += s;
    }
}

double refresh_residuals(SolverState& st, const Problem& pb)
{
    std::vector<double> r_f, r_Q, r_h, w, z;
    compute_residuals(pb, st.x, r_f, r_Q, r_h);
    compute_dual_aggregates(pb, st.y_dup, w, z);
    double drift = 0.;
    auto track = [&](std::vector<double>& cur, std::vector<double>& fresh) {
        for (std::size_t k = 0; k < cur.size(); ++k) drift = std::max(drift, std::abs(cur[k] - fresh[k]));
        cur.swap(fresh);
    };
    track(st.r_f, r_f);
    track(st.r_Q, r_Q);
    track(st.r_h, r_h);
    track(st.w, w);
    track(st.z, z);
    return drift;
}

}  // namespace cdsolve
