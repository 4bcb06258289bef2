#include <cdsolve/screening.hpp>

#include <cdsolve/blockops.hpp>
#include <cdsolve/diagnostics.hpp>
#include <cdsolve/linalg.hpp>
#include <cdsolve/pdcd.hpp>
#include <cdsolve/state.hpp>

#include <algorithm>
#include <cmath>

namespace cdsolve {

ScreeningContext make_screening_context(const Problem& pb)
{
    ScreeningContext ctx;
    double L = 0.;
    std::vector<double> buf(1);
    for (index_t j = 0; j < pb.f.size(); ++j) {
        std::vector<double> probe(pb.blocks_f.size(j), 0.);
        L = std::max(L, pb.cf[j] * pb.f[j]->kernel(probe, buf, Mode::Lipschitz, 1., 1.));
    }
    if (pb.Q) {
        const auto& Q = *pb.Q;
        L = std::max(L, spectral_radius_psd_op(pb.N, [&](std::span<const double> v, std::span<double> w) {
                         Q.multiply(v, w);
                     }));
    }
    ctx.L_fQ = L;
    const index_t I = pb.num_blocks();
    ctx.op_bound.resize(I);
    ctx.active.assign(I, 1);
    for (index_t i = 0; i < I; ++i) {
        const index_t c0 = pb.blocks.begin(i), c1 = pb.blocks.end(i);
        DenseSym g(c1 - c0);
        g.a = column_gram(pb.Af, c0, c1);
        const double rho = spectral_radius_psd(g);
        ctx.op_bound[i] = std::sqrt(rho + (pb.Q ? 1. : 0.));
    }
    return ctx;
}

DualCenter dual_scaling_center(std::span<const double> x, const Problem& pb)
{
    DualCenter c;
    default_dual_pair(x, pb, c.zeta, c.omega);
    std::vector<double> v(pb.N, 0.);
    pb.Af.multiply_transpose(c.zeta, v);
    for (index_t k = 0; k < pb.N; ++k) v[k] = -v[k] - c.omega[k];
    c.scale = dual_scaling_factor(v, pb);
    for (double& z : c.zeta) z /= c.scale;
    for (double& w : c.omega) w /= c.scale;
    return c;
}

double gap_value(std::span<const double> x, const DualCenter& center, const Problem& pb)
{
    const double primal = primal_objective(x, pb);
    if (primal == kInf) return kInf;
    double gap = primal;
    for (index_t j = 0; j < pb.f.size(); ++j) {
        const double fc = f_block_conj(pb, j, std::span<const double>(center.zeta)
                                                  .subspan(pb.blocks_f.begin(j), pb.blocks_f.size(j)));
        if (fc == kInf) return kInf;
        gap += fc;
    }
    if (pb.Q) {
        std::vector<double> qx(pb.N);
        pb.Q->multiply(x, qx);
        gap += 0.5 * dot(x, qx) / (center.scale * center.scale);
    }
    std::vector<double> v(pb.N, 0.);
    pb.Af.multiply_transpose(center.zeta, v);
    for (index_t k = 0; k < pb.N; ++k) v[k] = -v[k] - center.omega[k];
    for (index_t i = 0; i < pb.g.size(); ++i) {
        const double gc = g_block_conj(pb, i, std::span<const double>(v).subspan(pb.blocks.begin(i),
                                                                                  pb.blocks.size(i)));
        if (gc == kInf) return kInf;
        gap += gc;
    }
    return gap;
}

double polar_support(PolarKind kind, std::span<const double> p, std::span<const double> u)
{
    switch (kind) {
    case PolarKind::DualLinf: {
        double m = 0.;
        for (double e : u) m = std::max(m, std::abs(e));
        return m;
    }
    case PolarKind::DualL2:
        return norm2(u);
    case PolarKind::Orthant:
        // subdifferential at a vertex: (-inf, 0] where p = 0, [0, inf) where p = 1
        for (std::size_t k = 0; k < u.size(); ++k)
            if ((p[k] == 0. && u[k] > 0.) || (p[k] != 0. && u[k] < 0.)) return kInf;
        return 0.;
    case PolarKind::None:
        break;
    }
    return kInf;
}

bool polar_ball_test(PolarKind kind, std::span<const double> p, std::span<const double> u, double radius)
{
    switch (kind) {
    case PolarKind::DualLinf:
    case PolarKind::DualL2:
        // both norms are at most 1 on the Euclidean unit sphere
        return polar_support(kind, p, u) + radius < 1.;
    case PolarKind::Orthant:
        for (std::size_t k = 0; k < u.size(); ++k) {
            if (p[k] == 0. && !(u[k] + radius < 0.)) return false;
            if (p[k] != 0. && !(u[k] - radius > 0.)) return false;
        }
        return true;
    case PolarKind::None:
        break;
    }
    return false;
}

std::vector<ScreenedBlock> screening_test(ScreeningContext& ctx, std::span<const double> x, const Problem& pb)
{
    std::vector<ScreenedBlock> out;
    if (pb.has_h()) return out;
    const DualCenter center = dual_scaling_center(x, pb);
    ctx.scale = center.scale;
    ctx.gap = gap_value(x, center, pb);
    if (!std::isfinite(ctx.gap)) {
        ctx.radius = kInf;
        return out;
    }
    // the computed gap is only known up to round-off relative to the objective
    const double slack = 1e-12 * (1. + std::abs(primal_objective(x, pb)));
    ctx.radius = std::sqrt(2. * ctx.L_fQ * (std::max(ctx.gap, 0.) + slack));

    // u = Af^T zeta + omega at the center
    std::vector<double> u(pb.N, 0.);
    pb.Af.multiply_transpose(center.zeta, u);
    for (index_t k = 0; k < pb.N; ++k) u[k] += center.omega[k];

    std::vector<double> a(pb.blocks.max_size()), p(pb.blocks.max_size());
    for (index_t i = 0; i < pb.num_blocks(); ++i) {
        if (!ctx.active[i]) continue;
        const PolarKind kind = pb.g[i]->polar;
        if (kind == PolarKind::None) continue;
        const index_t b0 = pb.blocks.begin(i), n = pb.blocks.size(i);
        const double D = pb.Dg[i], cd = pb.cg[i] * D;
        auto ai = std::span<double>(a).first(n);
        auto pi = std::span<double>(p).first(n);
        for (index_t k = 0; k < n; ++k) {
            ai[k] = -u[b0 + k] / cd;
            const double t = D * x[b0 + k] - pb.bg[b0 + k];
            pi[k] = kind == PolarKind::Orthant ? (t >= 0.5 ? 1. : 0.) : 0.;
        }
        const double rad = ctx.radius * ctx.op_bound[i] / std::abs(cd);
        ScreenedBlock sb{i, std::vector<double>(n)};
        for (index_t k = 0; k < n; ++k) sb.value[k] = (pb.bg[b0 + k] + pi[k]) / D;
        bool pass = polar_ball_test(kind, pi, ai, rad);
        if (!pass && ctx.gap <= 0.) {
            // zero gap: x is optimal and the closed test suffices for blocks already at their anchor
            pass = polar_support(kind, pi, ai) <= 1.;
            for (index_t k = 0; k < n && pass; ++k) pass = x[b0 + k] == sb.value[k];
        }
        if (!pass) continue;
        ctx.active[i] = 0;
        out.push_back(std::move(sb));
    }
    return out;
}

std::vector<index_t> screen(ScreeningContext& ctx, SolverState& st, const Problem& pb, BlockSampler& sampler)
{
    std::vector<index_t> fixed;
    for (auto& sb : screening_test(ctx, st.x, pb)) {
        apply_primal_update(st, sb.block, sb.value, pb);
        sampler.deactivate(sb.block);
        fixed.push_back(sb.block);
    }
    return fixed;
}

}  // namespace cdsolve
