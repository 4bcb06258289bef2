#include <cdsolve/pdcd.hpp>

#include <cdsolve/blockops.hpp>
#include <cdsolve/linalg.hpp>
#include <cdsolve/screening.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>

namespace cdsolve {

std::vector<double> compute_beta(const Problem& pb)
{
    const index_t I = pb.num_blocks();
    std::vector<double> beta(I, 0.);
    std::vector<double> row_w(pb.rows_f(), 0.);
    std::vector<double> probe, buf(1);
    for (index_t j = 0; j < pb.f.size(); ++j) {
        if (!pb.f[j]->supports(Mode::Lipschitz))
            throw AtomError("f atom '" + std::string(pb.f[j]->name) + "' has no LIPSCHITZ mode");
        probe.assign(pb.blocks_f.size(j), 0.);
        const double L = pb.f[j]->kernel(probe, buf, Mode::Lipschitz, 1., 1.);
        for (index_t r = pb.blocks_f.begin(j); r < pb.blocks_f.end(j); ++r) row_w[r] = pb.cf[j] * L;
    }
    for (index_t i = 0; i < I; ++i) {
        const index_t c0 = pb.blocks.begin(i), c1 = pb.blocks.end(i), n = c1 - c0;
        DenseSym m(n);
        if (pb.has_f()) m.a = column_gram(pb.Af, c0, c1, row_w);
        if (pb.Q)
            for (index_t a = 0; a < n; ++a)
                for (index_t b = 0; b < n; ++b) m(a, b) += pb.Q->coeff(c0 + a, c0 + b);
        beta[i] = spectral_radius_psd(m);
    }
    return beta;
}

std::vector<double> dual_coupling_radius(const Problem& pb, std::span<const double> sigma)
{
    const index_t I = pb.num_blocks();
    std::vector<double> rho(I, 0.);
    if (!pb.has_h()) return rho;
    std::vector<double> row_w(pb.rows_h(), 0.);
    for (index_t l = 0; l < pb.h.size(); ++l)
        for (index_t r = pb.blocks_h.begin(l); r < pb.blocks_h.end(l); ++r)
            row_w[r] = static_cast<double>(pb.dup.m[l]) * sigma[l];
    for (index_t i = 0; i < I; ++i) {
        const index_t c0 = pb.blocks.begin(i), c1 = pb.blocks.end(i);
        DenseSym m(c1 - c0);
        m.a = column_gram(pb.Ah, c0, c1, row_w);
        rho[i] = spectral_radius_psd(m);
    }
    return rho;
}

StepSizes compute_step_sizes(const Problem& pb, double safety, const std::optional<std::vector<double>>& sigma)
{
    if (!(safety > 0. && safety < 1.)) throw std::invalid_argument("safety factor must lie in (0, 1)");
    StepSizes s;
    s.beta = compute_beta(pb);
    const index_t L = pb.h.size();
    if (sigma) {
        if (sigma->size() != L)
            throw std::invalid_argument("sigma override has " + std::to_string(sigma->size()) +
                                        " entries, expected " + std::to_string(L));
        for (double v : *sigma)
            if (!(v > 0.) || !std::isfinite(v)) throw std::invalid_argument("sigma entries must be positive");
        s.sigma = *sigma;
    } else {
        s.sigma.assign(L, 1.);
        if (L > 0) {
            const SparseColMatrix AhT = pb.Ah.transpose();
            for (index_t l = 0; l < L; ++l) {
                if (pb.dup.m[l] == 0) continue;
                DenseSym g(pb.blocks_h.size(l));
                g.a = column_gram(AhT, pb.blocks_h.begin(l), pb.blocks_h.end(l));
                const double rho = spectral_radius_psd(g);
                s.sigma[l] = 1. / (static_cast<double>(pb.dup.m[l]) * std::max(1., rho));
            }
        }
    }
    const auto rho = dual_coupling_radius(pb, s.sigma);
    s.tau.resize(pb.num_blocks());
    for (index_t i = 0; i < s.tau.size(); ++i) s.tau[i] = safety / std::max(s.beta[i] + rho[i], 1e-12);
    return s;
}

BlockSampler::BlockSampler(SamplingKind kind, index_t n_blocks)
    : kind_(kind), active_(n_blocks, 1), kink_(n_blocks, 0)
{
    rebuild();
}

void BlockSampler::rebuild()
{
    all_.clear();
    kinks_.clear();
    others_.clear();
    for (index_t i = 0; i < active_.size(); ++i) {
        if (!active_[i]) continue;
        all_.push_back(i);
        (kink_[i] ? kinks_ : others_).push_back(i);
    }
    n_active_ = all_.size();
}

void BlockSampler::set_kinks(const std::vector<char>& kink_flags)
{
    kink_ = kink_flags;
    rebuild();
}

void BlockSampler::deactivate(index_t i)
{
    active_[i] = 0;
    rebuild();
}

index_t BlockSampler::sample(Rng& rng) const
{
    const bool mixed = kind_ == SamplingKind::KinkHalf && !kinks_.empty() && !others_.empty();
    if (!mixed) return all_[std::uniform_int_distribution<index_t>(0, n_active_ - 1)(rng)];
    const double u = std::uniform_real_distribution<double>(0., 1.)(rng);
    const double p_kink = static_cast<double>(kinks_.size()) / (2. * static_cast<double>(n_active_));
    const auto& pool = u < p_kink ? kinks_ : others_;
    return pool[std::uniform_int_distribution<index_t>(0, pool.size() - 1)(rng)];
}

double BlockSampler::probability(index_t i) const
{
    if (!active_[i]) return 0.;
    const double n = static_cast<double>(n_active_);
    const bool mixed = kind_ == SamplingKind::KinkHalf && !kinks_.empty() && !others_.empty();
    if (!mixed) return 1. / n;
    if (kink_[i]) return 1. / (2. * n);
    return 1. / (2. * n) + 1. / (2. * static_cast<double>(others_.size()));
}

index_t sample_block(const BlockSampler& sampler, Rng& rng) { return sampler.sample(rng); }

std::vector<char> detect_kinks(const Problem& pb, std::span<const double> x)
{
    std::vector<char> flags(pb.num_blocks(), 0);
    std::vector<double> t(pb.blocks.max_size());
    for (index_t i = 0; i < pb.num_blocks(); ++i) {
        const Atom& a = *pb.g[i];
        if (!a.supports(Mode::IsKink)) continue;
        const index_t b0 = pb.blocks.begin(i), n = pb.blocks.size(i);
        for (index_t k = 0; k < n; ++k) t[k] = pb.Dg[i] * x[b0 + k] - pb.bg[b0 + k];
        flags[i] = a.kernel(std::span<const double>(t).first(n), {}, Mode::IsKink, 1., 1.) != 0. ? 1 : 0;
    }
    return flags;
}

PdcdWorkspace::PdcdWorkspace(const Problem& pb)
    : grad_ws(pb),
      grad(pb.blocks.max_size()),
      u(pb.blocks.max_size()),
      xbar(pb.blocks.max_size()),
      aty(pb.blocks.max_size()),
      block_offset(pb.blocks_h.count(), 0)
{
    index_t widest = 0;
    for (index_t i = 0; i < pb.num_blocks(); ++i)
        widest = std::max(widest, pb.dup.update_ptr[i + 1] - pb.dup.update_ptr[i]);
    ybar.resize(widest);
}

void pdcd_update_block(SolverState& st, const StepSizes& steps, index_t i, const Problem& pb, PdcdWorkspace& ws)
{
    const index_t c0 = pb.blocks.begin(i), n = pb.blocks.size(i);
    const auto J = pb.dup.blocks_of(i);

    // dual candidates for the h-blocks met by block i
    index_t off = 0;
    for (index_t l : J) {
        const index_t r0 = pb.blocks_h.begin(l), m = pb.blocks_h.size(l);
        const double sig = steps.sigma[l];
        auto yl = std::span<double>(ws.ybar).subspan(off, m);
        for (index_t k = 0; k < m; ++k) yl[k] = st.z[r0 + k] + sig * st.r_h[r0 + k];
        prox_h_conj_block(pb, l, yl, sig, yl);
        ws.block_offset[l] = off;
        off += m;
    }

    auto grad = std::span<double>(ws.grad).first(n);
    partial_gradient(st, i, pb, ws.grad_ws, grad);

    const auto rows = pb.Ah.row_idx();
    const auto vals = pb.Ah.values();
    const double tau = steps.tau[i];
    auto u = std::span<double>(ws.u).first(n);
    for (index_t k = 0; k < n; ++k) {
        const index_t c = c0 + k;
        double aty = 0.;
        for (index_t e = pb.Ah.col_begin(c); e < pb.Ah.col_end(c); ++e) {
            const index_t r = rows[e];
            const index_t l = pb.inv_blocks_h[r];
            aty += vals[e] * ws.ybar[ws.block_offset[l] + r - pb.blocks_h.begin(l)];
        }
        u[k] = st.x[c] - tau * (grad[k] + 2. * aty - st.w[c]);
    }
    auto xbar = std::span<double>(ws.xbar).first(n);
    prox_g_block(pb, i, u, tau, xbar);
    for (index_t k = 0; k < n; ++k)
        if (!std::isfinite(xbar[k]) || !std::isfinite(u[k]))
            throw SolverError("non-finite primal value in block " + std::to_string(i));
    for (index_t k = 0; k < off; ++k)
        if (!std::isfinite(ws.ybar[k])) throw SolverError("non-finite dual value near block " + std::to_string(i));

    apply_primal_update(st, i, xbar, pb);
    if (off > 0) apply_dual_update(st, i, std::span<const double>(ws.ybar).first(off), pb);
}

index_t pdcd_iterate(SolverState& st, const StepSizes& steps, const BlockSampler& sampler, Rng& rng,
                     const Problem& pb, PdcdWorkspace& ws)
{
    const index_t i = sampler.sample(rng);
    pdcd_update_block(st, steps, i, pb, ws);
    return i;
}

std::string_view to_string(Status s)
{
    switch (s) {
    case Status::Converged: return "converged";
    case Status::MaxIterations: return "max_iter";
    case Status::MaxTime: return "max_time";
    }
    return "?";
}

Result run_pdcd(const Problem& pb, const SolveOptions& opts)
{
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };

    Result res;
    const index_t I = pb.num_blocks();
    SolverState st(pb);
    const StepSizes steps = compute_step_sizes(pb, opts.safety, opts.sigma);
    BlockSampler sampler(opts.sampling, I);
    Rng rng(opts.seed);
    PdcdWorkspace ws(pb);
    ws.grad_ws.bypass_square = opts.bypass_square;

    const bool screening = opts.screening && !pb.has_h();
    if (opts.screening && pb.has_h()) res.warnings.push_back("screening is only available without h; disabled");
    ScreeningContext sctx;
    if (screening) sctx = make_screening_context(pb);

    const std::uint64_t refresh = opts.refresh_period ? opts.refresh_period : 10 * I;
    const std::uint64_t kink_period = opts.kink_refresh_period ? opts.kink_refresh_period : I;
    const std::uint64_t print_period = std::max<std::uint64_t>(1, opts.print_period);
    const std::uint64_t screen_period = std::max<std::uint64_t>(1, opts.screening_period);

    auto record = [&](std::uint64_t epoch) {
        const GapReport rep = evaluate_gap(st.x, st.z, pb);
        res.trace.records.push_back({static_cast<double>(epoch), elapsed(), rep.objective, rep.gap, rep.beta,
                                     rep.gamma, rep.infeasibility, res.screened});
        if (opts.verbose)
            std::cerr << "epoch " << epoch << "  obj " << rep.objective << "  gap " << rep.gap << "  beta "
                      << rep.beta << "  gamma " << rep.gamma << '\n';
        return rep.gap <= opts.tolerance && rep.beta <= opts.tolerance && rep.gamma <= opts.tolerance;
    };

    if (screening) {
        for (index_t i : screen(sctx, st, pb, sampler)) res.screened_blocks.push_back(i);
        res.screened = res.screened_blocks.size();
    }
    bool done = record(0) || sampler.active_count() == 0;
    if (done) res.status = Status::Converged;
    std::uint64_t it = 0;
    for (std::uint64_t epoch = 1; !done && epoch <= opts.max_iter; ++epoch) {
        for (index_t k = 0; k < I && sampler.active_count() > 0; ++k) {
            if (opts.sampling == SamplingKind::KinkHalf && it % kink_period == 0)
                sampler.set_kinks(detect_kinks(pb, st.x));
            pdcd_iterate(st, steps, sampler, rng, pb, ws);
            ++it;
            if (it % refresh == 0) refresh_residuals(st, pb);
        }
        if (screening && epoch % screen_period == 0) {
            for (index_t i : screen(sctx, st, pb, sampler)) res.screened_blocks.push_back(i);
            res.screened = res.screened_blocks.size();
        }
        if (sampler.active_count() == 0) {
            // every block fixed by a certified test
            record(epoch);
            res.status = Status::Converged;
            break;
        }
        const bool last = epoch == opts.max_iter;
        const bool out_of_time = elapsed() > opts.max_time;
        if (epoch % print_period == 0 || last || out_of_time) {
            if (record(epoch)) {
                res.status = Status::Converged;
                break;
            }
        }
        if (out_of_time) {
            res.status = Status::MaxTime;
            break;
        }
    }
    res.iterations = it;
    res.x = st.x;
    res.y = st.z;
    res.y_dup = st.y_dup;
    return res;
}

}  // namespace cdsolve
