#include <cdsolve/accel.hpp>

#include <cdsolve/blockops.hpp>
#include <cdsolve/linalg.hpp>
#include <cdsolve/screening.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>

namespace cdsolve {

double theta_next(double theta, bool has_h)
{
    const double t2 = theta * theta;
    if (!has_h) {
        // root of t^2 + t2 t - t2, written without cancellation
        double t = 2. * t2 / (t2 + std::sqrt(t2 * t2 + 4. * t2));
        t -= (t * t + t2 * t - t2) / (2. * t + t2);
        return t;
    }
    auto p = [&](double t) { return ((t + 1.) * t + t2) * t - t2; };
    double lo = 0., hi = theta;
    double t = 0.5 * theta;
    for (int it = 0; it < 200; ++it) {
        const double v = p(t);
        if (v == 0.) return t;
        (v < 0. ? lo : hi) = t;
        const double dp = (3. * t + 2.) * t + t2;
        double nt = t - v / dp;
        if (!(nt > lo && nt < hi)) nt = 0.5 * (lo + hi);
        if (std::abs(nt - t) <= 1e-17 * std::max(1e-300, t) || hi - lo <= 4e-16 * hi) {
            t = nt;
            break;
        }
        t = nt;
    }
    return t;
}

AccelState::AccelState(const Problem& pb, double gamma1_opt)
    : x_hat(pb.N, 0.), x_tilde(pb.x_init), y_dot(pb.rows_h(), 0.)
{
    const index_t I = pb.num_blocks();
    theta0 = theta = 1. / static_cast<double>(I);
    beta = compute_beta(pb);
    h_norm.assign(I, 0.);
    double max_col = 0.;
    for (index_t i = 0; i < I && pb.has_h(); ++i) {
        const index_t c0 = pb.blocks.begin(i), c1 = pb.blocks.end(i);
        DenseSym g(c1 - c0);
        g.a = column_gram(pb.Ah, c0, c1);
        h_norm[i] = spectral_radius_psd(g);
        for (index_t c = c0; c < c1; ++c) {
            double s = 0.;
            for (index_t k = pb.Ah.col_begin(c); k < pb.Ah.col_end(c); ++k)
                s += pb.Ah.values()[k] * pb.Ah.values()[k];
            max_col = std::max(max_col, std::sqrt(s));
        }
    }
    gamma1 = gamma1_opt > 0. ? gamma1_opt : (max_col > 0. ? max_col : 1.);
    gamma = gamma1;
    if (!pb.y_init.empty() && pb.has_h()) {
        // average of the duplicated copies
        for (index_t l = 0; l < pb.h.size(); ++l) {
            const index_t r0 = pb.blocks_h.begin(l), r1 = pb.blocks_h.end(l);
            const auto segs = pb.dup.primal_segments_of(l);
            if (segs.empty()) continue;
            for (index_t seg : segs)
                for (index_t r = r0; r < r1; ++r) y_dot[r] += pb.y_init[seg + r - r0];
            for (index_t r = r0; r < r1; ++r) y_dot[r] /= static_cast<double>(segs.size());
        }
    }
    rebuild_caches(*this, pb);
}

std::vector<double> AccelState::combined() const
{
    std::vector<double> x(x_tilde);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] += c_last * x_hat[k];
    return x;
}

void rebuild_caches(AccelState& as, const Problem& pb)
{
    as.af_hat.assign(pb.rows_f(), 0.);
    as.af_tilde.assign(pb.rows_f(), 0.);
    pb.Af.multiply(as.x_hat, as.af_hat);
    pb.Af.multiply(as.x_tilde, as.af_tilde);
    for (index_t r = 0; r < as.af_tilde.size(); ++r) as.af_tilde[r] -= pb.bf[r];
    as.q_hat.assign(pb.N, 0.);
    as.q_tilde.assign(pb.N, 0.);
    if (pb.Q) {
        pb.Q->multiply(as.x_hat, as.q_hat);
        pb.Q->multiply(as.x_tilde, as.q_tilde);
    }
    as.ah_hat.assign(pb.rows_h(), 0.);
    as.ah_tilde.assign(pb.rows_h(), 0.);
    pb.Ah.multiply(as.x_hat, as.ah_hat);
    pb.Ah.multiply(as.x_tilde, as.ah_tilde);
}

AccelWorkspace::AccelWorkspace(const Problem& pb)
    : grad_ws(pb),
      grad(pb.blocks.max_size()),
      u(pb.blocks.max_size()),
      xbar(pb.blocks.max_size()),
      delta(pb.blocks.max_size()),
      block_offset(pb.blocks_h.count(), 0)
{
    index_t widest = 0;
    for (index_t i = 0; i < pb.num_blocks(); ++i) {
        index_t w = 0;
        for (index_t l : pb.dup.blocks_of(i)) w += pb.blocks_h.size(l);
        widest = std::max(widest, w);
    }
    ybar.resize(widest);
}

namespace {

void dual_block(const AccelState& as, const Problem& pb, index_t l, double coef, std::span<double> out)
{
    const index_t r0 = pb.blocks_h.begin(l), m = pb.blocks_h.size(l);
    for (index_t k = 0; k < m; ++k)
        out[k] = as.y_dot[r0 + k] + (coef * as.ah_hat[r0 + k] + as.ah_tilde[r0 + k]) / as.gamma;
    prox_h_conj_block(pb, l, out.first(m), 1. / as.gamma, out.first(m));
}

std::vector<double> full_dual(const AccelState& as, const Problem& pb, double coef)
{
    std::vector<double> y(pb.rows_h(), 0.);
    for (index_t l = 0; l < pb.h.size(); ++l)
        dual_block(as, pb, l, coef, std::span<double>(y).subspan(pb.blocks_h.begin(l), pb.blocks_h.size(l)));
    return y;
}

void add_column(const SparseColMatrix& m, index_t c, double d, std::vector<double>& out)
{
    const auto rows = m.row_idx();
    const auto vals = m.values();
    for (index_t k = m.col_begin(c); k < m.col_end(c); ++k) out[rows[k]] += vals[k] * d;
}

void move_block(AccelState& as, index_t i, std::span<const double> d_tilde, std::span<const double> d_hat,
                const Problem& pb)
{
    const index_t c0 = pb.blocks.begin(i);
    for (index_t k = 0; k < d_tilde.size(); ++k) {
        const index_t c = c0 + k;
        if (d_tilde[k] != 0.) {
            as.x_tilde[c] += d_tilde[k];
            add_column(pb.Af, c, d_tilde[k], as.af_tilde);
            if (pb.Q) add_column(*pb.Q, c, d_tilde[k], as.q_tilde);
            add_column(pb.Ah, c, d_tilde[k], as.ah_tilde);
        }
        if (d_hat[k] != 0.) {
            as.x_hat[c] += d_hat[k];
            add_column(pb.Af, c, d_hat[k], as.af_hat);
            if (pb.Q) add_column(*pb.Q, c, d_hat[k], as.q_hat);
            add_column(pb.Ah, c, d_hat[k], as.ah_hat);
        }
    }
}

}  // namespace

std::vector<double> accel_dual(const AccelState& as, const Problem& pb) { return full_dual(as, pb, as.c); }

void accel_update_block(AccelState& as, index_t i, const Problem& pb, AccelWorkspace& ws)
{
    const index_t c0 = pb.blocks.begin(i), n = pb.blocks.size(i);
    const double c = as.c;

    index_t off = 0;
    for (index_t l : pb.dup.blocks_of(i)) {
        dual_block(as, pb, l, c, std::span<double>(ws.ybar).subspan(off));
        ws.block_offset[l] = off;
        off += pb.blocks_h.size(l);
    }

    auto grad = std::span<double>(ws.grad).first(n);
    ws.grad_ws.block_gradient(
        pb, i, [&](index_t r) { return c * as.af_hat[r] + as.af_tilde[r]; },
        [&](index_t e) { return c * as.q_hat[e] + as.q_tilde[e]; }, grad);

    const double step = as.theta0 / (as.theta * std::max(as.B(i), 1e-12));
    const auto rows = pb.Ah.row_idx();
    const auto vals = pb.Ah.values();
    auto u = std::span<double>(ws.u).first(n);
    for (index_t k = 0; k < n; ++k) {
        const index_t col = c0 + k;
        double aty = 0.;
        for (index_t e = pb.Ah.col_begin(col); e < pb.Ah.col_end(col); ++e) {
            const index_t r = rows[e];
            const index_t l = pb.inv_blocks_h[r];
            aty += vals[e] * ws.ybar[ws.block_offset[l] + r - pb.blocks_h.begin(l)];
        }
        u[k] = as.x_tilde[col] - step * (grad[k] + aty);
    }
    for (index_t k = 0; k < n; ++k)
        if (!std::isfinite(u[k])) throw SolverError("non-finite primal value in block " + std::to_string(i));
    auto xbar = std::span<double>(ws.xbar).first(n);
    prox_g_block(pb, i, u, step, xbar);

    auto d_tilde = std::span<double>(ws.delta).first(n);
    auto d_hat = u;
    const double hat_coef = -(1. - as.theta / as.theta0) / c;
    for (index_t k = 0; k < n; ++k) {
        if (!std::isfinite(xbar[k])) throw SolverError("non-finite primal value in block " + std::to_string(i));
        d_tilde[k] = xbar[k] - as.x_tilde[c0 + k];
        d_hat[k] = hat_coef * d_tilde[k];
    }
    move_block(as, i, d_tilde, d_hat, pb);

    as.theta = theta_next(as.theta, pb.has_h());
    as.gamma /= 1. + as.theta;
    as.c_last = c;
    as.c = (1. - as.theta) * c;
}

index_t accel_iterate(AccelState& as, const BlockSampler& sampler, Rng& rng, const Problem& pb, AccelWorkspace& ws)
{
    const index_t i = sampler.sample(rng);
    accel_update_block(as, i, pb, ws);
    return i;
}

void restart(AccelState& as, const Problem& pb, std::vector<double> y_bar)
{
    as.x_tilde = as.combined();
    std::fill(as.x_hat.begin(), as.x_hat.end(), 0.);
    if (pb.has_h() && !y_bar.empty()) as.y_dot = std::move(y_bar);
    as.c = as.c_last = 1.;
    as.theta = as.theta0;
    as.gamma = as.gamma1;
    ++as.restarts;
    rebuild_caches(as, pb);
}

void accel_fix_block(AccelState& as, index_t i, std::span<const double> value, const Problem& pb)
{
    const index_t c0 = pb.blocks.begin(i), n = pb.blocks.size(i);
    std::vector<double> d_tilde(n), d_hat(n);
    for (index_t k = 0; k < n; ++k) {
        d_tilde[k] = value[k] - as.x_tilde[c0 + k];
        d_hat[k] = -as.x_hat[c0 + k];
    }
    move_block(as, i, d_tilde, d_hat, pb);
}

bool RestartPolicy::due(std::uint64_t k, std::uint64_t n_blocks) const
{
    const std::uint64_t p = period ? period : 2 * std::max<std::uint64_t>(1, n_blocks);
    if (k == 0 || k % p != 0) return false;
    if (kind == Kind::FixedPeriod) return true;
    const std::uint64_t q = k / p + 1;
    return (q & (q - 1)) == 0;
}

Result run_accel(const Problem& pb, const SolveOptions& opts)
{
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };

    Result res;
    const index_t I = pb.num_blocks();
    AccelState as(pb, opts.gamma1);
    if (opts.sampling != SamplingKind::Uniform)
        res.warnings.push_back("the accelerated loop samples uniformly; kink_half ignored");
    BlockSampler sampler(SamplingKind::Uniform, I);
    Rng rng(opts.seed);
    AccelWorkspace ws(pb);
    ws.grad_ws.bypass_square = opts.bypass_square;

    const bool screening = opts.screening && !pb.has_h();
    if (opts.screening && pb.has_h()) res.warnings.push_back("screening is only available without h; disabled");
    ScreeningContext sctx;
    if (screening) sctx = make_screening_context(pb);

    const std::uint64_t refresh = opts.refresh_period ? opts.refresh_period : 10 * I;
    const std::uint64_t print_period = std::max<std::uint64_t>(1, opts.print_period);
    const std::uint64_t screen_period = std::max<std::uint64_t>(1, opts.screening_period);

    auto record = [&](std::uint64_t epoch) {
        const auto x = as.combined();
        std::vector<double> y;
        if (pb.has_h()) y = full_dual(as, pb, as.c_last);
        const GapReport rep = evaluate_gap(x, y, pb);
        res.trace.records.push_back({static_cast<double>(epoch), elapsed(), rep.objective, rep.gap, rep.beta,
                                     rep.gamma, rep.infeasibility, res.screened});
        if (opts.verbose)
            std::cerr << "epoch " << epoch << "  obj " << rep.objective << "  gap " << rep.gap << "  beta "
                      << rep.beta << "  gamma " << rep.gamma << '\n';
        return rep.gap <= opts.tolerance && rep.beta <= opts.tolerance && rep.gamma <= opts.tolerance;
    };

    auto run_screening = [&] {
        for (auto& sb : screening_test(sctx, as.combined(), pb)) {
            accel_fix_block(as, sb.block, sb.value, pb);
            sampler.deactivate(sb.block);
            res.screened_blocks.push_back(sb.block);
            ++res.screened;
        }
    };

    if (screening) run_screening();
    bool done = record(0) || sampler.active_count() == 0;
    if (done) res.status = Status::Converged;
    std::uint64_t it = 0;
    for (std::uint64_t epoch = 1; !done && epoch <= opts.max_iter; ++epoch) {
        for (index_t k = 0; k < I && sampler.active_count() > 0; ++k) {
            const bool restart_now = opts.restart.due(it + 1, sampler.active_count());
            std::vector<double> y_anchor;
            if (restart_now && pb.has_h()) y_anchor = full_dual(as, pb, as.c);
            accel_iterate(as, sampler, rng, pb, ws);
            ++it;
            if (restart_now) {
                as.theta0 = 1. / static_cast<double>(sampler.active_count());
                restart(as, pb, std::move(y_anchor));
            } else if (it % refresh == 0) {
                rebuild_caches(as, pb);
            }
        }
        if (screening && epoch % screen_period == 0) run_screening();
        if (sampler.active_count() == 0) {
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
    res.x = as.combined();
    if (pb.has_h()) res.y = full_dual(as, pb, as.c_last);
    return res;
}

}  // namespace cdsolve
