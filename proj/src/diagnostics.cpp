#include <cdsolve/diagnostics.hpp>

#include <cdsolve/blockops.hpp>
#include <cdsolve/linalg.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace cdsolve {

namespace {

double add(double acc, double v) { return (acc == kInf || v == kInf) ? kInf : acc + v; }

double quad_form(std::span<const double> x, const Problem& pb)
{
    if (!pb.Q) return 0.;
    std::vector<double> qx(pb.N);
    pb.Q->multiply(x, qx);
    return 0.5 * dot(x, qx);
}

double f_value(std::span<const double> r_f, const Problem& pb)
{
    double val = 0.;
    for (index_t j = 0; j < pb.f.size(); ++j) {
        const index_t r0 = pb.blocks_f.begin(j);
        const double v = pb.f[j]->kernel(r_f.subspan(r0, pb.blocks_f.size(j)), {}, Mode::Val, 1., 1.);
        val = add(val, v == kInf ? kInf : pb.cf[j] * v);
    }
    return val;
}

double g_value(std::span<const double> x, const Problem& pb)
{
    double val = 0.;
    for (index_t i = 0; i < pb.g.size(); ++i)
        val = add(val, g_block_value(pb, i, x.subspan(pb.blocks.begin(i), pb.blocks.size(i))));
    return val;
}

std::vector<double> f_residual(std::span<const double> x, const Problem& pb)
{
    std::vector<double> r(pb.rows_f(), 0.);
    pb.Af.multiply(x, r);
    for (index_t k = 0; k < r.size(); ++k) r[k] -= pb.bf[k];
    return r;
}

}  // namespace

double primal_objective(std::span<const double> x, const Problem& pb)
{
    double val = quad_form(x, pb);
    val = add(val, f_value(f_residual(x, pb), pb));
    val = add(val, g_value(x, pb));
    if (pb.has_h()) {
        std::vector<double> u(pb.rows_h(), 0.);
        pb.Ah.multiply(x, u);
        for (index_t l = 0; l < pb.h.size(); ++l)
            val = add(val, h_block_value(pb, l, std::span<const double>(u).subspan(pb.blocks_h.begin(l),
                                                                                    pb.blocks_h.size(l))));
    }
    return val;
}

double infeasibility(std::span<const double> x, const Problem& pb)
{
    if (!pb.has_h()) return 0.;
    std::vector<double> t(pb.rows_h(), 0.);
    pb.Ah.multiply(x, t);
    for (index_t r = 0; r < t.size(); ++r) t[r] -= pb.bh[r];
    double sq = 0.;
    std::vector<double> p(pb.blocks_h.max_size());
    for (index_t l = 0; l < pb.h.size(); ++l) {
        if (!pb.h[l]->project_dom) continue;
        const index_t r0 = pb.blocks_h.begin(l), n = pb.blocks_h.size(l);
        pb.h[l]->project_dom(std::span<const double>(t).subspan(r0, n), std::span<double>(p).first(n));
        for (index_t k = 0; k < n; ++k) sq += (t[r0 + k] - p[k]) * (t[r0 + k] - p[k]);
    }
    return std::sqrt(sq);
}

double half_pinv_quadratic(std::span<const double> omega, const Problem& pb)
{
    if (!pb.Q) return std::all_of(omega.begin(), omega.end(), [](double v) { return v == 0.; }) ? 0. : kInf;
    const index_t n = pb.N;
    const double rhs_norm = norm2(omega);
    if (rhs_norm == 0.) return 0.;
    std::vector<double> v(n, 0.), r(omega.begin(), omega.end()), p = r, qp(n);
    double rr = dot(r, r);
    for (index_t it = 0; it < 10 * n + 10; ++it) {
        pb.Q->multiply(p, qp);
        const double pqp = dot(p, qp);
        if (pqp <= 0.) break;
        const double alpha = rr / pqp;
        for (index_t k = 0; k < n; ++k) {
            v[k] += alpha * p[k];
            r[k] -= alpha * qp[k];
        }
        const double rr_new = dot(r, r);
        if (std::sqrt(rr_new) <= 1e-14 * rhs_norm) break;
        for (index_t k = 0; k < n; ++k) p[k] = r[k] + rr_new / rr * p[k];
        rr = rr_new;
    }
    return 0.5 * dot(omega, v);
}

double smoothed_gap(std::span<const double> x, std::span<const double> y, std::span<const double> zeta,
                    std::span<const double> omega, const Problem& pb, double beta, double gamma)
{
    double gap = quad_form(x, pb);
    gap = add(gap, f_value(f_residual(x, pb), pb));
    gap = add(gap, g_value(x, pb));

    if (pb.has_h()) {
        std::vector<double> u(pb.rows_h(), 0.);
        pb.Ah.multiply(x, u);
        std::vector<double> yp(pb.blocks_h.max_size());
        for (index_t l = 0; l < pb.h.size(); ++l) {
            const index_t r0 = pb.blocks_h.begin(l), n = pb.blocks_h.size(l);
            auto ul = std::span<const double>(u).subspan(r0, n);
            auto yl = y.subspan(r0, n);
            double part;
            if (beta > 0.) {
                // max_{y'} <u, y'> - H*(y') - beta/2 |y - y'|^2
                auto ypl = std::span<double>(yp).first(n);
                for (index_t k = 0; k < n; ++k) ypl[k] = yl[k] + ul[k] / beta;
                prox_h_conj_block(pb, l, ypl, 1. / beta, ypl);
                const double hc = h_block_conj(pb, l, ypl);
                double lin = 0., sq = 0.;
                for (index_t k = 0; k < n; ++k) {
                    lin += ul[k] * ypl[k];
                    sq += (yl[k] - ypl[k]) * (yl[k] - ypl[k]);
                }
                part = hc == kInf ? kInf : lin - hc - 0.5 * beta * sq;
            } else {
                part = h_block_value(pb, l, ul);
            }
            gap = add(gap, part);
            gap = add(gap, h_block_conj(pb, l, yl));
        }
    }

    for (index_t j = 0; j < pb.f.size(); ++j)
        gap = add(gap, f_block_conj(pb, j, zeta.subspan(pb.blocks_f.begin(j), pb.blocks_f.size(j))));
    gap = add(gap, half_pinv_quadratic(omega, pb));

    // v = -Ah^T y - Af^T zeta - omega
    std::vector<double> v(pb.N, 0.), tmp(pb.N, 0.);
    pb.Af.multiply_transpose(zeta, v);
    if (pb.has_h()) {
        pb.Ah.multiply_transpose(y, tmp);
        for (index_t k = 0; k < pb.N; ++k) v[k] += tmp[k];
    }
    for (index_t k = 0; k < pb.N; ++k) v[k] = -v[k] - omega[k];

    std::vector<double> xp(pb.blocks.max_size());
    for (index_t i = 0; i < pb.g.size(); ++i) {
        const index_t b0 = pb.blocks.begin(i), n = pb.blocks.size(i);
        auto vi = std::span<const double>(v).subspan(b0, n);
        double part;
        if (gamma > 0.) {
            // max_{x'} <v, x'> - G(x') - gamma/2 |x - x'|^2
            auto xpi = std::span<double>(xp).first(n);
            for (index_t k = 0; k < n; ++k) tmp[k] = x[b0 + k] + vi[k] / gamma;
            prox_g_block(pb, i, std::span<const double>(tmp).first(n), 1. / gamma, xpi);
            const double gv = g_block_value(pb, i, xpi);
            double lin = 0., sq = 0.;
            for (index_t k = 0; k < n; ++k) {
                lin += vi[k] * xpi[k];
                sq += (x[b0 + k] - xpi[k]) * (x[b0 + k] - xpi[k]);
            }
            part = gv == kInf ? kInf : lin - gv - 0.5 * gamma * sq;
        } else {
            part = g_block_conj(pb, i, vi);
        }
        gap = add(gap, part);
    }
    return gap;
}

void default_dual_pair(std::span<const double> x, const Problem& pb, std::vector<double>& zeta,
                       std::vector<double>& omega)
{
    const auto r = f_residual(x, pb);
    zeta.assign(pb.rows_f(), 0.);
    for (index_t j = 0; j < pb.f.size(); ++j) {
        const index_t r0 = pb.blocks_f.begin(j), n = pb.blocks_f.size(j);
        auto zj = std::span<double>(zeta).subspan(r0, n);
        pb.f[j]->kernel(std::span<const double>(r).subspan(r0, n), zj, Mode::Grad, 1., 1.);
        for (double& z : zj) z *= pb.cf[j];
    }
    omega.assign(pb.N, 0.);
    if (pb.Q) pb.Q->multiply(x, omega);
}

double dual_scaling_factor(std::span<const double> v, const Problem& pb)
{
    double scale = 1.;
    std::vector<double> t(pb.blocks.max_size());
    for (index_t i = 0; i < pb.g.size(); ++i) {
        const Atom& a = *pb.g[i];
        if (!a.conj_dom_gauge) continue;
        const index_t b0 = pb.blocks.begin(i), n = pb.blocks.size(i);
        const double cd = pb.cg[i] * pb.Dg[i];
        for (index_t k = 0; k < n; ++k) t[k] = v[b0 + k] / cd;
        const double s = a.conj_dom_gauge(std::span<const double>(t).first(n));
        if (std::isfinite(s)) scale = std::max(scale, s);
    }
    return scale;
}

GapReport evaluate_gap(std::span<const double> x, std::span<const double> y, const Problem& pb)
{
    GapReport rep;
    rep.objective = primal_objective(x, pb);
    std::vector<double> zeta, omega;
    default_dual_pair(x, pb, zeta, omega);

    std::vector<double> v(pb.N, 0.), tmp(pb.N, 0.);
    pb.Af.multiply_transpose(zeta, v);
    for (index_t k = 0; k < pb.N; ++k) v[k] = -v[k] - omega[k];
    if (!pb.has_h()) {
        const double s = dual_scaling_factor(v, pb);
        if (s > 1.) {
            for (double& z : zeta) z /= s;
            for (double& w : omega) w /= s;
            for (double& e : v) e /= s;
        }
    } else {
        pb.Ah.multiply_transpose(y, tmp);
        for (index_t k = 0; k < pb.N; ++k) v[k] -= tmp[k];
    }

    rep.infeasibility = infeasibility(x, pb);
    rep.beta = rep.infeasibility;

    double sq = 0.;
    std::vector<double> p(pb.blocks.max_size());
    for (index_t i = 0; i < pb.g.size(); ++i) {
        const index_t b0 = pb.blocks.begin(i), n = pb.blocks.size(i);
        auto vi = std::span<const double>(v).subspan(b0, n);
        if (!g_block_conj_dom_project(pb, i, vi, std::span<double>(p).first(n))) continue;
        for (index_t k = 0; k < n; ++k) sq += (vi[k] - p[k]) * (vi[k] - p[k]);
    }
    rep.gamma = std::sqrt(sq);
    rep.gap = smoothed_gap(x, y, zeta, omega, pb, rep.beta, rep.gamma);
    return rep;
}

void Trace::write_csv(std::ostream& os) const
{
    const auto old = os.precision(17);
    os << kColumns << '\n';
    for (const auto& r : records)
        os << r.epoch << ',' << r.elapsed << ',' << r.objective << ',' << r.gap << ',' << r.beta << ','
           << r.gamma << ',' << r.infeasibility << ',' << r.screened << '\n';
    os.precision(old);
}

void Trace::write_json(std::ostream& os) const
{
    // JSON has no infinity; non-finite values are written as null
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : records)
        arr.push_back({{"epoch", num(r.epoch)},
                       {"elapsed", num(r.elapsed)},
                       {"objective", num(r.objective)},
                       {"gap", num(r.gap)},
                       {"beta", num(r.beta)},
                       {"gamma", num(r.gamma)},
                       {"infeasibility", num(r.infeasibility)},
                       {"screened", r.screened}});
    os << nlohmann::json{{"records", arr}}.dump(2) << '\n';
}

}  // namespace cdsolve
