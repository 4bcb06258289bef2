#include <cdsolve/blockops.hpp>

#include <cmath>
#include <vector>

namespace cdsolve {

void prox_g_block(const Problem& pb, index_t i, std::span<const double> u, double tau, std::span<double> out)
{
    const index_t b0 = pb.blocks.begin(i), n = pb.blocks.size(i);
    const double D = pb.Dg[i], c = pb.cg[i];
    for (index_t k = 0; k < n; ++k) out[k] = D * u[k] - pb.bg[b0 + k];
    pb.g[i]->kernel(std::span<const double>(out.data(), n), out.first(n), Mode::Prox, c * D * D * tau, 1.);
    for (index_t k = 0; k < n; ++k) out[k] = (pb.bg[b0 + k] + out[k]) / D;
}

void prox_h_conj_block(const Problem& pb, index_t l, std::span<const double> v, double sigma,
                       std::span<double> out)
{
    const index_t r0 = pb.blocks_h.begin(l), n = pb.blocks_h.size(l);
    for (index_t k = 0; k < n; ++k) out[k] = v[k] - sigma * pb.bh[r0 + k];
    prox_conj(*pb.h[l], std::span<const double>(out.data(), n), sigma, pb.ch[l], out.first(n));
}

double g_block_value(const Problem& pb, index_t i, std::span<const double> x_i)
{
    const index_t b0 = pb.blocks.begin(i), n = pb.blocks.size(i);
    std::vector<double> t(n);
    for (index_t k = 0; k < n; ++k) t[k] = pb.Dg[i] * x_i[k] - pb.bg[b0 + k];
    const double v = pb.g[i]->kernel(t, {}, Mode::Val, 1., 1.);
    return v == kInf ? kInf : pb.cg[i] * v;
}

double g_block_conj(const Problem& pb, index_t i, std::span<const double> v)
{
    const index_t b0 = pb.blocks.begin(i), n = pb.blocks.size(i);
    const double cd = pb.cg[i] * pb.Dg[i];
    std::vector<double> t(n);
    double lin = 0.;
    for (index_t k = 0; k < n; ++k) {
        t[k] = v[k] / cd;
        lin += v[k] * pb.bg[b0 + k];
    }
    const double conj = val_conj(*pb.g[i], t);
    if (conj == kInf) return kInf;
    return pb.cg[i] * conj + lin / pb.Dg[i];
}

bool g_block_conj_dom_project(const Problem& pb, index_t i, std::span<const double> v, std::span<double> out)
{
    const Atom& a = *pb.g[i];
    if (!a.project_conj_dom) return false;
    const index_t n = pb.blocks.size(i);
    const double cd = pb.cg[i] * pb.Dg[i];
    for (index_t k = 0; k < n; ++k) out[k] = v[k] / cd;
    a.project_conj_dom(std::span<const double>(out.data(), n), out.first(n));
    for (index_t k = 0; k < n; ++k) out[k] *= cd;
    return true;
}

double h_block_value(const Problem& pb, index_t l, std::span<const double> u)
{
    const index_t r0 = pb.blocks_h.begin(l), n = pb.blocks_h.size(l);
    std::vector<double> t(n);
    for (index_t k = 0; k < n; ++k) t[k] = u[k] - pb.bh[r0 + k];
    const double v = pb.h[l]->kernel(t, {}, Mode::Val, 1., 1.);
    return v == kInf ? kInf : pb.ch[l] * v;
}

double h_block_conj(const Problem& pb, index_t l, std::span<const double> y)
{
    const index_t r0 = pb.blocks_h.begin(l), n = pb.blocks_h.size(l);
    std::vector<double> t(n);
    double lin = 0.;
    for (index_t k = 0; k < n; ++k) {
        t[k] = y[k] / pb.ch[l];
        lin += y[k] * pb.bh[r0 + k];
    }
    const double conj = val_conj(*pb.h[l], t);
    if (conj == kInf) return kInf;
    return pb.ch[l] * conj + lin;
}

double f_block_conj(const Problem& pb, index_t j, std::span<const double> z)
{
    const index_t r0 = pb.blocks_f.begin(j), n = pb.blocks_f.size(j);
    std::vector<double> t(n);
    double lin = 0.;
    for (index_t k = 0; k < n; ++k) {
        t[k] = z[k] / pb.cf[j];
        lin += z[k] * pb.bf[r0 + k];
    }
    const double conj = val_conj(*pb.f[j], t);
    if (conj == kInf) return kInf;
    return pb.cf[j] * conj + lin;
}

}  // namespace cdsolve
