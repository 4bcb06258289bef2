#pragma once

#include <cdsolve/problem.hpp>

#include <span>

namespace cdsolve {

// prox of tau * cg_i g_i(Dg_i . - bg_i) at u, written to out (size N_i).
void prox_g_block(const Problem& pb, index_t i, std::span<const double> u, double tau, std::span<double> out);

// prox of sigma * H_l^* at v, where H_l(s) = ch_l h_l(s - bh_l). out may alias v.
void prox_h_conj_block(const Problem& pb, index_t l, std::span<const double> v, double sigma,
                       std::span<double> out);

// cg_i g_i(Dg_i x_i - bg_i)
double g_block_value(const Problem& pb, index_t i, std::span<const double> x_i);
// G_i^*(v) = cg_i g_i^*(v / (cg_i Dg_i)) + <v, bg_i> / Dg_i
double g_block_conj(const Problem& pb, index_t i, std::span<const double> v);
// Projection of v onto dom G_i^* = cg_i Dg_i dom g_i^*; out may alias v. Returns false if unknown.
bool g_block_conj_dom_project(const Problem& pb, index_t i, std::span<const double> v, std::span<double> out);

// ch_l h_l(u - bh_l) for u = (Ah x)_l
double h_block_value(const Problem& pb, index_t l, std::span<const double> u);
// H_l^*(y) = ch_l h_l^*(y / ch_l) + <bh_l, y>
double h_block_conj(const Problem& pb, index_t l, std::span<const double> y);

// f_j^* counterpart: F_j^*(z) = cf_j f_j^*(z / cf_j) + <bf_j, z>
double f_block_conj(const Problem& pb, index_t j, std::span<const double> z);

}  // namespace cdsolve
