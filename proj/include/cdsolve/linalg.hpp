#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cdsolve {

// Small dense symmetric matrix, row-major.
struct DenseSym {
    std::size_t n = 0;
    std::vector<double> a;

    explicit DenseSym(std::size_t dim = 0) : n(dim), a(dim * dim, 0.) {}
    double& operator()(std::size_t r, std::size_t c) { return a[r * n + c]; }
    double operator()(std::size_t r, std::size_t c) const { return a[r * n + c]; }
};

struct PowerIterationOptions {
    double tol = 1e-9;
    int max_iter = 1000;
    double inflation = 1.01;
};

/*
 * Upper estimate of the spectral radius of a positive semidefinite matrix.
 * Exact for 1x1. Otherwise power iteration, with the estimate inflated by
 * opts.inflation and capped by the Gershgorin bound.
 */
double spectral_radius_psd(const DenseSym& m, const PowerIterationOptions& opts = {});

// Same, for an operator given as a matvec callback on vectors of size n.
template <class MatVec>
double spectral_radius_psd_op(std::size_t n, MatVec&& apply, const PowerIterationOptions& opts = {});

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace cdsolve

#include <cmath>

namespace cdsolve {

template <class MatVec>
double spectral_radius_psd_op(std::size_t n, MatVec&& apply, const PowerIterationOptions& opts)
{
    if (n == 0) return 0.;
    std::vector<double> v(n), w(n);
    // deterministic start with no special alignment to sparse structure
    for (std::size_t i = 0; i < n; ++i) v[i] = 1. + 0.1 * std::sin(1.3 * static_cast<double>(i) + 0.7);
    double nv = norm2(v);
    for (double& x : v) x /= nv;
    double lambda = 0.;
    for (int it = 0; it < opts.max_iter; ++it) {
        apply(std::span<const double>(v), std::span<double>(w));
        // |Av| >= v^T A v for unit v, and both stay below the top eigenvalue
        const double nw = norm2(w);
        if (nw == 0.) return 0.;
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
        const bool done = std::abs(nw - lambda) <= opts.tol * std::max(1., nw);
        lambda = std::max(lambda, nw);
        if (done) break;
    }
    return lambda * opts.inflation;
}

}  // namespace cdsolve
