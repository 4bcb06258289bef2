#include <cdsolve/linalg.hpp>

#include <algorithm>
#include <cmath>

namespace cdsolve {

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double spectral_radius_psd(const DenseSym& m, const PowerIterationOptions& opts)
{
    if (m.n == 0) return 0.;
    if (m.n == 1) return std::abs(m.a[0]);
    double gershgorin = 0.;
    for (std::size_t r = 0; r < m.n; ++r) {
        double s = 0.;
        for (std::size_t c = 0; c < m.n; ++c) s += std::abs(m(r, c));
        gershgorin = std::max(gershgorin, s);
    }
    const double est = spectral_radius_psd_op(
        m.n,
        [&](std::span<const double> v, std::span<double> w) {
            for (std::size_t r = 0; r < m.n; ++r) {
                double s = 0.;
                for (std::size_t c = 0; c < m.n; ++c) s += m(r, c) * v[c];
                w[r] = s;
            }
        },
        opts);
    return std::min(est, gershgorin);
}

}  // namespace cdsolve
