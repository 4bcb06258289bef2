#include <cdsolve/atoms.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace cdsolve {

namespace {

constexpr unsigned bits(std::initializer_list<Mode> modes)
{
    unsigned out = 0;
    for (Mode m : modes) out |= capability_bit(m);
    return out;
}

double sum_sq(std::span<const double> x)
{
    double s = 0.;
    for (double v : x) s += v * v;
    return s;
}

bool all_zero(std::span<const double> x)
{
    return std::all_of(x.begin(), x.end(), [](double v) { return v == 0.; });
}

// ---------------------------------------------------------------------------
// Sets shared by several atoms.
// ---------------------------------------------------------------------------

void project_whole(std::span<const double> x, std::span<double> out)
{
    std::copy(x.begin(), x.end(), out.begin());
}

void project_origin(std::span<const double> x, std::span<double> out)
{
    std::fill(out.begin(), out.begin() + x.size(), 0.);
}

void project_nonneg(std::span<const double> x, std::span<double> out)
{
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::max(x[i], 0.);
}

void project_nonpos(std::span<const double> x, std::span<double> out)
{
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::min(x[i], 0.);
}

void project_box01(std::span<const double> x, std::span<double> out)
{
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::clamp(x[i], 0., 1.);
}

void project_box11(std::span<const double> x, std::span<double> out)
{
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::clamp(x[i], -1., 1.);
}

void project_ones(std::span<const double> x, std::span<double> out)
{
    std::fill(out.begin(), out.begin() + x.size(), 1.);
}

void project_unit_ball(std::span<const double> x, std::span<double> out)
{
    const double nrm = std::sqrt(sum_sq(x));
    const double s = nrm > 1. ? 1. / nrm : 1.;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = s * x[i];
}

// Euclidean projection onto the probability simplex (sort-based).
void project_simplex(std::span<const double> x, std::span<double> out)
{
    std::vector<double> s(x.begin(), x.end());
    std::sort(s.begin(), s.end(), std::greater<>());
    double cumsum = 0., theta = 0.;
    for (std::size_t k = 0; k < s.size(); ++k) {
        cumsum += s[k];
        const double t = (cumsum - 1.) / static_cast<double>(k + 1);
        if (s[k] - t > 0.) theta = t;
    }
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::max(x[i] - theta, 0.);
}

double gauge_whole(std::span<const double>) { return 0.; }

double gauge_origin(std::span<const double> u) { return all_zero(u) ? 0. : kInf; }

double gauge_linf(std::span<const double> u)
{
    double m = 0.;
    for (double v : u) m = std::max(m, std::abs(v));
    return m;
}

double gauge_l2(std::span<const double> u) { return std::sqrt(sum_sq(u)); }

double gauge_nonpos_cone(std::span<const double> u)
{
    return std::all_of(u.begin(), u.end(), [](double v) { return v <= 0.; }) ? 0. : kInf;
}

double gauge_nonneg_cone(std::span<const double> u)
{
    return std::all_of(u.begin(), u.end(), [](double v) { return v >= 0.; }) ? 0. : kInf;
}

// ---------------------------------------------------------------------------
// Kernels.
// ---------------------------------------------------------------------------

// x -> sum x_l^2
double square(std::span<const double> x, std::span<double> buff, Mode mode, double prox_param,
              double)
{
    const std::size_t n = x.size();
    switch (mode) {
    case Mode::Grad:
        for (std::size_t i = 0; i < n; ++i) buff[i] = 2. * x[i];
        return buff[0];
    case Mode::Prox:
        for (std::size_t i = 0; i < n; ++i) buff[i] = x[i] / (1. + 2. * prox_param);
        return buff[0];
    case Mode::Lipschitz:
        return 2.;
    case Mode::ValConj:
        return 0.25 * sum_sq(x);
    case Mode::IsKink:
        return 0.;
    default:
        return sum_sq(x);
    }
}

// x -> sum |x_l|
double abs_atom(std::span<const double> x, std::span<double> buff, Mode mode, double prox_param,
                double)
{
    const std::size_t n = x.size();
    switch (mode) {
    case Mode::Prox:
        for (std::size_t i = 0; i < n; ++i) {
            const double v = x[i];
            buff[i] = v > prox_param ? v - prox_param : (v < -prox_param ? v + prox_param : 0.);
        }
        return buff[0];
    case Mode::ValConj:
        for (double v : x)
            if (std::abs(v) > 1. + kMembershipTol) return kInf;
        return 0.;
    case Mode::IsKink:
        return all_zero(x) ? 1. : 0.;
    default: {
        double val = 0.;
        for (double v : x) val += std::abs(v);
        return val;
    }
    }
}

// x -> sum x_l
double linear(std::span<const double> x, std::span<double> buff, Mode mode, double prox_param,
              double)
{
    const std::size_t n = x.size();
    switch (mode) {
    case Mode::Grad:
        for (std::size_t i = 0; i < n; ++i) buff[i] = 1.;
        return buff[0];
    case Mode::Prox:
        for (std::size_t i = 0; i < n; ++i) buff[i] = x[i] - prox_param;
        return buff[0];
    case Mode::Lipschitz:
        return 0.;
    case Mode::ValConj:
        for (double v : x)
            if (std::abs(v - 1.) > kMembershipTol) return kInf;
        return 0.;
    case Mode::IsKink:
        return 0.;
    default:
        return std::accumulate(x.begin(), x.end(), 0.);
    }
}

double log1pexp_scalar(double v) { return v > 0. ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

double sigmoid(double v)
{
    if (v >= 0.) return 1. / (1. + std::exp(-v));
    const double e = std::exp(v);
    return e / (1. + e);
}

// Root of p + t * sigmoid(p) = v, bracketed in [v - t, v]. Newton, with a
// bisection step whenever Newton leaves the bracket or stops halving the step.
double log1pexp_prox_scalar(double v, double t)
{
    double lo = v - t, hi = v;
    double p = v - t * sigmoid(v);
    double step = hi - lo, step_old = step;
    for (int it = 0; it < 200; ++it) {
        const double s = sigmoid(p);
        const double phi = p + t * s - v;
        if (phi == 0.) break;
        if (phi > 0.) hi = p;
        else lo = p;
        const double dphi = 1. + t * s * (1. - s);
        const double newton = p - phi / dphi;
        step_old = step;
        if (newton <= lo || newton >= hi || std::abs(2. * phi) > std::abs(step_old * dphi)) {
            step = 0.5 * (hi - lo);
            p = lo + step;
        } else {
            step = std::abs(newton - p);
            p = newton;
        }
        if (step <= 1e-16 * (1. + std::abs(p))) break;
    }
    return p;
}

double entropy_term(double y) { return y > 0. ? y * std::log(y) : 0.; }

// x -> sum log(1 + exp(x_l))
double log1pexp(std::span<const double> x, std::span<double> buff, Mode mode, double prox_param,
                double)
{
    const std::size_t n = x.size();
    switch (mode) {
    case Mode::Grad:
        for (std::size_t i = 0; i < n; ++i) buff[i] = sigmoid(x[i]);
        return buff[0];
    case Mode::Prox:
        for (std::size_t i = 0; i < n; ++i) buff[i] = log1pexp_prox_scalar(x[i], prox_param);
        return buff[0];
    case Mode::Lipschitz:
        return 0.25;
    case Mode::ValConj: {
        double val = 0.;
        for (double v : x) {
            if (v < -kMembershipTol || v > 1. + kMembershipTol) return kInf;
            const double y = std::clamp(v, 0., 1.);
            val += entropy_term(y) + entropy_term(1. - y);
        }
        return val;
    }
    case Mode::IsKink:
        return 0.;
    default: {
        double val = 0.;
        for (double v : x) val += log1pexp_scalar(v);
        return val;
    }
    }
}

void softmax(std::span<const double> x, std::span<double> out)
{
    const double m = *std::max_element(x.begin(), x.end());
    double s = 0.;
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = std::exp(x[i] - m);
        s += out[i];
    }
    for (std::size_t i = 0; i < x.size(); ++i) out[i] /= s;
}

double logsumexp_value(std::span<const double> x)
{
    const double m = *std::max_element(x.begin(), x.end());
    double s = 0.;
    for (double v : x) s += std::exp(v - m);
    return m + std::log(s);
}

// argmin_p lse(p) + |p - x|^2 / (2t), damped Newton with a Sherman-Morrison solve.
void logsumexp_prox(std::span<const double> x_in, double t, std::span<double> out)
{
    const std::size_t n = x_in.size();
    const std::vector<double> x(x_in.begin(), x_in.end());
    std::vector<double> p(x), s(n), g(n), d(n), trial(n), ts(n);
    auto objective = [&](std::span<const double> z) {
        double q = 0.;
        for (std::size_t i = 0; i < n; ++i) q += (z[i] - x[i]) * (z[i] - x[i]);
        return logsumexp_value(z) + q / (2. * t);
    };
    double obj = objective(p);
    for (int it = 0; it < 100; ++it) {
        softmax(p, s);
        double gnorm = 0.;
        for (std::size_t i = 0; i < n; ++i) {
            g[i] = s[i] + (p[i] - x[i]) / t;
            gnorm = std::max(gnorm, std::abs(g[i]));
        }
        if (gnorm <= 1e-15 * (1. + 1. / t)) break;
        // H = diag(1/t + s) - s s^T
        double sds = 0., sdg = 0.;
        for (std::size_t i = 0; i < n; ++i) {
            const double di = 1. / t + s[i];
            sds += s[i] * s[i] / di;
            sdg += s[i] * g[i] / di;
        }
        const double coef = sdg / (1. - sds);
        double slope = 0.;
        for (std::size_t i = 0; i < n; ++i) {
            const double di = 1. / t + s[i];
            d[i] = (g[i] + s[i] * coef) / di;
            slope += g[i] * d[i];
        }
        double step = 1.;
        double new_obj = obj;
        // a decrement below round-off of the objective means Newton is in its quadratic regime
        const bool local = slope <= 1e-13 * (1. + std::abs(obj));
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = p[i] - step * d[i];
            new_obj = objective(trial);
            if (local || new_obj <= obj - 1e-4 * step * slope || step < 1e-12) break;
            step *= 0.5;
        }
        double move = 0.;
        for (std::size_t i = 0; i < n; ++i) move = std::max(move, std::abs(trial[i] - p[i]));
        p = trial;
        obj = new_obj;
        if (move <= 1e-16 * (1. + *std::max_element(p.begin(), p.end(),
                                                     [](double a, double b) { return std::abs(a) < std::abs(b); })))
            break;
    }
    std::copy(p.begin(), p.end(), out.begin());
}

// x -> log(sum exp(x_l))
double logsumexp(std::span<const double> x, std::span<double> buff, Mode mode, double prox_param,
                 double)
{
    switch (mode) {
    case Mode::Grad:
        softmax(x, buff);
        return buff[0];
    case Mode::Prox:
        logsumexp_prox(x, prox_param, buff);
        return buff[0];
    case Mode::Lipschitz:
        // largest eigenvalue of diag(p) - p p^T never exceeds 1/2
        return 0.5;
    case Mode::ValConj: {
        double total = 0., val = 0.;
        for (double v : x) {
            if (v < -kMembershipTol) return kInf;
            total += v;
            val += entropy_term(std::max(v, 0.));
        }
        if (std::abs(total - 1.) > kMembershipTol * static_cast<double>(x.size() + 1)) return kInf;
        return val;
    }
    case Mode::IsKink:
        return 0.;
    default:
        return logsumexp_value(x);
    }
}

// x -> |x|_2
double norm2(std::span<const double> x, std::span<double> buff, Mode mode, double prox_param,
             double)
{
    const std::size_t n = x.size();
    switch (mode) {
    case Mode::Prox: {
        const double nrm = std::sqrt(sum_sq(x));
        const double s = nrm > prox_param ? 1. - prox_param / nrm : 0.;
        for (std::size_t i = 0; i < n; ++i) buff[i] = s * x[i];
        return buff[0];
    }
    case Mode::ValConj:
        return sum_sq(x) > (1. + kMembershipTol) * (1. + kMembershipTol) ? kInf : 0.;
    case Mode::IsKink:
        return all_zero(x) ? 1. : 0.;
    default:
        return std::sqrt(sum_sq(x));
    }
}

// indicator of [0,1]^n
double box_zero_one(std::span<const double> x, std::span<double> buff, Mode mode, double,
                    double)
{
    switch (mode) {
    case Mode::Prox:
        project_box01(x, buff);
        return buff[0];
    case Mode::ValConj: {
        double val = 0.;
        for (double v : x) val += std::max(v, 0.);
        return val;
    }
    case Mode::IsKink:
        return std::all_of(x.begin(), x.end(), [](double v) { return v == 0. || v == 1.; }) ? 1.
                                                                                             : 0.;
    default:
        for (double v : x)
            if (v < -kMembershipTol || v > 1. + kMembershipTol) return kInf;
        return 0.;
    }
}

// indicator of the nonnegative orthant
double nonneg(std::span<const double> x, std::span<double> buff, Mode mode, double, double)
{
    switch (mode) {
    case Mode::Prox:
        project_nonneg(x, buff);
        return buff[0];
    case Mode::ValConj:
        for (double v : x)
            if (v > kMembershipTol) return kInf;
        return 0.;
    case Mode::IsKink:
        return all_zero(x) ? 1. : 0.;
    default:
        for (double v : x)
            if (v < -kMembershipTol) return kInf;
        return 0.;
    }
}

// indicator of the nonpositive orthant
double nonpos(std::span<const double> x, std::span<double> buff, Mode mode, double, double)
{
    switch (mode) {
    case Mode::Prox:
        project_nonpos(x, buff);
        return buff[0];
    case Mode::ValConj:
        for (double v : x)
            if (v < -kMembershipTol) return kInf;
        return 0.;
    case Mode::IsKink:
        return all_zero(x) ? 1. : 0.;
    default:
        for (double v : x)
            if (v > kMembershipTol) return kInf;
        return 0.;
    }
}

// indicator of {0}
double eq_const(std::span<const double> x, std::span<double> buff, Mode mode, double, double)
{
    switch (mode) {
    case Mode::Prox:
        project_origin(x, buff);
        return buff[0];
    case Mode::ValConj:
        return 0.;
    case Mode::IsKink:
        return all_zero(x) ? 1. : 0.;
    default:
        for (double v : x)
            if (std::abs(v) > kMembershipTol) return kInf;
        return 0.;
    }
}

// x -> 0
double zero(std::span<const double> x, std::span<double> buff, Mode mode, double, double)
{
    switch (mode) {
    case Mode::Grad:
        std::fill(buff.begin(), buff.begin() + x.size(), 0.);
        return 0.;
    case Mode::Prox:
        project_whole(x, buff);
        return buff[0];
    case Mode::Lipschitz:
        return 0.;
    case Mode::ValConj:
        for (double v : x)
            if (std::abs(v) > kMembershipTol) return kInf;
        return 0.;
    default:
        return 0.;
    }
}

constexpr unsigned kSmooth = bits({Mode::Val, Mode::Grad, Mode::Prox, Mode::ProxConj,
                                   Mode::Lipschitz, Mode::ValConj, Mode::IsKink});
constexpr unsigned kProxOnly = bits({Mode::Val, Mode::Prox, Mode::ProxConj, Mode::ValConj,
                                     Mode::IsKink});

const std::array<Atom, 11> kCatalog{{
    {"square", kSmooth, square, nullptr, project_whole, gauge_whole, PolarKind::None},
    {"abs", kProxOnly, abs_atom, nullptr, project_box11, gauge_linf, PolarKind::DualLinf},
    {"linear", kSmooth, linear, nullptr, project_ones, nullptr, PolarKind::None},
    {"log1pexp", kSmooth, log1pexp, nullptr, project_box01, nullptr, PolarKind::None},
    {"logsumexp", kSmooth, logsumexp, nullptr, project_simplex, nullptr, PolarKind::None},
    {"norm2", kProxOnly, norm2, nullptr, project_unit_ball, gauge_l2, PolarKind::DualL2},
    {"box_zero_one", kProxOnly, box_zero_one, project_box01, project_whole, gauge_whole,
     PolarKind::Orthant},
    {"nonneg", kProxOnly, nonneg, project_nonneg, project_nonpos, gauge_nonpos_cone,
     PolarKind::None},
    {"nonpos", kProxOnly, nonpos, project_nonpos, project_nonneg, gauge_nonneg_cone,
     PolarKind::None},
    {"eq_const", kProxOnly, eq_const, project_origin, project_whole, gauge_whole,
     PolarKind::None},
    {"zero", kSmooth, zero, nullptr, project_origin, gauge_origin, PolarKind::None},
}};

std::size_t edit_distance(std::string_view a, std::string_view b)
{
    std::vector<std::size_t> row(b.size() + 1);
    std::iota(row.begin(), row.end(), 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

}  // namespace

std::string_view mode_name(Mode mode)
{
    switch (mode) {
    case Mode::Val: return "VAL";
    case Mode::Grad: return "GRAD";
    case Mode::Prox: return "PROX";
    case Mode::ProxConj: return "PROX_CONJ";
    case Mode::Lipschitz: return "LIPSCHITZ";
    case Mode::ValConj: return "VAL_CONJ";
    case Mode::IsKink: return "IS_KINK";
    }
    return "?";
}

bool Atom::supports(Mode mode) const { return (capabilities & capability_bit(mode)) != 0; }

void prox_conj(const Atom& atom, std::span<const double> x, double sigma, double c,
               std::span<double> out)
{
    const std::size_t n = x.size();
    thread_local std::vector<double> scaled;
    scaled.resize(n);
    for (std::size_t i = 0; i < n; ++i) scaled[i] = x[i] / sigma;
    atom.kernel(scaled, scaled, Mode::Prox, c / sigma, 1.);
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - sigma * scaled[i];
}

double eval_atom(const Atom& atom, std::span<const double> x, std::span<double> buff, Mode mode,
                 double prox_param, double prox_param2)
{
    if (!atom.supports(mode))
        throw AtomError("atom '" + std::string(atom.name) + "' does not support mode " +
                        std::string(mode_name(mode)));
    if (x.empty()) throw AtomError("atom '" + std::string(atom.name) + "' evaluated on an empty block");
    const bool vector_out = mode == Mode::Grad || mode == Mode::Prox || mode == Mode::ProxConj;
    if (vector_out && buff.size() < x.size())
        throw AtomError("output buffer of size " + std::to_string(buff.size()) +
                        " is too short for a block of size " + std::to_string(x.size()));
    if ((mode == Mode::Prox || mode == Mode::ProxConj) && !(prox_param > 0.))
        throw AtomError("prox parameter must be positive");
    if (mode == Mode::ProxConj) {
        if (!(prox_param2 > 0.)) throw AtomError("atom weight must be positive");
        prox_conj(atom, x, prox_param, prox_param2, buff);
        return buff[0];
    }
    return atom.kernel(x, buff, mode, prox_param, prox_param2);
}

double val_conj_smoothed(const Atom& atom, std::span<const double> y, double eps)
{
    if (!atom.supports(Mode::Prox))
        throw AtomError("atom '" + std::string(atom.name) + "' has no PROX; cannot approximate its conjugate");
    const std::size_t n = y.size();
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = y[i] / eps;
    atom.kernel(p, p, Mode::Prox, 1. / eps, 1.);
    double inner = 0., sq = 0.;
    for (std::size_t i = 0; i < n; ++i) {
        inner += p[i] * y[i];
        sq += p[i] * p[i];
    }
    const double fp = atom.kernel(p, {}, Mode::Val, 1., 1.);
    return inner - fp - 0.5 * eps * sq;
}

double val_conj(const Atom& atom, std::span<const double> y)
{
    if (atom.supports(Mode::ValConj)) return atom.kernel(y, {}, Mode::ValConj, 1., 1.);
    return val_conj_smoothed(atom, y);
}

const Atom* catalog_find(std::string_view name)
{
    for (const Atom& a : kCatalog)
        if (a.name == name) return &a;
    return nullptr;
}

std::vector<std::string_view> catalog_names()
{
    std::vector<std::string_view> out;
    for (const Atom& a : kCatalog) out.push_back(a.name);
    return out;
}

std::string_view nearest_atom_name(std::string_view name)
{
    std::string_view best = kCatalog[0].name;
    std::size_t best_d = edit_distance(name, best);
    for (const Atom& a : kCatalog) {
        const std::size_t d = edit_distance(name, a.name);
        if (d < best_d) {
            best_d = d;
            best = a.name;
        }
    }
    return best;
}

const Atom& catalog_lookup(std::string_view name)
{
    if (const Atom* a = catalog_find(name)) return *a;
    std::string known;
    for (const Atom& a : kCatalog) {
        if (!known.empty()) known += ", ";
        known += a.name;
    }
    throw AtomError("unknown atom '" + std::string(name) + "' (did you mean '" +
                    std::string(nearest_atom_name(name)) + "'?); known atoms: " + known);
}

}  // namespace cdsolve
