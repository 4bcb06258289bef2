#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cdsolve {

// Evaluation modes understood by every atom function.
enum class Mode {
    Val,
    Grad,
    Prox,
    ProxConj,
    Lipschitz,
    ValConj,
    IsKink,
};

std::string_view mode_name(Mode mode);

constexpr double kInf = std::numeric_limits<double>::infinity();

// Slack used by set-membership tests of indicator atoms and of conjugates
// whose domain is a set.
constexpr double kMembershipTol = 1e-12;

// Smoothing parameter for approximate conjugate values.
constexpr double kValConjEps = 1e-9;

/*
 * Raw atom kernel. Contract:
 *   Val       returns f(x)                         (buff unused)
 *   Grad      writes grad f(x) into buff
 *   Prox      writes prox_{p1 f}(x) into buff       (x and buff may alias)
 *   Lipschitz returns the Lipschitz constant of grad f
 *   ValConj   returns f*(x)
 *   IsKink    returns 1 when x is a nondifferentiability point of f whose
 *             subdifferential has nonempty interior, 0 otherwise
 * ProxConj is never passed to a kernel; eval_atom derives it from Prox.
 */
using AtomKernel = double (*)(std::span<const double> x, std::span<double> buff, Mode mode,
                              double prox_param, double prox_param2);

// Projection of x onto a convex set, written into out (may alias x).
using SetProjection = void (*)(std::span<const double> x, std::span<double> out);

// Gauge of a closed convex set containing the origin (may be +inf).
using SetGauge = double (*)(std::span<const double> u);

// Shape of sigma°_{∂f(p)} at a kink point p, used by safe screening.
enum class PolarKind {
    None,      // atom does not take part in screening
    DualLinf,  // ∂f(p) = [-1,1]^d, polar is the l_inf norm
    DualL2,    // ∂f(p) = unit l2 ball, polar is the l2 norm
    Orthant,   // ∂f(p) is an orthant (indicator vertex), polar is 0 on it, +inf off it
};

struct Atom {
    std::string_view name;
    unsigned capabilities = 0;
    AtomKernel kernel = nullptr;
    // Projection onto dom f; nullptr means dom f is the whole space.
    SetProjection project_dom = nullptr;
    // Projection onto dom f*; nullptr means unknown.
    SetProjection project_conj_dom = nullptr;
    // Gauge of dom f*; nullptr when dom f* does not contain the origin.
    SetGauge conj_dom_gauge = nullptr;
    PolarKind polar = PolarKind::None;

    bool supports(Mode mode) const;
};

constexpr unsigned capability_bit(Mode mode) { return 1u << static_cast<unsigned>(mode); }

class AtomError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Validated dispatch. Throws AtomError on a missing capability or when
// buff is too short for a vector-valued mode. ProxConj uses
// prox_param = sigma and prox_param2 = c (the atom weight).
double eval_atom(const Atom& atom, std::span<const double> x, std::span<double> buff, Mode mode,
                 double prox_param = 1.0, double prox_param2 = 1.0);

// prox of sigma * (c f)^* at x via Moreau's identity:
//   prox_{sigma (c f)*}(x) = x - sigma * prox_{(c / sigma) f}(x / sigma)
// out may alias x.
void prox_conj(const Atom& atom, std::span<const double> x, double sigma, double c,
               std::span<double> out);

// f*(y) ≈ <p, y> - f(p) - eps/2 |p|^2 with p = prox_{f/eps}(y/eps).
double val_conj_smoothed(const Atom& atom, std::span<const double> y, double eps = kValConjEps);

// f*(y) from the exact kernel when available, otherwise the smoothed approximation.
double val_conj(const Atom& atom, std::span<const double> y);

const Atom& catalog_lookup(std::string_view name);
const Atom* catalog_find(std::string_view name);
std::vector<std::string_view> catalog_names();

// Closest catalog name by edit distance, for error messages.
std::string_view nearest_atom_name(std::string_view name);

}  // namespace cdsolve
