#pragma once

// 1-periodic quadratic pair energy, its first variation and Hessian action,
// and the stability margin that certifies discrete ellipticity.

#include <cmath>
#include <limits>

#include "cracklat/errors.hpp"
#include "cracklat/lattice.hpp"
#include "cracklat/primal_field.hpp"

namespace cracklat {

struct EnergyModel {
    double lambda = 1.0;
};

// Circular window around the crack tip; bonds belong to it when both
// endpoint positions do.
struct Window {
    double radius = 0.0;
    bool contains(Vec2 p) const { return p.norm_sq() <= radius * radius; }
    bool contains(PrimalSite s) const { return contains(s.position()); }
    bool contains(const Bond& b) const { return contains(b.tail) && contains(b.head()); }
};

// Signed distance of x to the nearest integer, in [-1/2, 1/2]. Exact
// half-integers resolve ties to even, which only matters at inputs that are
// flagged non-differentiable anyway.
inline double strain_fraction(double x) { return x - std::nearbyint(x); }

struct PsiEval {
    double value = 0.0;
    double derivative = 0.0;
    bool differentiable = true;
};

// psi(x) = (lambda/2) dist(x, Z)^2. At half-integers the derivative is
// set-valued; the returned slope is one selection and the flag is cleared.
inline PsiEval psi(double x, const EnergyModel& model = {}) {
    const double f = strain_fraction(x);
    return {0.5 * model.lambda * f * f, model.lambda * f, std::abs(f) != 0.5};
}

namespace detail {

template <class Fn>
void for_each_window_bond(const Window& window, Fn&& fn) {
    const int half = int(std::ceil(window.radius)) + 1;
    for (int j = -half; j <= half; ++j)
        for (int i = -half; i <= half; ++i)
            for (Direction d : {Direction::PlusX, Direction::PlusY}) {
                const Bond b{{i, j}, d};
                if (!bond_in_lattice(b) || !window.contains(b)) continue;
                fn(b);
            }
}

}  // namespace detail

// Sum over in-window bonds of psi(dy) - psi(dy_ref), each unordered bond
// counted once. Vanishes under global shifts and per-site integer jumps.
inline double energy_diff(const PrimalField& y, const PrimalField& y_ref, const Window& window,
                          const EnergyModel& model = {}) {
    double sum = 0.0;
    detail::for_each_window_bond(window, [&](const Bond& b) {
        const PrimalSite t = b.tail, h = b.head();
        if (!y.has(t) || !y.has(h) || !y_ref.has(t) || !y_ref.has(h)) return;
        const double dy = y.value(h) - y.value(t);
        const double dy_ref = y_ref.value(h) - y_ref.value(t);
        sum += psi(dy, model).value - psi(dy_ref, model).value;
    });
    return sum;
}

inline double energy_diff(const DisplacementField& y, const DisplacementField& y_ref,
                          const Window& window, const EnergyModel& model = {}) {
    return energy_diff(y.values, y_ref.values, window, model);
}

struct ResidualReport {
    PrimalField per_site;
    double max_norm = 0.0;
    PrimalSite argmax{0, 0};
};

// First variation of the energy: per-site sum of psi'(y(l) - y(l+rho)) over
// the interaction directions. Zero everywhere characterises stationarity.
// Sites whose neighbours are not all covered by y are skipped.
inline ResidualReport residual(const PrimalField& y, const Window& window,
                               const EnergyModel& model = {}) {
    ResidualReport rep;
    rep.per_site = PrimalField(window.radius);
    const int half = int(std::ceil(window.radius)) + 1;
    for (int j = -half; j <= half; ++j)
        for (int i = -half; i <= half; ++i) {
            const PrimalSite l{i, j};
            if (!window.contains(l) || !y.has(l)) continue;
            double r = 0.0;
            bool complete = true;
            for (Direction d : neighbor_directions(l)) {
                const PrimalSite h = Bond{l, d}.head();
                if (!y.has(h)) {
                    complete = false;
                    break;
                }
                const PsiEval e = psi(y.value(l) - y.value(h), model);
                if (!e.differentiable)
                    throw NonDifferentiableError("residual: bond strain at a half-integer",
                                                 {l, d}, y.value(l) - y.value(h));
                r += e.derivative;
            }
            if (!complete) continue;
            rep.per_site.set(l, r);
            if (std::abs(r) > rep.max_norm) {
                rep.max_norm = std::abs(r);
                rep.argmax = l;
            }
        }
    return rep;
}

inline ResidualReport residual(const DisplacementField& y, const Window& window,
                               const EnergyModel& model = {}) {
    return residual(y.values, window, model);
}

// Hessian action v -> lambda * (crack-respecting graph Laplacian) v, valid
// while every in-window bond strain of y keeps distance eta from Z + 1/2 so
// that psi'' = lambda on every bond. v is treated as zero off its support.
inline PrimalField hessian_apply(const PrimalField& y, const PrimalField& v, const Window& window,
                                 const EnergyModel& model = {}, double eta = 1e-8) {
    detail::for_each_window_bond(window, [&](const Bond& b) {
        if (!y.has(b.tail) || !y.has(b.head())) return;
        const double s = y.value(b.head()) - y.value(b.tail);
        if (0.5 - std::abs(strain_fraction(s)) < eta)
            throw StabilityIndeterminateError("hessian_apply: strain within eta of a half-integer",
                                              b, s);
    });
    PrimalField out(window.radius);
    const int half = int(std::ceil(window.radius)) + 1;
    for (int j = -half; j <= half; ++j)
        for (int i = -half; i <= half; ++i) {
            const PrimalSite l{i, j};
            if (!window.contains(l)) continue;
            double acc = 0.0;
            const double vl = v.value_or(l, 0.0);
            for (Direction d : neighbor_directions(l))
                acc += vl - v.value_or(Bond{l, d}.head(), 0.0);
            out.set(l, model.lambda * acc);
        }
    return out;
}

struct StabilityMargin {
    double margin = 0.5;
    Bond argmin{{0, 0}, Direction::PlusX};
};

// Minimum distance of in-window bond strains to Z + 1/2. A positive margin
// certifies strong stability: the Hessian form equals lambda ||dv||^2.
inline StabilityMargin stability_margin_report(const PrimalField& y, const Window& window) {
    StabilityMargin rep;
    detail::for_each_window_bond(window, [&](const Bond& b) {
        if (!y.has(b.tail) || !y.has(b.head())) return;
        const double s = y.value(b.head()) - y.value(b.tail);
        const double m = 0.5 - std::abs(strain_fraction(s));
        if (m < rep.margin) {
            rep.margin = m;
            rep.argmin = b;
        }
    });
    return rep;
}

inline double stability_margin(const PrimalField& y, const Window& window) {
    return stability_margin_report(y, window).margin;
}

inline double stability_margin(const DisplacementField& y, const Window& window) {
    return stability_margin_report(y.values, window).margin;
}

}  // namespace cracklat
