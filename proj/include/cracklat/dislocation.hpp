#pragma once

// Dislocation-only equilibria: superpose crack Green's functions on the
// dual lattice, rotate the dual gradient into a primal bond-length 1-form,
// check winding and divergence, and integrate the form back to a
// displacement along a spanning tree.

#include <cstdlib>
#include <deque>
#include <future>
#include <optional>
#include <vector>

#include "cracklat/errors.hpp"
#include "cracklat/greens.hpp"
#include "cracklat/lattice.hpp"
#include "cracklat/primal_field.hpp"

namespace cracklat {

struct BurgersCore {
    DualSite site;
    int b = 1;  // Burgers sign, +1 or -1
};

struct DislocationConfig {
    std::vector<BurgersCore> cores;

    void validate() const {
        for (std::size_t i = 0; i < cores.size(); ++i) {
            if (cores[i].b != 1 && cores[i].b != -1)
                throw std::invalid_argument("DislocationConfig: Burgers sign must be +1 or -1");
            if (cores[i].site.on_crack())
                throw std::invalid_argument("DislocationConfig: core on the dual crack line");
            for (std::size_t j = i + 1; j < cores.size(); ++j)
                if (cores[i].site == cores[j].site)
                    throw std::invalid_argument("DislocationConfig: duplicate core");
        }
    }

    std::vector<DualSite> core_sites() const {
        std::vector<DualSite> out;
        out.reserve(cores.size());
        for (const auto& c : cores) out.push_back(c.site);
        return out;
    }

    // Largest threshold at which min_separation_ok still passes.
    double separation_certificate() const {
        double cert = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < cores.size(); ++i)
            for (std::size_t j = i + 1; j < cores.size(); ++j) {
                const Separation s = separation(cores[i].site, cores[j].site);
                cert = std::min(cert, std::max(s.d, s.d_w));
            }
        return cert;
    }
};

struct SuperposedField {
    DualField field;
    double solve_residual = 0.0;  // worst constituent solve
    long iterations = 0;          // summed over constituent solves
};

// Sum of signed crack Green's functions, one per core; vanishes on the dual
// crack line. Independent solves may run concurrently.
inline SuperposedField superpose(const DislocationConfig& cfg, int radius, double tol = 1e-10,
                                 GreensCache* cache = nullptr, int threads = 1) {
    cfg.validate();
    for (const auto& c : cfg.cores)
        if (c.site.position().norm() >= 0.5 * radius)
            throw std::invalid_argument("superpose: core not inside radius/2");

    SuperposedField out;
    out.field = DualField(radius);

    std::vector<std::shared_ptr<const GreensField>> parts(cfg.cores.size());
    const auto solve_one = [&](std::size_t k) {
        if (cache) return cache->get(cfg.cores[k].site, radius, tol);
        return std::make_shared<const GreensField>(
            solve_crack_green(cfg.cores[k].site, radius, tol));
    };
    if (threads > 1 && cfg.cores.size() > 1) {
        std::vector<std::future<std::shared_ptr<const GreensField>>> futs;
        futs.reserve(cfg.cores.size());
        for (std::size_t k = 0; k < cfg.cores.size(); ++k)
            futs.push_back(std::async(std::launch::async, solve_one, k));
        for (std::size_t k = 0; k < cfg.cores.size(); ++k) parts[k] = futs[k].get();
    } else {
        for (std::size_t k = 0; k < cfg.cores.size(); ++k) parts[k] = solve_one(k);
    }

    const int half = radius + 2;
    for (int j = -half; j <= half; ++j)
        for (int i = -half; i <= half; ++i) {
            const DualSite l{i, j};
            CellKind kind = CellKind::Outside;
            double sum = 0.0;
            for (std::size_t k = 0; k < parts.size(); ++k) {
                const CellKind pk = parts[k]->field.kind(l);
                if (pk == CellKind::Outside) {
                    kind = CellKind::Outside;
                    break;
                }
                kind = pk;
                sum += cfg.cores[k].b * parts[k]->field.raw(i, j);
            }
            if (kind != CellKind::Outside) out.field.set(l, kind, kind == CellKind::Crack ? 0.0 : sum);
        }
    for (const auto& part : parts) {
        out.solve_residual = std::max(out.solve_residual, part->solve_residual);
        out.iterations += part->iterations;
    }
    return out;
}

// Bond-length 1-form on the primal lattice, antisymmetric under bond
// reversal; bonds erased by the crack carry no value.
class StrainForm {
public:
    StrainForm() = default;

    explicit StrainForm(int radius)
        : radius_(radius), half_(radius + 2), w_(2 * half_ + 1),
          h_(std::size_t(w_) * w_, 0.0), v_(std::size_t(w_) * w_, 0.0),
          h_has_(std::size_t(w_) * w_, 0), v_has_(std::size_t(w_) * w_, 0) {}

    int radius() const { return radius_; }

    std::optional<double> value(const Bond& b) const {
        switch (b.dir) {
            case Direction::PlusX: return horizontal(b.tail.i, b.tail.j, +1.0);
            case Direction::MinusX: return horizontal(b.tail.i - 1, b.tail.j, -1.0);
            case Direction::PlusY: return vertical(b.tail.i, b.tail.j, +1.0);
            default: return vertical(b.tail.i, b.tail.j - 1, -1.0);
        }
    }

    void set_horizontal(int i, int j, double a) {
        h_[index(i, j)] = a;
        h_has_[index(i, j)] = 1;
    }
    void set_vertical(int i, int j, double a) {
        v_[index(i, j)] = a;
        v_has_[index(i, j)] = 1;
    }

    // Visits each present bond once in its positive orientation.
    template <class Fn>
    void for_each_present(Fn&& fn) const {
        for (int j = -half_; j <= half_; ++j)
            for (int i = -half_; i <= half_; ++i) {
                if (h_has_[index(i, j)]) fn(Bond{{i, j}, Direction::PlusX}, h_[index(i, j)]);
                if (v_has_[index(i, j)]) fn(Bond{{i, j}, Direction::PlusY}, v_[index(i, j)]);
            }
    }

    // Sup norm over bonds whose endpoints both lie inside |position| <= window.
    double max_abs(double window) const {
        const double r2 = window * window;
        double m = 0.0;
        for_each_present([&](const Bond& b, double a) {
            if (b.tail.position().norm_sq() <= r2 && b.head().position().norm_sq() <= r2)
                m = std::max(m, std::abs(a));
        });
        return m;
    }

private:
    bool in_box(int i, int j) const {
        return i >= -half_ && i <= half_ && j >= -half_ && j <= half_;
    }
    std::size_t index(int i, int j) const {
        return std::size_t(j + half_) * w_ + std::size_t(i + half_);
    }
    std::optional<double> horizontal(int i, int j, double sign) const {
        if (!in_box(i, j) || !h_has_[index(i, j)]) return std::nullopt;
        return sign * h_[index(i, j)];
    }
    std::optional<double> vertical(int i, int j, double sign) const {
        if (!in_box(i, j) || !v_has_[index(i, j)]) return std::nullopt;
        return sign * v_[index(i, j)];
    }

    int radius_ = 0;
    int half_ = -2;
    int w_ = 0;
    std::vector<double> h_, v_;
    std::vector<std::uint8_t> h_has_, v_has_;
};

// alpha(b) = g(head(b*)) - g(tail(b*)) where b* is b rotated by a right-hand
// (-90 degree) turn about the bond midpoint. The rotation direction is the
// one for which a +1 core has plaquette winding +1.
inline StrainForm strain_field(const DualField& g) {
    const int R = g.radius();
    StrainForm alpha(R);
    const int half = R + 1;
    // Only solved cells enter: interior values and the exact crack zeros.
    // The outer data band is an approximation and is not curl-compatible
    // with the solve at the strain tolerances used downstream.
    const auto solved = [&](int i, int j) {
        const CellKind k = g.kind({i, j});
        return k == CellKind::Interior || k == CellKind::Crack;
    };
    for (int j = -half; j <= half; ++j)
        for (int i = -half; i <= half; ++i) {
            // horizontal bond (i,j) -> (i+1,j): dual bond (i+1, j+1) -> (i+1, j)
            if (solved(i + 1, j) && solved(i + 1, j + 1))
                alpha.set_horizontal(i, j, g.raw(i + 1, j) - g.raw(i + 1, j + 1));
            // vertical bond (i,j) -> (i,j+1): dual bond (i, j+1) -> (i+1, j+1)
            if (bond_in_lattice({{i, j}, Direction::PlusY}) && solved(i, j + 1) &&
                solved(i + 1, j + 1))
                alpha.set_vertical(i, j, g.raw(i + 1, j + 1) - g.raw(i, j + 1));
        }
    return alpha;
}

// Sum of alpha around the plaquette in positive orientation: the discrete
// curl detecting dislocation cores. Plaquettes on the dual crack line have
// erased bonds and report no value.
inline std::optional<double> plaquette_winding(const StrainForm& alpha, DualSite c) {
    const Plaquette p = plaquette(c);
    if (p.on_crack) return std::nullopt;
    double sum = 0.0;
    for (const Bond& b : p.bonds) {
        const auto v = alpha.value(b);
        if (!v) throw std::out_of_range("plaquette_winding: bond outside strain window");
        sum += *v;
    }
    return sum;
}

// Sum of alpha over the bonds leaving a site; three terms on a crack flank.
// Vanishes at equilibrium (discrete force balance).
inline double site_divergence(const StrainForm& alpha, PrimalSite l) {
    double sum = 0.0;
    for (Direction d : neighbor_directions(l)) {
        const auto v = alpha.value({l, d});
        if (!v) throw std::out_of_range("site_divergence: bond outside strain window");
        sum += *v;
    }
    return sum;
}

// Integrates alpha along a breadth-first spanning tree from the gauge site,
// then verifies that every non-tree bond closes up to an integer (the mod-1
// consistency of a bond-length form). Ties in the tree are broken in the
// direction order +e1, -e1, +e2, -e2.
inline DisplacementField recover_displacement(const StrainForm& alpha, PrimalSite gauge,
                                              double closure_tol = 1e-6) {
    DisplacementField out;
    out.gauge = gauge;
    out.values = PrimalField(double(alpha.radius()) + 1.5);

    std::deque<PrimalSite> queue;
    out.values.set(gauge, 0.0);
    queue.push_back(gauge);
    while (!queue.empty()) {
        const PrimalSite l = queue.front();
        queue.pop_front();
        const double yl = out.values.value(l);
        for (Direction d : neighbor_directions(l)) {
            const Bond b{l, d};
            const auto a = alpha.value(b);
            if (!a) continue;
            const PrimalSite h = b.head();
            if (!out.values.in_box(h) || out.values.has(h)) continue;
            out.values.set(h, yl + *a);
            queue.push_back(h);
        }
    }

    alpha.for_each_present([&](const Bond& b, double a) {
        if (!out.values.has(b.tail) || !out.values.has(b.head())) return;
        const double mismatch = (out.values.value(b.head()) - out.values.value(b.tail)) - a;
        const double defect = std::abs(mismatch - std::nearbyint(mismatch));
        if (defect > closure_tol)
            throw InconsistentStrainError("recover_displacement: non-integer closure defect", b,
                                          defect);
        out.closure_defect = std::max(out.closure_defect, defect);
    });
    return out;
}

}  // namespace cracklat
