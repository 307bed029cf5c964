#pragma once

// The loaded-crack problem: square-root predictor, Newton equilibration of
// y = K u_c + y_mu + u with a compactly supported corrector, and the
// crack-opening diagnostics.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "cracklat/dislocation.hpp"
#include "cracklat/energy.hpp"
#include "cracklat/errors.hpp"
#include "cracklat/greens.hpp"
#include "cracklat/primal_field.hpp"

namespace cracklat {

// Crack predictor K sqrt(r) sin(theta/2): the second component of omega,
// scaled by the stress intensity factor.
inline double predictor(double K, Vec2 position) { return K * omega(position).y; }

inline double predictor(double K, PrimalSite l) { return predictor(K, l.position()); }

inline PrimalField predictor_field(double K, double window_radius) {
    PrimalField f = PrimalField::disk(window_radius);
    const int half = f.box_half();
    for (int j = -half; j <= half; ++j)
        for (int i = -half; i <= half; ++i) {
            const PrimalSite s{i, j};
            if (f.has(s)) f.set(s, predictor(K, s));
        }
    return f;
}

struct Solution {
    double K = 0.0;
    double lambda = 1.0;
    int radius = 0;
    double tol = 0.0;
    DislocationConfig config;
    DisplacementField y;    // K u_c + y_mu + u
    DisplacementField y_mu; // dislocation part alone (zero field when no cores)
    PrimalField u;          // corrector, zero outside radius/2
    double residual_max = 0.0;      // max residual on |position| <= radius/4
    double support_residual = 0.0;  // max residual on the corrector support
    long newton_iterations = 0;
    long linear_iterations = 0;
    double margin = 0.0;
    double green_residual = 0.0;
    std::vector<double> energy_trace;  // energy difference to the start, per step
};

// Minimises E(K u_c + y_mu + u, K u_c + y_mu) over correctors u supported in
// the half-radius disk. The energy is piecewise quadratic, so Newton steps
// solve the graph Laplacian exactly; steps are shortened rather than allowed
// to push a bond strain across the half-integer band, and a strain entering
// that band is reported as a bifurcation.
inline Solution equilibrate(const DislocationConfig& cfg, double K, int radius,
                            double tol = 1e-8, long max_iter = 50,
                            const EnergyModel& model = {}, GreensCache* cache = nullptr,
                            double green_tol = 1e-10, double eta = 1e-8) {
    if (K < 0.0) throw std::invalid_argument("equilibrate: K must be nonnegative");
    if (radius < 16) throw std::invalid_argument("equilibrate: radius too small");
    if (!(tol > 0.0)) throw std::invalid_argument("equilibrate: tol must be positive");
    cfg.validate();

    Solution sol;
    sol.K = K;
    sol.lambda = model.lambda;
    sol.radius = radius;
    sol.tol = tol;
    sol.config = cfg;

    if (cfg.cores.empty()) {
        sol.y_mu.values = PrimalField::disk(double(radius) - 2.0, 0.0);
        sol.y_mu.gauge = {0, 0};
    } else {
        const SuperposedField g = superpose(cfg, radius, green_tol, cache);
        sol.green_residual = g.solve_residual;
        const StrainForm alpha = strain_field(g.field);
        sol.y_mu = recover_displacement(alpha, {0, 0});
    }

    DisplacementField y;
    y.gauge = sol.y_mu.gauge;
    y.values = PrimalField(sol.y_mu.values.window_radius());
    sol.y_mu.values.for_each(
        [&](PrimalSite s, double v) { y.values.set(s, predictor(K, s) + v); });

    const double Ru = 0.5 * radius;
    const Window support{Ru};
    const Window guard{Ru + 1.0};
    const Window quarter{0.25 * radius};

    {
        const StabilityMargin m0 = stability_margin_report(y.values, guard);
        if (m0.margin <= eta)
            throw BifurcationError("equilibrate: initial strain inside the half-integer band",
                                   m0.argmin,
                                   y.values.value(m0.argmin.head()) - y.values.value(m0.argmin.tail));
    }

    // Corrector support and the linear problem for Newton steps.
    const int half = int(std::ceil(Ru)) + 2;
    detail::MaskedGrid grid(detail::MaskedGrid::Kind::PrimalCracked, half);
    std::vector<PrimalSite> free_sites;
    for (int j = -half; j <= half; ++j)
        for (int i = -half; i <= half; ++i) {
            const PrimalSite s{i, j};
            if (support.contains(s) && y.values.has(s)) {
                grid.mark_free(i, j);
                free_sites.push_back(s);
            }
        }

    sol.u = PrimalField(Ru);
    for (const PrimalSite& s : free_sites) sol.u.set(s, 0.0);
    const PrimalField y_start = y.values;

    const double cg_tol = 0.5 * tol / model.lambda;
    const long cg_cap = 50L * radius;
    std::vector<double> du(grid.size(), 0.0);

    for (long iter = 0;; ++iter) {
        const ResidualReport rep = residual(y.values, support, model);
        sol.support_residual = rep.max_norm;
        if (rep.max_norm <= tol) {
            const ResidualReport inner = residual(y.values, quarter, model);
            sol.residual_max = inner.max_norm;
            break;
        }
        if (iter >= max_iter)
            throw SolverError("equilibrate: Newton iteration cap reached", rep.max_norm, iter);

        grid.clear_rhs();
        for (const PrimalSite& s : free_sites)
            grid.add_rhs(s.i, s.j, -rep.per_site.value(s) / model.lambda);
        std::fill(du.begin(), du.end(), 0.0);
        const detail::CgStats stats = grid.solve(du, cg_tol, cg_cap);
        sol.linear_iterations += stats.iterations;

        // Longest admissible step: stop strains eta short of Z + 1/2.
        double t_max = 1.0;
        Bond blocking{{0, 0}, Direction::PlusX};
        detail::for_each_window_bond(guard, [&](const Bond& b) {
            if (!y.values.has(b.tail) || !y.values.has(b.head())) return;
            const double dut = grid.is_free(b.tail.i, b.tail.j) ? du[grid.index(b.tail.i, b.tail.j)] : 0.0;
            const double duh = grid.is_free(b.head().i, b.head().j) ? du[grid.index(b.head().i, b.head().j)] : 0.0;
            const double ds = duh - dut;
            if (ds == 0.0) return;
            const double s0 = y.values.value(b.head()) - y.values.value(b.tail);
            const double centre = std::nearbyint(s0);
            const double room = ds > 0.0 ? (centre + 0.5 - eta) - s0 : s0 - (centre - 0.5 + eta);
            const double t_hit = room / std::abs(ds);
            if (t_hit < t_max) {
                t_max = t_hit;
                blocking = b;
            }
        });
        if (t_max <= 1e-9)
            throw BifurcationError("equilibrate: bond strain entered the half-integer band",
                                   blocking,
                                   y.values.value(blocking.head()) - y.values.value(blocking.tail));
        const double t = t_max >= 1.0 ? 1.0 : 0.95 * t_max;

        for (const PrimalSite& s : free_sites) {
            const double step = t * du[grid.index(s.i, s.j)];
            y.values.add(s, step);
            sol.u.add(s, step);
        }
        ++sol.newton_iterations;
        sol.energy_trace.push_back(energy_diff(y.values, y_start, guard, model));
    }

    sol.margin = stability_margin(y.values, support);
    sol.y = y;
    return sol;
}

struct OpeningPoint {
    int k = 0;
    double opening = 0.0;
};

// opening(k) = y(-k-1/2, +1/2) - y(-k-1/2, -1/2) along the crack flanks.
inline std::vector<OpeningPoint> crack_opening_profile(const DisplacementField& y, int k_max) {
    std::vector<OpeningPoint> out;
    out.reserve(std::size_t(k_max) + 1);
    for (int k = 0; k <= k_max; ++k) {
        const PrimalSite up{-k - 1, 0};
        const PrimalSite down{-k - 1, -1};
        out.push_back({k, y.value(up) - y.value(down)});
    }
    return out;
}

struct OpeningFit {
    double K_est = 0.0;
    double exponent = 0.0;
};

// Least-squares fit of log(opening) against log(k + 1/2); the amplitude of
// the power law is twice the stress intensity factor.
inline OpeningFit fit_opening(std::span<const OpeningPoint> band) {
    if (band.size() < 10)
        throw std::invalid_argument("fit_opening: need at least 10 points in the fit band");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const OpeningPoint& p : band) {
        if (!(p.opening > 0.0)) throw FitError("fit_opening: non-positive opening in fit band");
        const double x = std::log(p.k + 0.5);
        const double y = std::log(p.opening);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = double(band.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    return {0.5 * std::exp(intercept), slope};
}

inline OpeningFit fit_opening(const std::vector<OpeningPoint>& band) {
    return fit_opening(std::span<const OpeningPoint>(band));
}

}  // namespace cracklat
