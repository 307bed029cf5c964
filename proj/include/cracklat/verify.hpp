#pragma once

// Verification suite: twelve numbered checks covering kernel exactness, the
// crack Green's function, the dislocation equilibria and the loaded-crack
// solve. All randomness is seeded and every reported number is deterministic
// for a fixed seed, so reports are byte-identical between runs.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cracklat/crack_solver.hpp"
#include "cracklat/dislocation.hpp"
#include "cracklat/energy.hpp"
#include "cracklat/greens.hpp"
#include "cracklat/io.hpp"
#include "cracklat/oracles.hpp"
#include "cracklat/potential_kernel.hpp"

namespace cracklat {

struct VerifyOptions {
    int radius = 256;  // full truncation radius; half/quarter scales derive from it
    double tol = 1e-10;
    std::uint64_t seed = 1;
    int threads = 0;  // 0: CRACK_LATTICE_THREADS env var, else hardware up to 4
};

struct CheckResult {
    int id = 0;
    std::string name;
    bool pass = false;
    ordered_json metrics;
};

struct VerifyReport {
    VerifyOptions options;
    std::vector<CheckResult> checks;
    bool all_pass = false;
    double runtime_seconds = 0.0;  // informational; not part of the report JSON

    ordered_json to_json() const {
        ordered_json j;
        j["radius"] = options.radius;
        j["tol"] = options.tol;
        j["seed"] = options.seed;
        ordered_json arr = ordered_json::array();
        for (const auto& c : checks)
            arr.push_back(ordered_json{
                {"id", c.id}, {"name", c.name}, {"pass", c.pass}, {"metrics", c.metrics}});
        j["checks"] = arr;
        j["all_pass"] = all_pass;
        return j;
    }
};

namespace detail {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("CRACK_LATTICE_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return int(std::min(hw == 0 ? 1u : hw, 4u));
}

template <class Fn>
void parallel_for(int threads, int n, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    const int workers = std::min(threads, n);
    for (int t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            for (int i; (i = next.fetch_add(1)) < n;) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform in [0, 1) from the top 53 bits; pinned bit pattern, no library
// distribution involved.
inline double rnd_unit(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1p-53; }

inline int rnd_int(std::mt19937_64& rng, int lo, int hi) {
    return lo + int(rng() % std::uint64_t(hi - lo + 1));
}

inline double dist_to_dual_crack(DualSite s) {
    if (s.i <= 0) return std::abs(double(s.j));
    return std::hypot(double(s.i), double(s.j));
}

struct VerifyContext {
    VerifyOptions opts;
    int threads = 1;
    GreensCache cache;

    int radius() const { return opts.radius; }
    int half_radius() const { return opts.radius / 2; }
};

inline CheckResult check_kernel_exactness(VerifyContext&) {
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult res{1, "kernel exactness vs quadrature oracle", false, {}};

    double max_dev = 0.0;
    for (int n = 0; n <= 20; ++n)
        for (int m = n; m <= 20; ++m) {
            if (m * m + n * n > 400) continue;
            const double dev = std::abs(potential_kernel(m, n) - oracle::potential_kernel_quadrature(m, n));
            max_dev = std::max(max_dev, dev);
        }
    const double a11_dev = std::abs(potential_kernel(1, 1) - 4.0 / M_PI);
    const double a20_dev = std::abs(potential_kernel(2, 0) - (4.0 - 8.0 / M_PI));
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    res.pass = max_dev <= 1e-10 && a11_dev <= 1e-12 && a20_dev <= 1e-12 && seconds < 10.0;
    res.metrics["max_oracle_deviation"] = max_dev;
    res.metrics["a11_deviation"] = a11_dev;
    res.metrics["a20_deviation"] = a20_dev;
    return res;
}

inline CheckResult check_boundary_constants(VerifyContext& ctx) {
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult res{2, "exact boundary differences", false, {}};

    const double case1 = boundary_difference({0, 1}, Direction::PlusX);
    const double case2 = boundary_difference({0, 1}, Direction::PlusY);
    const double ref1 = 1.0 / M_PI - 0.25;
    const double ref2 = 0.75 - 2.0 / M_PI;

    std::mt19937_64 rng(ctx.opts.seed ^ 0x0202020202ULL);
    double deep_max = 0.0;
    int sampled = 0;
    while (sampled < 20) {
        const DualSite s{rnd_int(rng, -15, 15), (rnd_unit(rng) < 0.5 ? 1 : -1) * rnd_int(rng, 2, 12)};
        const Direction rho = kDirections[std::size_t(rnd_int(rng, 0, 3))];
        const DualSite sp{s.i + dx(rho), s.j + dy(rho)};
        if (s.on_crack() || sp.on_crack()) continue;
        if (std::min(dist_to_dual_crack(s), dist_to_dual_crack(sp)) < 2.0) continue;
        deep_max = std::max(deep_max, boundary_difference(s, rho));
        ++sampled;
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    res.pass = std::abs(case1 - ref1) <= 1e-9 && std::abs(case2 - ref2) <= 1e-9 &&
               deep_max < 0.0683099 && seconds < 1.0;
    res.metrics["case1"] = case1;
    res.metrics["case2"] = case2;
    res.metrics["case1_deviation"] = std::abs(case1 - ref1);
    res.metrics["case2_deviation"] = std::abs(case2 - ref2);
    res.metrics["deep_max"] = deep_max;
    return res;
}

inline CheckResult check_ghom_sup(VerifyContext&) {
    CheckResult res{3, "full-lattice gradient sup", false, {}};
    const DualSite s{0, 0};
    double at_source = 0.0;
    double elsewhere = 0.0;
    for (int j = -50; j <= 50; ++j)
        for (int i = -50; i <= 50; ++i) {
            if (i * i + j * j > 2500) continue;
            const DualSite m{i, j};
            for (Direction rho : kDirections) {
                const double g = std::abs(ghom_diff(m, s, rho));
                const bool incident = (m == s) || (DualSite{i + dx(rho), j + dy(rho)} == s);
                if (incident)
                    at_source = std::max(at_source, g);
                else
                    elsewhere = std::max(elsewhere, g);
            }
        }
    // The sup 1/4 is attained exactly on the bonds incident to the source
    // and nowhere else.
    res.pass = std::abs(at_source - 0.25) <= 1e-14 && elsewhere < 0.25;
    res.metrics["at_source"] = at_source;
    res.metrics["max_elsewhere"] = elsewhere;
    return res;
}

inline const std::vector<DualSite>& symmetry_sources() {
    static const std::vector<DualSite> sources = {{3, 2}, {-1, 4}, {5, -7}, {-6, 3}, {2, -2}};
    return sources;
}

inline CheckResult check_green_defining(VerifyContext& ctx) {
    CheckResult res{4, "crack Green's function defining properties", false, {}};
    const int R = ctx.radius();
    const int Rh = ctx.half_radius();

    const auto f = ctx.cache.get({3, 2}, R, ctx.opts.tol);

    bool crack_exact = true;
    f->field.for_each_stored([&](DualSite, CellKind k, double v) {
        if (k == CellKind::Crack && v != 0.0) crack_exact = false;
    });

    std::mt19937_64 rng(ctx.opts.seed ^ 0x0404040404ULL);
    double defect_max = 0.0;
    int sampled = 0;
    while (sampled < 1000) {
        const int i = rnd_int(rng, -(R - 1), R - 1);
        const int j = rnd_int(rng, -(R - 1), R - 1);
        if (i * i + j * j > (R - 1) * (R - 1)) continue;
        if (DualSite{i, j}.on_crack()) continue;
        defect_max = std::max(defect_max, std::abs(f->defect({i, j})));
        ++sampled;
    }

    const auto& sources = symmetry_sources();
    std::vector<std::shared_ptr<const GreensField>> full(sources.size()), half(sources.size());
    parallel_for(ctx.threads, int(sources.size()) * 2, [&](int k) {
        const std::size_t s = std::size_t(k) / 2;
        if (k % 2 == 0)
            full[s] = ctx.cache.get(sources[s], R, ctx.opts.tol);
        else
            half[s] = ctx.cache.get(sources[s], Rh, ctx.opts.tol);
    });

    double sym_full = 0.0, sym_half = 0.0;
    for (std::size_t a = 0; a < sources.size(); ++a)
        for (std::size_t b = a + 1; b < sources.size(); ++b) {
            sym_full = std::max(sym_full, std::abs(full[a]->value(sources[b]) - full[b]->value(sources[a])));
            sym_half = std::max(sym_half, std::abs(half[a]->value(sources[b]) - half[b]->value(sources[a])));
        }

    res.pass = crack_exact && defect_max <= 1e-8 && sym_full * 2.0 <= sym_half;
    res.metrics["crack_values_exactly_zero"] = crack_exact;
    res.metrics["interior_defect_max"] = defect_max;
    res.metrics["symmetry_discrepancy_half_radius"] = sym_half;
    res.metrics["symmetry_discrepancy_full_radius"] = sym_full;
    res.metrics["symmetry_ratio"] = sym_full > 0.0 ? sym_half / sym_full : 0.0;
    return res;
}

inline CheckResult check_sup_bound(VerifyContext& ctx) {
    CheckResult res{5, "strain sup bound for near-crack sources", false, {}};
    const int R = ctx.radius();
    std::vector<DualSite> sources;
    for (int d = 1; d <= 10; ++d) sources.push_back({-6, d});

    std::vector<double> sup(sources.size(), 0.0);
    parallel_for(ctx.threads, int(sources.size()), [&](int k) {
        const auto f = ctx.cache.get(sources[std::size_t(k)], R, ctx.opts.tol);
        sup[std::size_t(k)] = max_bond_difference(*f);
    });

    double overall = 0.0;
    for (double s : sup) overall = std::max(overall, s);
    res.pass = overall <= 0.49;
    res.metrics["max_bond_difference"] = overall;
    res.metrics["per_source"] = sup;
    return res;
}

inline CheckResult check_decay_stability(VerifyContext& ctx) {
    CheckResult res{6, "decay envelope stability under radius doubling", false, {}};
    const int R = ctx.radius();
    const int Rh = ctx.half_radius();
    const std::vector<DualSite> sources = {{3, 2}, {-5, 1}, {4, -3}};

    std::vector<double> c_half(sources.size()), c_full(sources.size());
    parallel_for(ctx.threads, int(sources.size()) * 2, [&](int k) {
        const std::size_t s = std::size_t(k) / 2;
        if (k % 2 == 0)
            c_full[s] = decay_envelope(*ctx.cache.get(sources[s], R, ctx.opts.tol)).C_max;
        else
            c_half[s] = decay_envelope(*ctx.cache.get(sources[s], Rh, ctx.opts.tol)).C_max;
    });

    double worst_rel = 0.0;
    for (std::size_t s = 0; s < sources.size(); ++s)
        worst_rel = std::max(worst_rel, std::abs(c_full[s] - c_half[s]) / c_half[s]);
    res.pass = worst_rel <= 0.10;
    res.metrics["C_half_radius"] = c_half;
    res.metrics["C_full_radius"] = c_full;
    res.metrics["worst_relative_change"] = worst_rel;
    return res;
}

inline CheckResult check_max_principle_random(VerifyContext& ctx) {
    CheckResult res{7, "discrete maximum principle", false, {}};
    const int R = 64;
    const int instances = 100;

    std::vector<double> margin(instances, 0.0);
    std::vector<std::uint8_t> ok(instances, 0);
    parallel_for(ctx.threads, instances, [&](int inst) {
        const std::uint64_t inst_seed = splitmix64(ctx.opts.seed ^ (0x0707ULL + std::uint64_t(inst)));
        const auto data = [inst_seed](DualSite l) {
            const std::uint64_t h = splitmix64(
                inst_seed ^ (std::uint64_t(std::uint32_t(l.i)) << 32 | std::uint64_t(std::uint32_t(l.j))));
            return 2.0 * (double(h >> 11) * 0x1p-53) - 1.0;
        };
        const MaxPrincipleReport rep = check_max_principle(data, R, 1e-10);
        ok[std::size_t(inst)] = rep.holds && rep.strict && !rep.boundary_constant;
        margin[std::size_t(inst)] = rep.boundary_max - rep.interior_max;
    });

    bool all_ok = true;
    double min_margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < instances; ++i) {
        all_ok = all_ok && ok[std::size_t(i)];
        min_margin = std::min(min_margin, margin[std::size_t(i)]);
    }

    // Constant data must be reproduced identically in the interior.
    const MaxPrincipleReport flat = check_max_principle([](DualSite) { return 0.37; }, R, 1e-10);
    const bool flat_ok = std::abs(flat.interior_max - 0.37) <= 1e-8;

    res.pass = all_ok && flat_ok;
    res.metrics["instances"] = instances;
    res.metrics["min_margin"] = min_margin;
    res.metrics["constant_interior_max"] = flat.interior_max;
    return res;
}

struct EquilibriumDiagnostics {
    double winding_core_err = 0.0;
    double winding_off_core = 0.0;
    double divergence_max = 0.0;
    double alpha_inf = 0.0;
    double energy_residual = 0.0;
};

inline EquilibriumDiagnostics dislocation_diagnostics(const DislocationConfig& cfg,
                                                      const StrainForm& alpha,
                                                      const DisplacementField& y_mu, int radius) {
    EquilibriumDiagnostics d;
    const int W = radius / 2;
    const std::int64_t W2 = std::int64_t(W) * W;
    for (int j = -W; j <= W; ++j)
        for (int i = -W; i <= W; ++i) {
            if (std::int64_t(i) * i + std::int64_t(j) * j > W2) continue;
            const DualSite c{i, j};
            const auto w = plaquette_winding(alpha, c);
            if (!w) continue;
            double expected = 0.0;
            for (const auto& core : cfg.cores)
                if (core.site == c) expected = double(core.b);
            if (expected != 0.0)
                d.winding_core_err = std::max(d.winding_core_err, std::abs(*w - expected));
            else
                d.winding_off_core = std::max(d.winding_off_core, std::abs(*w));
        }

    const double W2d = double(W) * W;
    for (int j = -W - 1; j <= W + 1; ++j)
        for (int i = -W - 1; i <= W + 1; ++i) {
            const PrimalSite l{i, j};
            if (l.position().norm_sq() > W2d) continue;
            d.divergence_max = std::max(d.divergence_max, std::abs(site_divergence(alpha, l)));
        }

    d.alpha_inf = alpha.max_abs(double(W));
    d.energy_residual = residual(y_mu, Window{double(W)}, EnergyModel{1.0}).max_norm;
    return d;
}

inline CheckResult check_dislocation_equilibrium(VerifyContext& ctx) {
    CheckResult res{8, "dislocation equilibrium (winding, divergence, sup, residual)", false, {}};
    const int R = ctx.radius();

    const DislocationConfig single{{{{3, 2}, +1}}};
    const DislocationConfig pair{{{{-5, 1}, +1}, {{-5, -1}, -1}}};

    ordered_json per_cfg = ordered_json::array();
    bool pass = true;
    for (const DislocationConfig& cfg : {single, pair}) {
        const SuperposedField g = superpose(cfg, R, ctx.opts.tol, &ctx.cache);
        const StrainForm alpha = strain_field(g.field);
        const DisplacementField y_mu = recover_displacement(alpha, {0, 0});
        const EquilibriumDiagnostics d = dislocation_diagnostics(cfg, alpha, y_mu, R);
        pass = pass && d.winding_core_err <= 1e-6 && d.winding_off_core <= 1e-6 &&
               d.divergence_max <= 1e-6 && d.alpha_inf <= 0.49 && d.energy_residual <= 1e-6;
        ordered_json entry{{"cores", cores_to_json(cfg)},
                           {"winding_core_err", d.winding_core_err},
                           {"winding_off_core", d.winding_off_core},
                           {"divergence_max", d.divergence_max},
                           {"alpha_inf", d.alpha_inf},
                           {"energy_residual", d.energy_residual}};
        if (std::isfinite(cfg.separation_certificate()))
            entry["separation_certificate"] = cfg.separation_certificate();
        per_cfg.push_back(entry);
    }
    res.pass = pass;
    res.metrics["configs"] = per_cfg;
    return res;
}

inline CheckResult check_gradient_consistency(VerifyContext& ctx) {
    CheckResult res{9, "residual matches finite differences of the energy", false, {}};
    const int R = ctx.radius();

    const DislocationConfig pair{{{{-5, 1}, +1}, {{-5, -1}, -1}}};
    const SuperposedField g = superpose(pair, R, ctx.opts.tol, &ctx.cache);
    const StrainForm alpha = strain_field(g.field);
    const DisplacementField y_mu = recover_displacement(alpha, {0, 0});

    // A smooth configuration away from half-integer strains: the dislocation
    // pair plus a mild crack-opening mode.
    PrimalField y = y_mu.values;
    y.for_each([&](PrimalSite s, double v) { y.set(s, v + predictor(0.03, s)); });

    const double Wq = R / 8.0;
    const Window window{Wq + 2.0};
    const ResidualReport rep = residual(y, window, EnergyModel{1.0});

    std::mt19937_64 rng(ctx.opts.seed ^ 0x0909090909ULL);
    const double h = 1e-6;
    double max_dev = 0.0;
    int sampled = 0;
    while (sampled < 100) {
        const int i = rnd_int(rng, -int(Wq), int(Wq));
        const int j = rnd_int(rng, -int(Wq), int(Wq));
        const PrimalSite l{i, j};
        if (l.position().norm() > Wq || !rep.per_site.has(l)) continue;
        PrimalField yp = y, ym = y;
        yp.add(l, h);
        ym.add(l, -h);
        const double fd = energy_diff(yp, ym, window, EnergyModel{1.0}) / (2.0 * h);
        max_dev = std::max(max_dev, std::abs(fd - rep.per_site.value(l)));
        ++sampled;
    }
    res.pass = max_dev <= 1e-7;
    res.metrics["max_deviation"] = max_dev;
    return res;
}

inline CheckResult check_plasticity_equilibrium(VerifyContext& ctx) {
    CheckResult res{10, "near-crack-tip plasticity equilibrium", false, {}};
    const int R = ctx.radius();
    const DislocationConfig cfg{{{{3, 2}, +1}}};
    const EnergyModel model{1.0};

    const Solution sol = equilibrate(cfg, 0.02, R, 1e-8, 50, model, &ctx.cache);

    const Solution sol0 = equilibrate(cfg, 0.0, R, 1e-8, 50, model, &ctx.cache);
    double u0_max = 0.0;
    sol0.u.for_each([&](PrimalSite, double v) { u0_max = std::max(u0_max, std::abs(v)); });

    // The corrector scales linearly in K while no strain changes its
    // rounding cell.
    const Solution sol_a = equilibrate(cfg, 0.005, R, 1e-8, 50, model, &ctx.cache);
    const Solution sol_b = equilibrate(cfg, 0.01, R, 1e-8, 50, model, &ctx.cache);
    double ref_scale = 0.0;
    sol.u.for_each([&](PrimalSite, double v) { ref_scale = std::max(ref_scale, std::abs(v / 0.02)); });
    double lin_dev = 0.0;
    sol.u.for_each([&](PrimalSite s, double v) {
        const double va = sol_a.u.value(s) / 0.005;
        const double vb = sol_b.u.value(s) / 0.01;
        const double vc = v / 0.02;
        lin_dev = std::max(lin_dev, std::max(std::abs(va - vc), std::abs(vb - vc)));
    });
    const double lin_rel = ref_scale > 0.0 ? lin_dev / ref_scale : 0.0;

    bool descent = true;
    for (std::size_t k = 1; k < sol.energy_trace.size(); ++k)
        descent = descent && sol.energy_trace[k] <= sol.energy_trace[k - 1] + 1e-12;

    res.pass = sol.residual_max <= 1e-8 && sol.margin > 0.0 && u0_max <= 1e-6 &&
               lin_rel <= 0.05 && descent;
    res.metrics["residual"] = sol.residual_max;
    res.metrics["margin"] = sol.margin;
    res.metrics["newton_iterations"] = sol.newton_iterations;
    res.metrics["corrector_at_K0"] = u0_max;
    res.metrics["linearity_relative_deviation"] = lin_rel;
    res.metrics["energy_descent"] = descent;
    return res;
}

inline CheckResult check_opening_law(VerifyContext& ctx) {
    CheckResult res{11, "crack opening law", false, {}};
    const int R = ctx.radius();
    const EnergyModel model{1.0};
    const int k_lo = R / 8;
    const int k_hi = std::max(R / 4, k_lo + 9);

    // Opening of the plasticity solution, measured against its own K = 0
    // dislocation background: the remainder is the loading response whose
    // amplitude encodes K. The raw opening carries the bounded (order ~0.8
    // here) dislocation flank term on top of the 2K sqrt(k) growth, which at
    // this truncation scale would swamp a direct fit; the raw profile is
    // still required to grow.
    const DislocationConfig cfg{{{{3, 2}, +1}}};
    const Solution sol = equilibrate(cfg, 0.02, R, 1e-8, 50, model, &ctx.cache);
    const auto prof_full = crack_opening_profile(sol.y, k_hi);
    const auto prof_mu = crack_opening_profile(sol.y_mu, k_hi);
    std::vector<OpeningPoint> band;
    for (int k = k_lo; k <= k_hi; ++k)
        band.push_back({k, prof_full[std::size_t(k)].opening - prof_mu[std::size_t(k)].opening});
    const OpeningFit fit = fit_opening(band);

    const bool raw_grows =
        prof_full[std::size_t(k_hi)].opening > prof_full[std::size_t(k_lo)].opening;

    // No dislocations: the raw opening itself follows the law.
    const Solution sol_m0 = equilibrate(DislocationConfig{}, 0.02, R, 1e-8, 50, model, &ctx.cache);
    const auto prof_m0 = crack_opening_profile(sol_m0.y, k_hi);
    std::vector<OpeningPoint> band_m0(prof_m0.begin() + k_lo, prof_m0.begin() + k_hi + 1);
    const OpeningFit fit_m0 = fit_opening(band_m0);

    const auto fit_ok = [](const OpeningFit& f) {
        return std::abs(f.exponent - 0.5) <= 0.05 && std::abs(f.K_est - 0.02) <= 0.002;
    };
    res.pass = fit_ok(fit) && fit_ok(fit_m0) && raw_grows;
    res.metrics["exponent"] = fit.exponent;
    res.metrics["K_est"] = fit.K_est;
    res.metrics["exponent_no_dislocations"] = fit_m0.exponent;
    res.metrics["K_est_no_dislocations"] = fit_m0.K_est;
    res.metrics["raw_opening_grows"] = raw_grows;
    res.metrics["raw_opening_at_band_ends"] =
        std::vector<double>{prof_full[std::size_t(k_lo)].opening, prof_full[std::size_t(k_hi)].opening};
    return res;
}

inline CheckResult check_separation_identity(VerifyContext& ctx) {
    CheckResult res{12, "separation distances and square-root identity", false, {}};

    bool family_a_ok = true;
    double prev = 0.0;
    double dw_far_a = 0.0;
    for (int k : {1, 10, 100, 1000, 10000}) {
        const Separation s = separation(DualSite{-k, 1}, DualSite{-k, -1});
        family_a_ok = family_a_ok && s.d == 2.0 && s.d_w > prev;
        prev = s.d_w;
        dw_far_a = s.d_w;
    }
    family_a_ok = family_a_ok && dw_far_a >= 100.0;

    bool family_b_ok = true;
    prev = std::numeric_limits<double>::infinity();
    double dw_far_b = 0.0;
    for (int k : {1, 10, 100, 1000, 10000}) {
        const Separation s = separation(DualSite{k, 2}, DualSite{k, -2});
        family_b_ok = family_b_ok && s.d == 4.0 && s.d_w < prev;
        prev = s.d_w;
        dw_far_b = s.d_w;
    }
    family_b_ok = family_b_ok && dw_far_b <= 0.05;

    std::mt19937_64 rng(ctx.opts.seed ^ 0x0c0c0c0c0cULL);
    double worst_rel = 0.0;
    for (int n = 0; n < 10000; ++n) {
        const DualSite a{rnd_int(rng, -1000, 1000), rnd_int(rng, -1000, 1000)};
        const DualSite b{rnd_int(rng, -1000, 1000), rnd_int(rng, -1000, 1000)};
        const Separation s = separation(a, b);
        const double rel = std::abs(s.d - s.d_w * s.d_tilde_w) / std::max(1.0, s.d);
        worst_rel = std::max(worst_rel, rel);
    }

    res.pass = family_a_ok && family_b_ok && worst_rel <= 1e-10;
    res.metrics["crack_separated_family_ok"] = family_a_ok;
    res.metrics["far_field_family_ok"] = family_b_ok;
    res.metrics["d_w_at_k10000_family_a"] = dw_far_a;
    res.metrics["d_w_at_k10000_family_b"] = dw_far_b;
    res.metrics["identity_worst_relative_error"] = worst_rel;
    return res;
}

}  // namespace detail

inline VerifyReport run_verification(const VerifyOptions& opts = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    detail::VerifyContext ctx{opts, detail::resolve_threads(opts.threads), {}};

    // Warm the field cache in parallel; every later check reads from it.
    {
        std::vector<std::pair<DualSite, int>> jobs;
        const int R = ctx.radius();
        const int Rh = ctx.half_radius();
        for (const DualSite& s : detail::symmetry_sources()) {
            jobs.push_back({s, R});
            jobs.push_back({s, Rh});
        }
        for (int d = 1; d <= 10; ++d) jobs.push_back({{-6, d}, R});
        for (const DualSite& s : {DualSite{-5, 1}, DualSite{4, -3}}) {
            jobs.push_back({s, R});
            jobs.push_back({s, Rh});
        }
        jobs.push_back({{-5, -1}, R});
        detail::parallel_for(ctx.threads, int(jobs.size()), [&](int k) {
            ctx.cache.get(jobs[std::size_t(k)].first, jobs[std::size_t(k)].second, opts.tol);
        });
    }

    VerifyReport report;
    report.options = opts;
    report.checks.push_back(detail::check_kernel_exactness(ctx));
    report.checks.push_back(detail::check_boundary_constants(ctx));
    report.checks.push_back(detail::check_ghom_sup(ctx));
    report.checks.push_back(detail::check_green_defining(ctx));
    report.checks.push_back(detail::check_sup_bound(ctx));
    report.checks.push_back(detail::check_decay_stability(ctx));
    report.checks.push_back(detail::check_max_principle_random(ctx));
    report.checks.push_back(detail::check_dislocation_equilibrium(ctx));
    report.checks.push_back(detail::check_gradient_consistency(ctx));
    report.checks.push_back(detail::check_plasticity_equilibrium(ctx));
    report.checks.push_back(detail::check_opening_law(ctx));
    report.checks.push_back(detail::check_separation_identity(ctx));

    report.all_pass = true;
    for (const auto& c : report.checks) report.all_pass = report.all_pass && c.pass;
    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace cracklat
