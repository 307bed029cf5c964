#include <catch2/catch.hpp>

#include <random>

#include "cracklat/greens.hpp"
#include "cracklat/potential_kernel.hpp"

using namespace cracklat;

TEST_CASE("continuum crack Green's function") {
    // straight evaluation through the square-root images
    CHECK(continuum_green({1, 0}, {4, 0}) == Approx(std::log(3.0) / (2.0 * M_PI)).margin(1e-12));

    // vanishes approaching the crack from either side
    CHECK(std::abs(continuum_green({-3.0, 1e-9}, {2.0, 1.0})) < 1e-8);
    CHECK(std::abs(continuum_green({-3.0, -1e-9}, {2.0, 1.0})) < 1e-8);

    // symmetric in its arguments
    std::mt19937 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const Vec2 x{double(int(rng() % 41)) - 20.0 + 0.3, double(int(rng() % 41)) - 20.0 + 0.7};
        const Vec2 s{double(int(rng() % 41)) - 20.0 + 0.1, double(int(rng() % 41)) - 20.0 - 0.4};
        CHECK(continuum_green(x, s) == Approx(continuum_green(s, x)).margin(1e-13));
    }

    CHECK_THROWS_AS(continuum_green({-1.0, 0.0}, {2.0, 1.0}), std::domain_error);
    CHECK_THROWS_AS(continuum_green({2.0, 1.0}, {2.0, 1.0}), std::domain_error);
}

TEST_CASE("exact boundary differences from the kernel") {
    CHECK(boundary_difference({0, 1}, Direction::PlusX) ==
          Approx(1.0 / M_PI - 0.25).margin(1e-12));
    CHECK(boundary_difference({0, 1}, Direction::PlusY) ==
          Approx(0.75 - 2.0 / M_PI).margin(1e-12));
    CHECK(boundary_difference({0, 5}, Direction::PlusY) < 1.0 / M_PI - 0.25);
    CHECK_THROWS_AS(boundary_difference({-1, 0}, Direction::PlusX), std::domain_error);
}

TEST_CASE("crack Green's function defining properties") {
    const GreensField f = solve_crack_green({3, 2}, 48, 1e-10);
    CHECK(f.solve_residual <= 1e-10);

    // crack values are exact zeros, enforced by elimination
    f.field.for_each_stored([&](DualSite, CellKind k, double v) {
        if (k == CellKind::Crack) CHECK(v == 0.0);
    });

    // the five-point equation holds at interior off-crack sites
    std::mt19937 rng(9);
    for (int trial = 0; trial < 300; ++trial) {
        const DualSite l{int(rng() % 95) - 47, int(rng() % 95) - 47};
        if (l.i * l.i + l.j * l.j > 47 * 47 || l.on_crack()) continue;
        CHECK(std::abs(f.defect(l)) < 1e-9);
    }

    // every bond difference stays below 1/2
    CHECK(max_bond_difference(f) < 0.5);

    CHECK_THROWS_AS(solve_crack_green({-4, 0}, 48), std::invalid_argument);
    CHECK_THROWS_AS(solve_crack_green({40, 1}, 48), std::invalid_argument);
}

TEST_CASE("green gradient values") {
    const GreensField f = solve_crack_green({15, 9}, 48, 1e-10);

    // bond inside the crack line: both ends pinned to zero
    CHECK(grad_green(f, {{-5, 0}, Direction::MinusX}) == 0.0);

    // at a source deep in the bulk the homogeneous value dominates
    CHECK(grad_green(f, {{15, 9}, Direction::PlusX}) == Approx(-0.25).margin(0.02));

    CHECK_THROWS_AS(grad_green(f, {{60, 0}, Direction::PlusX}), std::out_of_range);
}

TEST_CASE("decay envelope is finite and bounded") {
    const GreensField f = solve_crack_green({3, 2}, 48, 1e-10);
    const DecayEnvelope env = decay_envelope(f);
    CHECK(env.C_max > 0.0);
    CHECK(env.C_max < 5.0);
}

TEST_CASE("discrete maximum principle") {
    // constant data reproduces the constant
    const auto flat = check_max_principle([](DualSite) { return 0.7; }, 24, 1e-11);
    CHECK(flat.boundary_constant);
    CHECK(flat.interior_max == Approx(0.7).margin(1e-8));
    CHECK(flat.holds);

    // random data keeps the interior strictly below the boundary
    std::mt19937_64 rng(31);
    for (int inst = 0; inst < 5; ++inst) {
        const std::uint64_t salt = rng();
        const auto rep = check_max_principle(
            [salt](DualSite l) {
                std::uint64_t h = salt ^ (std::uint64_t(std::uint32_t(l.i)) << 32 |
                                          std::uint64_t(std::uint32_t(l.j)));
                h ^= h >> 33;
                h *= 0xff51afd7ed558ccdULL;
                h ^= h >> 33;
                return 2.0 * (double(h >> 11) * 0x1p-53) - 1.0;
            },
            24, 1e-11);
        CHECK(rep.holds);
        CHECK(rep.strict);
        CHECK_FALSE(rep.boundary_constant);
    }
}

TEST_CASE("max principle reproduces the boundary-value difference field") {
    // data -u^h on the crack and zero on the ring reproduces the corrector
    // difference field u^c, whose sup sits at the crack point next to the
    // sources.
    const DualSite s{0, 1};
    const Direction rho = Direction::PlusX;
    const DualSite sp{s.i + dx(rho), s.j + dy(rho)};
    const int R = 48;

    // u^c boundary data: -u^h = 1/4 (a(. - s - rho) - a(. - s)) on the crack
    const auto data = [&](DualSite l) {
        if (!l.on_crack()) return 0.0;
        return 0.25 * (potential_kernel(l.i - sp.i, l.j - sp.j) -
                       potential_kernel(l.i - s.i, l.j - s.j));
    };
    const auto rep = check_max_principle(data, R, 1e-11);
    const double bound = boundary_difference(s, rho);
    CHECK(rep.boundary_max == Approx(bound).margin(1e-12));
    CHECK(rep.interior_max < bound);

    // cross-check against u^c built from two independent Green's solves
    const GreensField g1 = solve_crack_green(sp, R, 1e-11);
    const GreensField g0 = solve_crack_green(s, R, 1e-11);
    const auto uc = [&](DualSite m) {
        const double gdiff = g1.value(m) - g0.value(m);
        const double hdiff = -0.25 * (potential_kernel(m.i - sp.i, m.j - sp.j) -
                                      potential_kernel(m.i - s.i, m.j - s.j));
        return gdiff - hdiff;
    };
    for (const DualSite m : {DualSite{3, 4}, DualSite{-6, 2}, DualSite{1, -5}})
        CHECK(std::abs(uc(m)) < bound);
}

TEST_CASE("truncation error shrinks when the radius doubles") {
    const DualSite a{3, 2}, b{-1, 4};
    const GreensField a32 = solve_crack_green(a, 32, 1e-11);
    const GreensField b32 = solve_crack_green(b, 32, 1e-11);
    const GreensField a64 = solve_crack_green(a, 64, 1e-11);
    const GreensField b64 = solve_crack_green(b, 64, 1e-11);
    const double d32 = std::abs(a32.value(b) - b32.value(a));
    const double d64 = std::abs(a64.value(b) - b64.value(a));
    CHECK(d64 < d32);
    CHECK(d64 * 2.0 <= d32);

    // interior values themselves converge at first order or better
    const GreensField a128 = solve_crack_green(a, 128, 1e-11);
    double change_lo = 0.0, change_hi = 0.0;
    for (int j = -8; j <= 8; ++j)
        for (int i = -8; i <= 8; ++i) {
            const DualSite l{i, j};
            if (l.on_crack()) continue;
            change_lo = std::max(change_lo, std::abs(a64.value(l) - a32.value(l)));
            change_hi = std::max(change_hi, std::abs(a128.value(l) - a64.value(l)));
        }
    CHECK(change_hi * 2.0 <= change_lo);
}

TEST_CASE("greens cache reuses solves") {
    GreensCache cache;
    const auto f1 = cache.get({3, 2}, 32, 1e-10);
    const auto f2 = cache.get({3, 2}, 32, 1e-10);
    CHECK(f1.get() == f2.get());
    const auto f3 = cache.get({3, 2}, 48, 1e-10);
    CHECK(f1.get() != f3.get());
}
