#include <catch2/catch.hpp>

#include <complex>
#include <random>

#include "cracklat/lattice.hpp"

using namespace cracklat;

namespace {

// Independent route to omega through the principal complex square root.
Vec2 omega_ref(Vec2 p) {
    const std::complex<double> w = std::sqrt(std::complex<double>(p.x, p.y));
    return {w.real(), w.imag()};
}

}  // namespace

TEST_CASE("site positions and flank membership") {
    CHECK(PrimalSite{0, 0}.position().x == Approx(0.5));
    CHECK(PrimalSite{0, 0}.position().y == Approx(0.5));
    CHECK_FALSE(PrimalSite{0, 0}.on_flank());

    CHECK(PrimalSite{-2, 0}.on_upper_flank());   // position (-3/2, 1/2)
    CHECK(PrimalSite{-1, -1}.on_lower_flank());  // position (-1/2, -1/2)
    CHECK_FALSE(PrimalSite{-1, 0}.on_lower_flank());
    CHECK_FALSE(PrimalSite{0, 0}.on_upper_flank());  // position (1/2, 1/2) is bulk

    CHECK(DualSite{0, 0}.on_crack());
    CHECK(DualSite{-7, 0}.on_crack());
    CHECK_FALSE(DualSite{1, 0}.on_crack());
    CHECK_FALSE(DualSite{-7, 1}.on_crack());
}

TEST_CASE("neighbor directions") {
    const auto bulk = neighbor_directions({0, 0});
    CHECK(bulk.size() == 4);

    const auto upper = neighbor_directions({-2, 0});  // position (-3/2, 1/2)
    REQUIRE(upper.size() == 3);
    CHECK(upper.dirs[0] == Direction::PlusX);
    CHECK(upper.dirs[1] == Direction::MinusX);
    CHECK(upper.dirs[2] == Direction::PlusY);

    const auto lower = neighbor_directions({-1, -1});  // position (-1/2, -1/2)
    REQUIRE(lower.size() == 3);
    CHECK(lower.dirs[2] == Direction::MinusY);
}

TEST_CASE("bond set is symmetric and never crosses the crack") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const PrimalSite l{int(rng() % 41) - 20, int(rng() % 41) - 20};
        for (Direction d : neighbor_directions(l)) {
            const Bond b{l, d};
            // reversed bond exists from the head site
            bool found = false;
            for (Direction e : neighbor_directions(b.head()))
                if (e == reversed(d)) found = true;
            CHECK(found);
            // and the segment never crosses {y = 0, x < 0}
            const Vec2 t = b.tail.position(), h = b.head().position();
            if (t.y * h.y < 0.0) CHECK(t.x > 0.0);
        }
    }
}

TEST_CASE("omega examples and branch convention") {
    const Vec2 a = omega({1.0, 0.0});
    CHECK(a.x == Approx(1.0));
    CHECK(a.y == Approx(0.0).margin(1e-15));

    const Vec2 b = omega({-1.0, 0.0});  // theta = pi picks the upper branch
    CHECK(b.x == Approx(0.0).margin(1e-15));
    CHECK(b.y == Approx(1.0));

    const Vec2 c = omega({0.0, 4.0});
    CHECK(c.x == Approx(std::sqrt(2.0)));
    CHECK(c.y == Approx(std::sqrt(2.0)));

    CHECK_THROWS_AS(omega({0.0, 0.0}), std::domain_error);

    std::mt19937 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const Vec2 p{double(int(rng() % 2001)) - 1000.0, double(int(rng() % 2001)) - 1000.0};
        if (p.x == 0.0 && p.y == 0.0) continue;
        const Vec2 w = omega(p);
        const Vec2 r = omega_ref(p);
        CHECK(w.x == Approx(r.x).margin(1e-12 * (1.0 + w.norm())));
        CHECK(w.y == Approx(r.y).margin(1e-12 * (1.0 + w.norm())));
        CHECK(w.norm() == Approx(std::sqrt(p.norm())));
        CHECK(w.x >= -1e-12);  // image lies in the right half-plane
    }
}

TEST_CASE("flank images are separated in the straightened plane") {
    for (int i = -40; i <= -1; ++i) {
        const Vec2 up = omega(PrimalSite{i, 0}.position());
        const Vec2 down = omega(PrimalSite{i, -1}.position());
        CHECK(up.x >= 0.0);
        CHECK(down.x >= 0.0);
        CHECK(up.x < 0.5);
        CHECK(up.y > 0.5);
        CHECK(down.y < -0.5);
    }
}

TEST_CASE("separation examples") {
    const Separation s = separation(DualSite{-3, 1}, DualSite{-3, -1});
    CHECK(s.d == 2.0);
    // closed form: both images are (0.28484..., +-1.75532...)
    const Vec2 w = omega_ref({-3.0, 1.0});
    CHECK(s.d_w == Approx(2.0 * std::abs(w.y)).epsilon(1e-12));
    CHECK(s.d_w == Approx(3.51064).epsilon(1e-4));
    CHECK(s.d == Approx(s.d_w * s.d_tilde_w).epsilon(1e-12));

    // points at equal small offsets far down the positive axis: d_w -> 0
    double prev = 1e9;
    for (int k : {10, 100, 1000, 10000}) {
        const Separation t = separation(Vec2{double(k), 2.0}, Vec2{double(k), -2.0});
        CHECK(t.d == Approx(4.0));
        CHECK(t.d_w < prev);
        prev = t.d_w;
    }
    CHECK(prev < 0.05);

    const Separation z = separation(DualSite{4, -9}, DualSite{4, -9});
    CHECK(z.d == 0.0);
    CHECK(z.d_w == 0.0);
}

TEST_CASE("square root identity on random pairs") {
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    for (int n = 0; n < 10000; ++n) {
        const DualSite a{int(rng() % 2001) - 1000, int(rng() % 2001) - 1000};
        const DualSite b{int(rng() % 2001) - 1000, int(rng() % 2001) - 1000};
        const Separation s = separation(a, b);
        worst = std::max(worst, std::abs(s.d - s.d_w * s.d_tilde_w) / std::max(1.0, s.d));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("d_w grows like the square root of the distance along a ray") {
    const Vec2 b{1.0, 0.0};
    for (double t : {1e3, 1e5, 1e7}) {
        const Vec2 a{t * std::cos(0.7), t * std::sin(0.7)};
        const Separation s = separation(a, b);
        CHECK(s.d_w / std::sqrt(t) == Approx(1.0).epsilon(2.0 / std::sqrt(t)));
    }
}

TEST_CASE("minimum separation predicate") {
    // close in the plane but separated by the crack
    CHECK(min_separation_ok(std::vector<DualSite>{{-5, 1}, {-5, -1}}, 3.0));
    // genuinely close on the same side
    CHECK_FALSE(min_separation_ok(std::vector<DualSite>{{4, 1}, {5, 1}}, 3.0));
    // single core is vacuously fine
    CHECK(min_separation_ok(std::vector<DualSite>{{7, -2}}, 100.0));

    CHECK_THROWS_AS(min_separation_ok(std::vector<DualSite>{{4, 1}, {4, 1}}, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(min_separation_ok(std::vector<DualSite>{{-3, 0}, {4, 1}}, 1.0),
                    std::invalid_argument);
}

TEST_CASE("plaquette traversal and crack flag") {
    const Plaquette p = plaquette({1, 1});
    CHECK_FALSE(p.on_crack);
    // traversal through positions (1/2,1/2) -> (1/2,3/2) -> (3/2,3/2) -> (3/2,1/2)
    CHECK(p.bonds[0].tail == PrimalSite{0, 0});
    CHECK(p.bonds[0].dir == Direction::PlusY);
    CHECK(p.bonds[1].tail == PrimalSite{0, 1});
    CHECK(p.bonds[1].dir == Direction::PlusX);
    CHECK(p.bonds[2].tail == PrimalSite{1, 1});
    CHECK(p.bonds[2].dir == Direction::MinusY);
    CHECK(p.bonds[3].tail == PrimalSite{1, 0});
    CHECK(p.bonds[3].dir == Direction::MinusX);
    // closed loop
    CHECK(p.bonds[3].head() == p.bonds[0].tail);
    for (int k = 0; k < 4; ++k) CHECK(bond_in_lattice(p.bonds[k]));

    const Plaquette q = plaquette({0, 0});
    CHECK(q.on_crack);
    CHECK_FALSE(bond_in_lattice(q.bonds[0]));  // left vertical bond is erased

    const Plaquette r = plaquette({-3, 2});
    CHECK_FALSE(r.on_crack);
    for (int k = 0; k < 4; ++k) CHECK(bond_in_lattice(r.bonds[k]));
}
