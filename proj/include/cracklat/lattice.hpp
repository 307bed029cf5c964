#pragma once

// Geometry of the cracked square lattice and its dual.
//
// Atoms sit at positions (i + 1/2, j + 1/2) for integer (i, j); the crack
// runs along the negative x-axis and erases every bond that would cross it.
// The dual lattice is Z^2 and the dual crack line is {i <= 0, j = 0}.
// Distances across the crack are measured through the complex square root
// map, which straightens the slit into the vertical axis.

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cracklat {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double norm() const { return std::hypot(x, y); }
    double norm_sq() const { return x * x + y * y; }
};

// Atom with position (i + 1/2, j + 1/2). The half-integer offset keeps every
// site strictly off the crack line, so flank membership is an exact integer
// test.
struct PrimalSite {
    int i = 0;
    int j = 0;

    Vec2 position() const { return {i + 0.5, j + 0.5}; }
    bool on_upper_flank() const { return j == 0 && i <= -1; }
    bool on_lower_flank() const { return j == -1 && i <= -1; }
    bool on_flank() const { return on_upper_flank() || on_lower_flank(); }

    bool operator==(const PrimalSite&) const = default;
};

// Plaquette centre at integer position (i, j).
struct DualSite {
    int i = 0;
    int j = 0;

    Vec2 position() const { return {double(i), double(j)}; }
    bool on_crack() const { return i <= 0 && j == 0; }

    bool operator==(const DualSite&) const = default;
};

enum class Direction : std::uint8_t { PlusX = 0, MinusX = 1, PlusY = 2, MinusY = 3 };

inline constexpr std::array<Direction, 4> kDirections = {
    Direction::PlusX, Direction::MinusX, Direction::PlusY, Direction::MinusY};

constexpr int dx(Direction d) { return d == Direction::PlusX ? 1 : d == Direction::MinusX ? -1 : 0; }
constexpr int dy(Direction d) { return d == Direction::PlusY ? 1 : d == Direction::MinusY ? -1 : 0; }

constexpr Direction reversed(Direction d) {
    switch (d) {
        case Direction::PlusX: return Direction::MinusX;
        case Direction::MinusX: return Direction::PlusX;
        case Direction::PlusY: return Direction::MinusY;
        default: return Direction::PlusY;
    }
}

inline std::string to_string(Direction d) {
    switch (d) {
        case Direction::PlusX: return "+e1";
        case Direction::MinusX: return "-e1";
        case Direction::PlusY: return "+e2";
        default: return "-e2";
    }
}

// Oriented nearest-neighbour bond. The reversed bond carries the opposite
// 1-form value everywhere in this library.
struct Bond {
    PrimalSite tail;
    Direction dir = Direction::PlusX;

    PrimalSite head() const { return {tail.i + dx(dir), tail.j + dy(dir)}; }
    Vec2 midpoint() const {
        Vec2 p = tail.position();
        return {p.x + 0.5 * dx(dir), p.y + 0.5 * dy(dir)};
    }
    Bond reverse() const { return {head(), reversed(dir)}; }

    bool operator==(const Bond&) const = default;
};

struct DualBond {
    DualSite tail;
    Direction dir = Direction::PlusX;

    DualSite head() const { return {tail.i + dx(dir), tail.j + dy(dir)}; }
    Vec2 midpoint() const { return {tail.i + 0.5 * dx(dir), tail.j + 0.5 * dy(dir)}; }
};

// A vertical bond crossing the erased segment {x < 0, y = 0} is not part of
// the lattice.
inline bool bond_crosses_crack(PrimalSite tail, Direction d) {
    if (d == Direction::PlusY) return tail.j == -1 && tail.i <= -1;
    if (d == Direction::MinusY) return tail.j == 0 && tail.i <= -1;
    return false;
}

inline bool bond_in_lattice(const Bond& b) { return !bond_crosses_crack(b.tail, b.dir); }

struct DirectionSet {
    std::uint8_t count = 0;
    std::array<Direction, 4> dirs{};

    const Direction* begin() const { return dirs.data(); }
    const Direction* end() const { return dirs.data() + count; }
    std::size_t size() const { return count; }
};

// Interaction directions R(l): four in the bulk, three on a crack flank.
inline DirectionSet neighbor_directions(PrimalSite l) {
    DirectionSet s;
    for (Direction d : kDirections)
        if (!bond_crosses_crack(l, d)) s.dirs[s.count++] = d;
    return s;
}

// Complex square root map with branch angle in (-pi, pi].
inline Vec2 omega(Vec2 p) {
    if (p.x == 0.0 && p.y == 0.0)
        throw std::domain_error("omega: undefined at the origin");
    if (p.y == 0.0) p.y = 0.0;  // normalise -0 so the cut itself maps with theta = +pi
    const double sqrt_r = std::sqrt(std::hypot(p.x, p.y));
    const double half = 0.5 * std::atan2(p.y, p.x);
    return {sqrt_r * std::cos(half), sqrt_r * std::sin(half)};
}

// Extension omega(0) := 0 used for the dual origin, which lies on the crack
// where every field vanishes anyway.
inline Vec2 omega_or_zero(Vec2 p) {
    if (p.x == 0.0 && p.y == 0.0) return {0.0, 0.0};
    return omega(p);
}

// Euclidean distance d, its image d_w under omega, and the companion
// d_tilde_w with the reflected image; d = d_w * d_tilde_w.
struct Separation {
    double d = 0.0;
    double d_w = 0.0;
    double d_tilde_w = 0.0;
};

namespace detail {

inline Separation separation_impl(Vec2 a, Vec2 b, double dist) {
    const Vec2 wa = omega_or_zero(a);
    const Vec2 wb = omega_or_zero(b);
    return {dist, (wa - wb).norm(), (wa + wb).norm()};
}

}  // namespace detail

inline Separation separation(Vec2 a, Vec2 b) {
    return detail::separation_impl(a, b, (a - b).norm());
}

inline Separation separation(DualSite a, DualSite b) {
    const std::int64_t di = a.i - b.i, dj = a.j - b.j;
    return detail::separation_impl(a.position(), b.position(),
                                   std::sqrt(double(di * di + dj * dj)));
}

inline Separation separation(PrimalSite a, PrimalSite b) {
    const std::int64_t di = a.i - b.i, dj = a.j - b.j;
    return detail::separation_impl(a.position(), b.position(),
                                   std::sqrt(double(di * di + dj * dj)));
}

// Minimum separation of dislocation cores: every pair must satisfy
// max{d, d_w} >= threshold. No core-to-crack separation is required.
inline bool min_separation_ok(std::span<const DualSite> cores, double threshold) {
    for (std::size_t i = 0; i < cores.size(); ++i) {
        if (cores[i].on_crack())
            throw std::invalid_argument("min_separation_ok: core on the dual crack line");
        for (std::size_t j = i + 1; j < cores.size(); ++j) {
            if (cores[i] == cores[j])
                throw std::invalid_argument("min_separation_ok: duplicate core");
            const Separation s = separation(cores[i], cores[j]);
            if (std::max(s.d, s.d_w) < threshold) return false;
        }
    }
    return true;
}

inline bool min_separation_ok(const std::vector<DualSite>& cores, double threshold) {
    return min_separation_ok(std::span<const DualSite>(cores), threshold);
}

// The four bonds bounding the unit square centred at a dual site, in the
// positive (clockwise) traversal order. Plaquettes on the dual crack line
// have at least one vertical bond erased and are flagged.
struct Plaquette {
    std::array<Bond, 4> bonds;
    bool on_crack = false;
};

inline Plaquette plaquette(DualSite c) {
    Plaquette p;
    p.bonds[0] = {{c.i - 1, c.j - 1}, Direction::PlusY};
    p.bonds[1] = {{c.i - 1, c.j}, Direction::PlusX};
    p.bonds[2] = {{c.i, c.j}, Direction::MinusY};
    p.bonds[3] = {{c.i, c.j - 1}, Direction::MinusX};
    p.on_crack = c.on_crack();
    return p;
}

}  // namespace cracklat
