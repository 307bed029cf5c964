#pragma once

// Dense scalar field over a window of primal sites, with an occupancy mask.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cracklat/lattice.hpp"

namespace cracklat {

class PrimalField {
public:
    PrimalField() = default;

    explicit PrimalField(double window_radius)
        : window_(window_radius),
          half_(int(std::ceil(window_radius)) + 2),
          w_(2 * half_ + 1),
          has_(std::size_t(w_) * w_, 0),
          v_(std::size_t(w_) * w_, 0.0) {}

    // Field filled with `value` on every site of the disk |position| <= radius.
    static PrimalField disk(double radius, double value = 0.0) {
        PrimalField f(radius);
        const double r2 = radius * radius;
        for (int j = -f.half_; j <= f.half_; ++j)
            for (int i = -f.half_; i <= f.half_; ++i)
                if (PrimalSite{i, j}.position().norm_sq() <= r2) f.set({i, j}, value);
        return f;
    }

    double window_radius() const { return window_; }
    int box_half() const { return half_; }

    bool in_box(PrimalSite s) const {
        return s.i >= -half_ && s.i <= half_ && s.j >= -half_ && s.j <= half_;
    }
    bool has(PrimalSite s) const { return in_box(s) && has_[index(s)] != 0; }

    double value(PrimalSite s) const {
        if (!has(s)) throw std::out_of_range("PrimalField: site outside field");
        return v_[index(s)];
    }

    double value_or(PrimalSite s, double fallback) const {
        return has(s) ? v_[index(s)] : fallback;
    }

    void set(PrimalSite s, double value) {
        has_[index(s)] = 1;
        v_[index(s)] = value;
    }

    void add(PrimalSite s, double delta) {
        if (!has(s)) throw std::out_of_range("PrimalField: site outside field");
        v_[index(s)] += delta;
    }

    template <class Fn>
    void for_each(Fn&& fn) const {
        for (int j = -half_; j <= half_; ++j)
            for (int i = -half_; i <= half_; ++i) {
                const PrimalSite s{i, j};
                if (has_[index(s)]) fn(s, v_[index(s)]);
            }
    }

private:
    std::size_t index(PrimalSite s) const {
        return std::size_t(s.j + half_) * w_ + std::size_t(s.i + half_);
    }

    double window_ = 0.0;
    int half_ = -2;  // empty field has no addressable cells
    int w_ = 0;
    std::vector<std::uint8_t> has_;
    std::vector<double> v_;
};

// Displacement with a pinned gauge site where the value is zero. Two
// displacements integrating the same strain differ by per-site integers and
// a global constant; `closure_defect` records how far the non-tree bonds
// were from that integer consistency.
struct DisplacementField {
    PrimalField values;
    PrimalSite gauge{0, 0};
    double closure_defect = 0.0;

    bool has(PrimalSite s) const { return values.has(s); }
    double value(PrimalSite s) const { return values.value(s); }
};

}  // namespace cracklat
