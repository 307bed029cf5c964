#pragma once

// Potential kernel a(m) of the simple random walk on Z^2 and the
// full-lattice Green's function differences built from it.
//
// a is the unique function with a(0) = 0, discrete-harmonic away from the
// origin, Delta_d a(0) = 4, invariant under the square's symmetries and with
// a(m) - (2/pi) log|m| bounded. Values inside a fixed radius come from the
// classic diagonal-seeded recursion; the march amplifies roundoff by roughly
// a factor 3 + 2*sqrt(2) per column, so it runs in extended precision and
// only the final doubles are kept. Beyond the table the logarithmic
// asymptote is used.

#include <cmath>
#include <cstdlib>
#include <mutex>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "cracklat/lattice.hpp"

namespace cracklat {

namespace detail {

using BigFloat =
    boost::multiprecision::number<boost::multiprecision::cpp_bin_float<300>>;

class KernelTable {
public:
    static const KernelTable& instance() {
        static KernelTable table;
        return table;
    }

    static constexpr int kRadius = 160;

    // Requires 0 <= n <= m <= kRadius.
    double at(int m, int n) const { return vals_[tri_index(m, n)]; }

private:
    static std::size_t tri_index(int m, int n) {
        return std::size_t(m) * (m + 1) / 2 + n;
    }

    KernelTable() {
        const int N = kRadius;
        std::vector<BigFloat> t(tri_index(N, N) + 1);

        const BigFloat pi = acos(BigFloat(-1));
        const BigFloat four_over_pi = BigFloat(4) / pi;

        // Diagonal closed form: a(n,n) = (4/pi) * sum_{j<=n} 1/(2j-1).
        BigFloat harmonic = 0;
        t[tri_index(0, 0)] = 0;
        for (int n = 1; n <= N; ++n) {
            harmonic += BigFloat(1) / BigFloat(2 * n - 1);
            t[tri_index(n, n)] = four_over_pi * harmonic;
        }
        t[tri_index(1, 0)] = 1;

        // March column by column using harmonicity at (m, n).
        for (int m = 1; m < N; ++m) {
            t[tri_index(m + 1, m)] = 2 * t[tri_index(m, m)] - t[tri_index(m, m - 1)];
            for (int n = m - 1; n >= 1; --n) {
                t[tri_index(m + 1, n)] = 4 * t[tri_index(m, n)] - t[tri_index(m - 1, n)] -
                                         t[tri_index(m, n + 1)] - t[tri_index(m, n - 1)];
            }
            t[tri_index(m + 1, 0)] =
                4 * t[tri_index(m, 0)] - t[tri_index(m - 1, 0)] - 2 * t[tri_index(m, 1)];
        }

        vals_.resize(t.size());
        for (std::size_t k = 0; k < t.size(); ++k) vals_[k] = double(t[k]);
    }

    std::vector<double> vals_;
};

// a(x) ~ (2/pi) log|x| + (2*gamma + log 8)/pi, relative error O(|x|^-2).
inline double kernel_asymptotic(double x, double y) {
    constexpr double kEulerGamma = 0.57721566490153286061;
    const double kappa = (2.0 * kEulerGamma + std::log(8.0)) / M_PI;
    return (1.0 / M_PI) * std::log(x * x + y * y) + kappa;
}

}  // namespace detail

inline double potential_kernel(int mx, int my) {
    int m = std::abs(mx);
    int n = std::abs(my);
    if (m < n) std::swap(m, n);
    if (m <= detail::KernelTable::kRadius) return detail::KernelTable::instance().at(m, n);
    return detail::kernel_asymptotic(double(m), double(n));
}

inline double potential_kernel(DualSite offset) { return potential_kernel(offset.i, offset.j); }

// G^h(m + rho, s) - G^h(m, s) for the full-lattice Green's function,
// i.e. -1/4 of the corresponding kernel difference. Magnitude is at most
// 1/4, attained exactly on the bonds incident to the source.
inline double ghom_diff(DualSite m, DualSite s, Direction rho) {
    const double a_to = potential_kernel(m.i + dx(rho) - s.i, m.j + dy(rho) - s.j);
    const double a_from = potential_kernel(m.i - s.i, m.j - s.j);
    return -0.25 * (a_to - a_from);
}

}  // namespace cracklat
