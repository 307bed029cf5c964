#pragma once

// Independent reference computations for the verification suite. The kernel
// oracle integrates the semi-discrete representation by adaptive quadrature
// and never touches the recursion table; the winding oracle reads raw field
// values instead of going through the strain form.

#include <cmath>
#include <functional>

#include "cracklat/greens.hpp"
#include "cracklat/lattice.hpp"

namespace cracklat::oracle {

namespace detail {

// Integrand of a(M, N) = (2/pi) int_0^pi (1 - e^{-M xi} cos(N k)) / sinh(xi) dk
// with cosh(xi) = 2 - cos(k), written in forms stable near k = 0.
inline double kernel_integrand(double k, int M, int N) {
    if (k < 1e-9) return double(M);
    const double sh = std::sin(0.5 * k);
    const double c = 1.0 + 2.0 * sh * sh;  // 2 - cos k
    const double sinh_xi = 2.0 * sh * std::sqrt(1.0 + sh * sh);
    const double exp_neg_xi = 1.0 / (c + sinh_xi);
    const double em = std::pow(exp_neg_xi, M);
    return (1.0 - em * std::cos(N * k)) / sinh_xi;
}

inline double simpson(double a, double fa, double fm, double b, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double fa,
                               double b, double fb, double m, double fm, double whole, double tol,
                               int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(a, fa, flm, m, fm);
    const double right = simpson(m, fm, frm, b, fb);
    // Stop on the Richardson error estimate or once the estimate is below
    // the roundoff floor of the panel values.
    const double err = std::abs(left + right - whole);
    const double floor = 1e-15 * (std::abs(left) + std::abs(right));
    if (depth <= 0 || err <= std::max(15.0 * tol, floor))
        return left + right + (left + right - whole) / 15.0;
    const double child_tol = std::max(0.5 * tol, 1e-17);
    return adaptive_simpson(f, a, fa, m, fm, lm, flm, left, child_tol, depth - 1) +
           adaptive_simpson(f, m, fm, b, fb, rm, frm, right, child_tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    return adaptive_simpson(f, a, fa, b, fb, m, fm, simpson(a, fa, fm, b, fb), tol, 30);
}

}  // namespace detail

// Quadrature oracle for the potential kernel.
inline double potential_kernel_quadrature(int mx, int my) {
    int M = std::abs(mx), N = std::abs(my);
    if (M < N) std::swap(M, N);
    if (M == 0) return 0.0;
    const auto f = [M, N](double k) { return detail::kernel_integrand(k, M, N); };
    return (2.0 / M_PI) * detail::integrate(f, 0.0, M_PI, 1e-13);
}

// Winding computed from the raw dual field: 4 g(c) minus the neighbour sum.
inline double winding_from_field(const DualField& g, DualSite c) {
    double nb = 0.0;
    for (Direction d : kDirections) nb += g.value({c.i + dx(d), c.j + dy(d)});
    return 4.0 * g.value(c) - nb;
}

}  // namespace cracklat::oracle
