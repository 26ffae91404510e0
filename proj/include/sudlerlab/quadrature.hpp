#pragma once

#include <cmath>

#include "sudlerlab/errors.hpp"

namespace sudlerlab::quadrature {

inline constexpr double pi_q = 3.14159265358979323846;

inline double log2sin(double x) { return std::log(2.0 * std::sin(pi_q * x)); }

namespace detail {

// Head integral over [0, t] for small t: log(2 sin(pi x)) = log(2 pi x) +
// log(sinc(pi x)), integrated termwise; the x^7 tail is far below 1e-12 at
// t <= 1e-4.
inline double head_integral(double t) {
    double t3 = t * t * t;
    double t5 = t3 * t * t;
    return t * (std::log(2.0 * pi_q * t) - 1.0) - pi_q * pi_q * t3 / 18.0 -
           pi_q * pi_q * pi_q * pi_q * t5 / 900.0;
}

template <typename Fn>
double adaptive_simpson(Fn&& f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
    if (depth > 60)
        throw tolerance_not_met("adaptive quadrature exceeded depth 60 without converging");
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

template <typename Fn>
double integrate(Fn&& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 0);
}

} // namespace detail

// I(t) = integral of log|2 sin(pi x)| over [0, t], t in [0, 1]. The integrand
// is symmetric about 1/2, so t > 1/2 reflects: I(t) = 2 I(1/2) - I(1-t).
inline double log2sin_integral(double t, double tol) {
    if (!(t >= 0.0 && t <= 1.0)) throw invalid_interval("integral endpoint must lie in [0, 1]");
    constexpr double delta = 1e-4;
    if (t == 0.0) return 0.0;
    if (t <= delta) return detail::head_integral(t);
    if (t <= 0.5)
        return detail::head_integral(delta) + detail::integrate(log2sin, delta, t, tol);
    double half = log2sin_integral(0.5, 0.5 * tol);
    return 2.0 * half - log2sin_integral(1.0 - t, 0.5 * tol);
}

// V = integral over [0, 5/6] of log|2 sin(pi x)| dx.
inline double v_constant(double tol) {
    if (!(tol >= 1e-12 && tol <= 1e-4))
        throw unsupported("tolerance must lie in [1e-12, 1e-4]");
    return log2sin_integral(5.0 / 6.0, tol);
}

} // namespace sudlerlab::quadrature
