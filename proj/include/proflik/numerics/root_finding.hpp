#pragma once

// Scalar root finding: validated sign-change brackets and Brent's method.

#include <cmath>
#include <string>

#include "proflik/errors.hpp"

namespace proflik {

// A bracket [lo, hi] with f(lo) and f(hi) of opposite sign.
struct RootBracket {
    double lo = 0.0, hi = 0.0;
    double f_lo = 0.0, f_hi = 0.0;

    template <class F>
    static RootBracket make(F&& f, double lo, double hi) {
        RootBracket b;
        b.lo = lo;
        b.hi = hi;
        b.f_lo = f(lo);
        b.f_hi = f(hi);
        b.validate();
        return b;
    }

    void validate() const {
        if (!(lo < hi))
            throw bracket_error("RootBracket: requires lo < hi");
        if (!std::isfinite(f_lo) || !std::isfinite(f_hi))
            throw eval_error("RootBracket: non-finite endpoint value");
        if (f_lo == 0.0 || f_hi == 0.0) return;  // endpoint root is fine
        if ((f_lo > 0.0) == (f_hi > 0.0))
            throw bracket_error("RootBracket: no sign change over [lo, hi]");
    }
};

// Brent's method.  Stops when the bracket width falls below
// x_tol * max(1, |x|) or |f| falls to f_tol or below (absolute, so wildly
// scaled endpoints cannot fake convergence); throws convergence_error
// after max_iterations.
template <class F>
double find_root(F&& f, RootBracket bracket, double x_tol = 1e-10,
                 double f_tol = 1e-9, int max_iterations = 200) {
    bracket.validate();
    double a = bracket.lo, b = bracket.hi;
    double fa = bracket.f_lo, fb = bracket.f_hi;
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;

    double c = a, fc = fa;
    double d = b - a, e = d;
    for (int it = 0; it < max_iterations; ++it) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a; fc = fa;
            d = b - a; e = d;
        }
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        double tol = 0.5 * x_tol * std::max(1.0, std::fabs(b));
        double m = 0.5 * (c - b);
        if (std::fabs(m) <= tol || fb == 0.0 || std::fabs(fb) <= f_tol)
            return b;
        if (std::fabs(e) < tol || std::fabs(fa) <= std::fabs(fb)) {
            d = m; e = m;  // bisection
        } else {
            double s = fb / fa, p, q;
            if (a == c) {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                double qa = fa / fc, r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q; else p = -p;
            if (2.0 * p < std::min(3.0 * m * q - std::fabs(tol * q), std::fabs(e * q))) {
                e = d; d = p / q;  // accept interpolation
            } else {
                d = m; e = m;
            }
        }
        a = b; fa = fb;
        b += (std::fabs(d) > tol) ? d : (m > 0.0 ? tol : -tol);
        fb = f(b);
        if (std::isnan(fb))
            throw eval_error("find_root: objective returned NaN");
    }
    throw convergence_error("find_root: iteration budget exhausted");
}

} // namespace proflik
