#pragma once

// Central-difference gradients and Hessians.  Steps scale with the
// coordinate magnitude; the Hessian uses the square root of the gradient
// step, the usual balance between truncation and rounding error for
// second differences.

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "proflik/errors.hpp"
#include "proflik/linalg.hpp"

namespace proflik {

inline constexpr double default_gradient_step = 1e-6;

namespace detail {

template <class F>
double checked_eval(F&& f, const std::vector<double>& x) {
    double v = f(std::span<const double>(x));
    if (std::isnan(v))
        throw eval_error("numeric differentiation: objective returned NaN at a probe point");
    return v;
}

} // namespace detail

// Central-difference gradient, step = rel_step * max(1, |x_i|).
template <class F>
std::vector<double> numeric_gradient(F&& f, std::span<const double> x,
                                     double rel_step = default_gradient_step) {
    std::vector<double> g(x.size());
    std::vector<double> p(x.begin(), x.end());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double h = rel_step * std::max(1.0, std::fabs(x[i]));
        double xi = p[i];
        p[i] = xi + h;
        double fp = detail::checked_eval(f, p);
        p[i] = xi - h;
        double fm = detail::checked_eval(f, p);
        p[i] = xi;
        g[i] = (fp - fm) / (2.0 * h);
        if (!std::isfinite(g[i]))
            throw eval_error("numeric_gradient: non-finite difference quotient");
    }
    return g;
}

// Central-difference Hessian, step = sqrt(rel_step) * max(1, |x_i|);
// the result is symmetrized.
template <class F>
Matrix numeric_hessian(F&& f, std::span<const double> x,
                       double rel_step = default_gradient_step) {
    const std::size_t d = x.size();
    const double hstep = std::sqrt(rel_step);
    std::vector<double> h(d);
    for (std::size_t i = 0; i < d; ++i)
        h[i] = hstep * std::max(1.0, std::fabs(x[i]));

    std::vector<double> p(x.begin(), x.end());
    double f0 = detail::checked_eval(f, p);
    Matrix hess(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        double xi = p[i];
        p[i] = xi + h[i];
        double fp = detail::checked_eval(f, p);
        p[i] = xi - h[i];
        double fm = detail::checked_eval(f, p);
        p[i] = xi;
        hess(i, i) = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for (std::size_t j = i + 1; j < d; ++j) {
            double xj = p[j];
            p[i] = xi + h[i]; p[j] = xj + h[j];
            double fpp = detail::checked_eval(f, p);
            p[j] = xj - h[j];
            double fpm = detail::checked_eval(f, p);
            p[i] = xi - h[i]; p[j] = xj + h[j];
            double fmp = detail::checked_eval(f, p);
            p[j] = xj - h[j];
            double fmm = detail::checked_eval(f, p);
            p[i] = xi; p[j] = xj;
            double v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
            hess(i, j) = v;
            hess(j, i) = v;
        }
    }
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            if (!std::isfinite(hess(i, j)))
                throw eval_error("numeric_hessian: non-finite difference quotient");
    return hess;
}

} // namespace proflik
