#pragma once

// Special functions needed by the likelihood machinery: log-gamma,
// regularized incomplete gamma, chi-square and standard normal CDFs and
// quantiles.  Self-contained; accuracy targets are set by the interval
// computations downstream (quantiles to ~1e-10, log-gamma to 1e-12
// absolute over [0.5, 100]).

#include <cmath>
#include <limits>
#include <stdexcept>

#include "proflik/errors.hpp"

namespace proflik {

// ======================================================================
// log-gamma
// ======================================================================

// ln Gamma(x) for x > 0.  Lanczos approximation, g = 607/128, 15 terms.
inline double log_gamma(double x) {
    if (!(x > 0.0))
        throw std::domain_error("log_gamma: requires x > 0");
    static const double g = 607.0 / 128.0;
    static const double coeff[15] = {
        0.99999999999999709182,
        57.156235665862923517,
        -59.597960355475491248,
        14.136097974741747174,
        -0.49191381609762019978,
        0.33994649984811888699e-4,
        0.46523628927048575665e-4,
        -0.98374475304879564677e-4,
        0.15808870322491248884e-3,
        -0.21026444172410488319e-3,
        0.21743961811521264320e-3,
        -0.16431810653676389022e-3,
        0.84418223983852743293e-4,
        -0.26190838401581408670e-4,
        0.36899182659531622704e-5,
    };
    // Reflection keeps the series argument >= 0.5.
    if (x < 0.5) {
        static const double pi = 3.14159265358979323846;
        return std::log(pi / std::sin(pi * x)) - log_gamma(1.0 - x);
    }
    double z = x - 1.0;
    double series = coeff[0];
    for (int k = 1; k < 15; ++k)
        series += coeff[k] / (z + k);
    double t = z + g + 0.5;
    static const double half_log_two_pi = 0.91893853320467274178;
    return half_log_two_pi + (z + 0.5) * std::log(t) - t + std::log(series);
}

// ======================================================================
// regularized incomplete gamma
// ======================================================================

namespace detail {

// Lower regularized P(a, x) by power series, for x < a + 1.
inline double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16)
            return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
    }
    throw convergence_error("gamma_p: series did not converge");
}

// Upper regularized Q(a, x) by Lentz continued fraction, for x >= a + 1.
inline double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16)
            return h * std::exp(-x + a * std::log(x) - log_gamma(a));
    }
    throw convergence_error("gamma_q: continued fraction did not converge");
}

} // namespace detail

// Lower regularized incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
inline double gamma_p(double a, double x) {
    if (!(a > 0.0) || x < 0.0)
        throw std::domain_error("gamma_p: requires a > 0 and x >= 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return detail::gamma_p_series(a, x);
    return 1.0 - detail::gamma_q_cf(a, x);
}

// Upper regularized incomplete gamma Q(a, x) = 1 - P(a, x).
inline double gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0)
        throw std::domain_error("gamma_q: requires a > 0 and x >= 0");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
    return detail::gamma_q_cf(a, x);
}

// ln Q(a, x), stable in the far right tail where Q underflows is not
// required here; Q stays representable for the arguments the models use.
inline double log_gamma_q(double a, double x) {
    double q = gamma_q(a, x);
    if (q <= 0.0)
        return -std::numeric_limits<double>::infinity();
    return std::log(q);
}

// ======================================================================
// chi-square
// ======================================================================

inline double chisq_cdf(double x, int df) {
    if (df < 1)
        throw std::domain_error("chisq_cdf: requires df >= 1");
    if (x <= 0.0) return 0.0;
    return gamma_p(0.5 * df, 0.5 * x);
}

// Quantile of the chi-square distribution: Wilson-Hilferty start,
// safeguarded Newton on the CDF, bisection when Newton leaves the bracket.
inline double chisq_quantile(double p, int df) {
    if (df < 1)
        throw std::domain_error("chisq_quantile: requires df >= 1");
    if (!(p >= 0.0 && p < 1.0))
        throw std::domain_error("chisq_quantile: requires 0 <= p < 1");
    if (p == 0.0) return 0.0;

    double nu = df;
    // Wilson-Hilferty: (chi2/nu)^(1/3) approximately normal.
    double z = [&] {
        // Rough normal quantile is enough to start; refined below anyway.
        double t = std::sqrt(-2.0 * std::log(p < 0.5 ? p : 1.0 - p));
        double n = t - (2.30753 + 0.27061 * t) / (1.0 + 0.99229 * t + 0.04481 * t * t);
        return p < 0.5 ? -n : n;
    }();
    double h = 2.0 / (9.0 * nu);
    double x = nu * std::pow(1.0 - h + z * std::sqrt(h), 3);
    if (!(x > 0.0)) x = 0.5 * nu * 1e-3;

    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200; ++it) {
        double f = chisq_cdf(x, df) - p;
        if (f > 0.0) hi = std::min(hi, x); else lo = std::max(lo, x);
        // density of chi-square at x
        double logpdf = (0.5 * nu - 1.0) * std::log(x) - 0.5 * x
                        - 0.5 * nu * std::log(2.0) - log_gamma(0.5 * nu);
        double step = f / std::exp(logpdf);
        double xn = x - step;
        if (!(xn > lo && (xn < hi))) {
            xn = std::isinf(hi) ? 2.0 * x : 0.5 * (lo + hi);
        }
        if (std::fabs(xn - x) <= 1e-14 * std::max(1.0, std::fabs(x))) {
            return xn;
        }
        x = xn;
    }
    throw convergence_error("chisq_quantile: did not converge");
}

// ======================================================================
// standard normal
// ======================================================================

inline double std_normal_cdf(double x) {
    static const double inv_sqrt2 = 0.70710678118654752440;
    return 0.5 * std::erfc(-x * inv_sqrt2);
}

inline double std_normal_pdf(double x) {
    static const double inv_sqrt_two_pi = 0.39894228040143267794;
    return inv_sqrt_two_pi * std::exp(-0.5 * x * x);
}

// ln Phi(x), switching to the asymptotic tail expansion where erfc
// underflows (x below about -30).
inline double log_std_normal_cdf(double x) {
    if (x > -30.0) {
        double c = std_normal_cdf(x);
        if (c > 0.0) return std::log(c);
    }
    // Phi(x) ~ phi(x)/(-x) * (1 - 1/x^2 + 3/x^4 - 15/x^6) for x -> -inf
    double x2 = x * x;
    double corr = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
    static const double half_log_two_pi = 0.91893853320467274178;
    return -0.5 * x2 - std::log(-x) - half_log_two_pi + std::log(corr);
}

// Quantile of the standard normal: rational approximation (Acklam style)
// refined by one Newton step on the erfc-based CDF.
inline double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("std_normal_quantile: requires 0 < p < 1");
    static const double a[6] = {
        -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
        1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[5] = {
        -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
        6.680131188771972e+01, -1.328068155288572e+01};
    static const double c[6] = {
        -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
        -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00};
    static const double d[4] = {
        7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
        3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1.0 - plow;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= phigh) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
             ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // One Newton step pushes the ~1e-9 relative error of the rational
    // approximation to full double precision.
    double err = std_normal_cdf(x) - p;
    x -= err / std_normal_pdf(x);
    return x;
}

} // namespace proflik
