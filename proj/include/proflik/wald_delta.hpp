#pragma once

// Wald intervals for single parameters and delta-method intervals for
// smooth scalar functions of the parameters.  Both are symmetric about
// the estimate by construction; endpoints falling outside a parameter's
// natural range are flagged, never truncated.

#include <cmath>
#include <limits>
#include <span>

#include "proflik/errors.hpp"
#include "proflik/estimation.hpp"
#include "proflik/expr.hpp"
#include "proflik/linalg.hpp"
#include "proflik/numerics/special_functions.hpp"

namespace proflik {

enum class IntervalMethod { Wald, Delta, Profile };

inline const char* method_name(IntervalMethod m) {
    switch (m) {
        case IntervalMethod::Wald: return "wald";
        case IntervalMethod::Delta: return "delta";
        case IntervalMethod::Profile: return "profile";
    }
    return "?";
}

struct IntervalEstimate {
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.0;
    IntervalMethod method = IntervalMethod::Wald;
    double standard_error = std::numeric_limits<double>::quiet_NaN();  // Wald/delta

    bool lower_unbounded = false;          // profile: no crossing found below
    bool upper_unbounded = false;          // profile: no crossing found above
    bool outside_parameter_range = false;  // Wald: endpoint beyond the natural range
    bool degenerate_gradient = false;      // delta: interest gradient vanished
    bool multiple_roots_suspected = false; // profile: likelihood cut more than twice

    bool contains(double value) const { return value >= lower && value <= upper; }
    double width() const { return upper - lower; }
};

namespace detail {

inline void check_level(double level) {
    if (!(level > 0.0 && level < 1.0))
        throw std::domain_error("confidence level must lie strictly between 0 and 1");
}

} // namespace detail

// level-confidence Wald interval for one coordinate of the parameter:
// mle[i] -+ z * sqrt((J^-1)_ii).
inline IntervalEstimate wald_interval(const FitResult& fit, std::size_t component, double level) {
    detail::check_level(level);
    if (component >= fit.mle.size())
        throw std::invalid_argument("wald_interval: component index out of range");
    Matrix inv = spd_inverse(fit.observed_info);
    double se = std::sqrt(inv(component, component));
    double z = std_normal_quantile(0.5 * (1.0 + level));
    IntervalEstimate iv;
    iv.estimate = fit.mle[component];
    iv.lower = iv.estimate - z * se;
    iv.upper = iv.estimate + z * se;
    iv.level = level;
    iv.method = IntervalMethod::Wald;
    iv.standard_error = se;
    const Interval& range = fit.space.bounds[component];
    iv.outside_parameter_range = !range.contains(iv.lower) || !range.contains(iv.upper);
    return iv;
}

// level-confidence delta-method interval for g(parameters):
// g(mle) -+ z * sqrt(grad g^T J^-1 grad g).
inline IntervalEstimate delta_interval(const FitResult& fit, const InterestFunction& g,
                                       double level, double gradient_step = 1e-6) {
    detail::check_level(level);
    double psi = g(fit.mle);
    std::vector<double> grad = g.gradient(fit.mle, gradient_step);
    Matrix inv = spd_inverse(fit.observed_info);
    double var = quadratic_form(inv, grad, grad);
    if (var < 0.0) var = 0.0;
    double se = std::sqrt(var);
    double z = std_normal_quantile(0.5 * (1.0 + level));
    IntervalEstimate iv;
    iv.estimate = psi;
    iv.lower = psi - z * se;
    iv.upper = psi + z * se;
    iv.level = level;
    iv.method = IntervalMethod::Delta;
    iv.standard_error = se;
    double gnorm = 0.0;
    for (double gi : grad) gnorm += gi * gi;
    iv.degenerate_gradient = gnorm == 0.0;
    return iv;
}

} // namespace proflik
