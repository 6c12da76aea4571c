#pragma once

// Profile likelihood: inner maximization over nuisance parameters at a
// fixed interest value, confidence intervals as roots of the profile
// against the chi-square cut, an independent constrained-extremum
// cross-check, and profile curves on a grid.
//
// The inner maximization eliminates the coordinate directly when the
// interest function is a bare parameter; otherwise it runs a quadratic
// penalty sequence with warm starts and finishes with projection steps
// back onto the constraint along the interest gradient.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "proflik/errors.hpp"
#include "proflik/estimation.hpp"
#include "proflik/expr.hpp"
#include "proflik/model.hpp"
#include "proflik/numerics/optimize.hpp"
#include "proflik/numerics/root_finding.hpp"
#include "proflik/numerics/special_functions.hpp"
#include "proflik/wald_delta.hpp"

namespace proflik {

struct ProfilePoint {
    double psi = 0.0;
    double loglik = -std::numeric_limits<double>::infinity();
    std::vector<double> maximizer;
    bool converged = false;
};

namespace detail {

// Objective over unconstrained coordinates; domain violations map to -inf
// so the simplex backs away from them.
template <LikelihoodModel M>
double transformed_loglik(const M& model, const Dataset& data,
                          const std::vector<CoordinateTransform>& ts,
                          std::span<const double> t) {
    std::vector<double> x = to_constrained(ts, t);
    for (double xi : x)
        if (!std::isfinite(xi)) return -std::numeric_limits<double>::infinity();
    try {
        return model.log_likelihood(data, x);
    } catch (const std::domain_error&) {
        return -std::numeric_limits<double>::infinity();
    }
}

inline double safe_interest(const InterestFunction& g, std::span<const double> x) {
    try {
        return g(x);
    } catch (const eval_error&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

} // namespace detail

// Log-likelihood profiled over everything but the interest value:
// max over parameters w of l(w) subject to g(w) = psi.
template <LikelihoodModel M>
ProfilePoint profile_loglik(const M& model, const Dataset& data, const InterestFunction& g,
                            double psi, std::optional<std::vector<double>> warm = std::nullopt,
                            const OptimizerSettings& settings = {}) {
    const ParameterSpace& space = model.space();
    const std::size_t d = space.dimension();
    if (g.dimension() != d)
        throw std::invalid_argument("profile_loglik: interest/model dimension mismatch");
    bool any_ref = false;
    for (bool b : g.referenced()) any_ref = any_ref || b;
    if (!any_ref)
        throw std::invalid_argument("profile_loglik: interest function references no parameters");

    auto transforms = detail::transforms_for(space);
    std::vector<double> start = warm ? *warm : detail::default_init_values(model, data);
    if (start.size() != d)
        throw std::invalid_argument("profile_loglik: warm start dimension mismatch");

    ProfilePoint point;
    point.psi = psi;

    if (g.is_parameter()) {
        std::size_t j = g.parameter_index();
        if (!space.bounds[j].contains(psi))
            throw std::domain_error("profile_loglik: interest value outside the parameter's range");
        if (d == 1) {
            point.maximizer = {psi};
            point.loglik = model.log_likelihood(data, point.maximizer);
            point.converged = true;
            return point;
        }
        // maximize over the remaining coordinates with coordinate j pinned
        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < d; ++i)
            if (i != j) rest.push_back(i);
        std::vector<double> t0;
        for (std::size_t i : rest) {
            double xi = start[i];
            if (!space.bounds[i].contains(xi)) xi = space.bounds[i].contains(1.0) ? 1.0 : xi;
            t0.push_back(transforms[i].to_unconstrained(xi));
        }
        std::vector<double> x(d);
        x[j] = psi;
        auto objective = [&](std::span<const double> t) {
            std::vector<double> probe = x;
            for (std::size_t k = 0; k < rest.size(); ++k)
                probe[rest[k]] = transforms[rest[k]].to_constrained(t[k]);
            for (double xi : probe)
                if (!std::isfinite(xi)) return -std::numeric_limits<double>::infinity();
            try {
                return model.log_likelihood(data, probe);
            } catch (const std::domain_error&) {
                return -std::numeric_limits<double>::infinity();
            }
        };
        MaxResult opt = maximize(objective, t0, {}, settings);
        point.maximizer = x;
        for (std::size_t k = 0; k < rest.size(); ++k)
            point.maximizer[rest[k]] = transforms[rest[k]].to_constrained(opt.argmax[k]);
        point.loglik = model.log_likelihood(data, point.maximizer);
        point.converged = opt.converged;
        return point;
    }

    // general interest: quadratic penalty chain, then projection
    std::vector<double> t = detail::to_unconstrained(transforms, start);
    double start_residual = std::fabs(detail::safe_interest(g, start) - psi);
    std::vector<double> rhos = {1e1, 1e3, 1e5};
    if (start_residual <= 0.05 * std::max(1.0, std::fabs(psi)))
        rhos = {1e3, 1e5};  // warm start already near the constraint
    for (double rho : rhos) {
        auto objective = [&](std::span<const double> tt) {
            double ll = detail::transformed_loglik(model, data, transforms, tt);
            if (ll == -std::numeric_limits<double>::infinity()) return ll;
            std::vector<double> xx = detail::to_constrained(transforms, tt);
            double gv = detail::safe_interest(g, xx);
            if (std::isnan(gv)) return -std::numeric_limits<double>::infinity();
            double r = gv - psi;
            return ll - rho * r * r;
        };
        MaxResult opt = maximize(objective, t, {}, settings);
        t = opt.argmax;
        point.converged = opt.converged;
    }

    std::vector<double> xhat = detail::to_constrained(transforms, t);
    double res_tol = 1e-8 * std::max(1.0, std::fabs(psi));

    // Projection: walk along the interest gradient until g hits psi.
    for (int pass = 0; pass < 4; ++pass) {
        double gv = detail::safe_interest(g, xhat);
        if (std::isnan(gv)) break;
        double r = gv - psi;
        if (std::fabs(r) <= 1e-12 * std::max(1.0, std::fabs(psi))) break;
        std::vector<double> u = g.gradient(xhat);
        double n2 = 0.0;
        for (double ui : u) n2 += ui * ui;
        if (n2 == 0.0) break;
        double s_newton = -r / n2;
        auto along = [&](double s) {
            std::vector<double> xx = xhat;
            for (std::size_t i = 0; i < d; ++i) xx[i] += s * u[i];
            return xx;
        };
        auto phi = [&](double s) {
            std::vector<double> xx = along(s);
            if (!space.contains(xx)) return std::numeric_limits<double>::quiet_NaN();
            return detail::safe_interest(g, xx) - psi;
        };
        // bracket around the Newton step, widening a few times if needed
        double a = 0.0, fa = r, b = 0.0, fb = r;
        bool bracketed = false;
        double span_s = 2.0 * std::fabs(s_newton);
        for (int widen = 0; widen < 8 && !bracketed; ++widen) {
            b = (s_newton > 0 ? span_s : -span_s);
            fb = phi(b);
            if (std::isnan(fb)) { span_s *= 0.5; continue; }
            if ((fa > 0) != (fb > 0)) bracketed = true;
            else span_s *= 2.0;
        }
        if (!bracketed) break;
        RootBracket rb;
        rb.lo = std::min(a, b);
        rb.hi = std::max(a, b);
        rb.f_lo = (rb.lo == a) ? fa : fb;
        rb.f_hi = (rb.hi == b) ? fb : fa;
        double s_star = find_root(phi, rb, 1e-14, 1e-13);
        xhat = along(s_star);
    }

    double gv = detail::safe_interest(g, xhat);
    if (std::isnan(gv) || std::fabs(gv - psi) > 1e-6 * std::max(1.0, std::fabs(psi)))
        throw std::domain_error("profile_loglik: interest value unreachable within the parameter space");

    point.maximizer = xhat;
    point.loglik = model.log_likelihood(data, xhat);
    point.converged = point.converged && std::fabs(gv - psi) <= res_tol;
    return point;
}

// ======================================================================
// profile likelihood confidence interval
// ======================================================================

// level-confidence interval for g: the set of psi whose profile
// log-likelihood stays above max_loglik - chisq_quantile(level, 1) / 2.
template <LikelihoodModel M>
IntervalEstimate profile_interval(const M& model, const Dataset& data, const FitResult& fit,
                                  const InterestFunction& g, double level,
                                  const OptimizerSettings& settings = {},
                                  double root_rel_tol = 1e-8) {
    detail::check_level(level);
    double psi_hat = g(fit.mle);
    double cut = fit.max_loglik - 0.5 * chisq_quantile(level, 1);

    double step;
    try {
        IntervalEstimate dm = delta_interval(fit, g, level, settings.gradient_step);
        step = dm.degenerate_gradient || !(dm.standard_error > 0.0)
                   ? 0.1 * std::max(1.0, std::fabs(psi_hat))
                   : 1.2 * dm.standard_error;
    } catch (const singular_information_error&) {
        step = 0.1 * std::max(1.0, std::fabs(psi_hat));
    }

    IntervalEstimate iv;
    iv.estimate = psi_hat;
    iv.level = level;
    iv.method = IntervalMethod::Profile;

    std::vector<double> warm = fit.mle;
    auto height_at = [&](double psi, std::vector<double>& warm_io) {
        ProfilePoint p = profile_loglik(model, data, g, psi, warm_io, settings);
        warm_io = p.maximizer;
        return p.loglik - cut;
    };

    const int max_expansions = 50;
    for (int dir : {-1, +1}) {
        std::vector<double> side_warm = fit.mle;
        double prev_psi = psi_hat;
        double prev_h = fit.max_loglik - cut;  // > 0
        double root = std::numeric_limits<double>::quiet_NaN();
        // a few equal steps to bracket nearby roots tightly, then doubling
        // so slowly decaying profiles still reach their far crossing
        double inc = step;
        double offset = 0.0;
        for (int k = 1; k <= max_expansions; ++k) {
            if (k > 6) inc *= 2.0;
            offset += inc;
            double psi = psi_hat + dir * offset;
            if (!std::isfinite(psi)) break;
            double h;
            try {
                h = height_at(psi, side_warm);
            } catch (const std::domain_error&) {
                // walked out of the feasible range; bisect toward the edge
                double lo = prev_psi, hi = psi;
                bool found = false;
                double h_edge = prev_h;
                std::vector<double> edge_warm = side_warm;
                for (int b = 0; b < 25 && !found; ++b) {
                    double mid = 0.5 * (lo + hi);
                    try {
                        double hm = height_at(mid, edge_warm);
                        if (hm < 0.0) {
                            found = true;
                            hi = mid;
                            RootBracket rb;
                            rb.lo = std::min(lo, mid);
                            rb.hi = std::max(lo, mid);
                            rb.f_lo = dir > 0 ? h_edge : hm;
                            rb.f_hi = dir > 0 ? hm : h_edge;
                            std::vector<double> rw = edge_warm;
                            root = find_root([&](double q) { return height_at(q, rw); }, rb,
                                             root_rel_tol, 0.0);
                        } else {
                            lo = mid;
                            h_edge = hm;
                        }
                    } catch (const std::domain_error&) {
                        hi = mid;
                    }
                }
                break;
            }
            if (h < 0.0) {
                RootBracket rb;
                rb.lo = std::min(prev_psi, psi);
                rb.hi = std::max(prev_psi, psi);
                rb.f_lo = dir > 0 ? prev_h : h;
                rb.f_hi = dir > 0 ? h : prev_h;
                std::vector<double> rw = side_warm;
                root = find_root([&](double q) { return height_at(q, rw); }, rb, root_rel_tol,
                                 0.0);

                // keep walking a little to notice the cut re-emerging
                std::vector<double> ahead_warm = side_warm;
                for (int extra = 1; extra <= 5 && k + extra <= max_expansions; ++extra) {
                    double q = psi + dir * extra * inc;
                    try {
                        if (height_at(q, ahead_warm) > 0.0) {
                            iv.multiple_roots_suspected = true;
                            break;
                        }
                    } catch (const std::domain_error&) {
                        break;
                    }
                }
                break;
            }
            prev_psi = psi;
            prev_h = h;
        }
        if (std::isnan(root)) {
            // either the cut was never crossed within the walk or the
            // feasible range ended while still above the cut
            if (dir < 0) {
                iv.lower = -std::numeric_limits<double>::infinity();
                iv.lower_unbounded = true;
            } else {
                iv.upper = std::numeric_limits<double>::infinity();
                iv.upper_unbounded = true;
            }
        } else {
            if (dir < 0) iv.lower = root; else iv.upper = root;
        }
    }
    return iv;
}

// ======================================================================
// constrained extremum cross-check
// ======================================================================

struct ConstrainedExtremum {
    double lower = 0.0;
    double upper = 0.0;
    bool converged = false;
};

namespace detail {

// Root of f along [0, s_hi] by plain bisection on the predicate f >= 0;
// tolerates -inf values, which Brent-style interpolation does not.
template <class F>
double bisect_sign_change(F&& f, double s_lo, double s_hi, int iterations = 80) {
    double lo = s_lo, hi = s_hi;
    for (int i = 0; i < iterations; ++i) {
        double mid = 0.5 * (lo + hi);
        if (f(mid) >= 0.0) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

// Independent check of the profile interval: extremize g over the
// level-set boundary region { w : l(w) >= max_loglik - chisq/2 } by
// augmented Lagrangian runs started from points on the boundary along
// each coordinate ray.
template <LikelihoodModel M>
ConstrainedExtremum constrained_extremum_check(const M& model, const Dataset& data,
                                               const FitResult& fit, const InterestFunction& g,
                                               double level,
                                               const OptimizerSettings& settings = {}) {
    detail::check_level(level);
    const ParameterSpace& space = model.space();
    const std::size_t d = space.dimension();
    double cut = fit.max_loglik - 0.5 * chisq_quantile(level, 1);
    auto transforms = detail::transforms_for(space);
    std::vector<double> t_hat = detail::to_unconstrained(transforms, fit.mle);

    auto level_height = [&](std::span<const double> t) {
        return detail::transformed_loglik(model, data, transforms, t) - cut;
    };

    // boundary points along each transformed coordinate ray
    std::vector<std::vector<double>> boundary;
    for (std::size_t i = 0; i < d; ++i) {
        for (int dir : {-1, +1}) {
            auto ray_height = [&](double s) {
                std::vector<double> t = t_hat;
                t[i] += dir * s;
                return level_height(t);
            };
            double s_hi = 0.25;
            bool crossed = false;
            for (int k = 0; k < 60; ++k) {
                if (ray_height(s_hi) < 0.0) { crossed = true; break; }
                s_hi *= 2.0;
            }
            if (!crossed)
                throw convergence_error(
                    "constrained_extremum_check: likelihood region unbounded along a coordinate");
            double s_b = detail::bisect_sign_change(ray_height, 0.0, s_hi);
            std::vector<double> t = t_hat;
            t[i] += dir * s_b;
            boundary.push_back(std::move(t));
        }
    }

    ConstrainedExtremum result;
    double best_min = std::numeric_limits<double>::infinity();
    double best_max = -std::numeric_limits<double>::infinity();
    bool any_min = false, any_max = false;

    // boundary points themselves are feasible candidates
    for (const auto& t : boundary) {
        std::vector<double> x = detail::to_constrained(transforms, t);
        double gv = detail::safe_interest(g, x);
        if (std::isnan(gv)) continue;
        best_min = std::min(best_min, gv);
        best_max = std::max(best_max, gv);
        any_min = any_max = true;
    }

    const double e_tol = 1e-8 * std::max(1.0, std::fabs(cut));
    for (int sense : {-1, +1}) {
        for (const auto& t_start : boundary) {
            std::vector<double> t = t_start;
            double lambda = 0.0, rho = 10.0;
            double prev_abs_e = std::numeric_limits<double>::infinity();
            bool ok = false;
            for (int outer = 0; outer < 10; ++outer) {
                auto objective = [&](std::span<const double> tt) {
                    double e = level_height(tt);
                    if (!std::isfinite(e)) return -std::numeric_limits<double>::infinity();
                    std::vector<double> xx = detail::to_constrained(transforms, tt);
                    double gv = detail::safe_interest(g, xx);
                    if (std::isnan(gv)) return -std::numeric_limits<double>::infinity();
                    return sense * gv + lambda * e - 0.5 * rho * e * e;
                };
                MaxResult opt = maximize(objective, t, {}, settings);
                t = opt.argmax;
                double e = level_height(t);
                if (std::fabs(e) <= e_tol) { ok = true; break; }
                if (std::fabs(e) > 0.25 * prev_abs_e) rho = std::min(rho * 10.0, 1e7);
                prev_abs_e = std::fabs(e);
                lambda -= rho * e;
            }
            if (!ok) continue;
            std::vector<double> x = detail::to_constrained(transforms, t);
            double gv = detail::safe_interest(g, x);
            if (std::isnan(gv)) continue;
            if (sense < 0) {
                best_min = std::min(best_min, gv);
                any_min = true;
            } else {
                best_max = std::max(best_max, gv);
                any_max = true;
            }
        }
    }

    result.lower = best_min;
    result.upper = best_max;
    result.converged = any_min && any_max;
    return result;
}

// ======================================================================
// profile curves
// ======================================================================

struct ProfileCurvePoint {
    double psi = 0.0;
    double loglik = 0.0;
    double relative = 0.0;  // loglik - max_loglik
    bool converged = false;
};

struct ProfileCurve {
    double psi_hat = 0.0;
    double max_loglik = 0.0;
    std::vector<ProfileCurvePoint> points;
};

// Profile log-likelihood on a grid.  When no range is given the grid
// spans the 0.999-level profile interval padded by 5% on each side.
template <LikelihoodModel M>
ProfileCurve profile_curve(const M& model, const Dataset& data, const FitResult& fit,
                           const InterestFunction& g, std::size_t grid_size = 101,
                           std::optional<std::pair<double, double>> range = std::nullopt,
                           const OptimizerSettings& settings = {}) {
    if (grid_size < 3)
        throw std::invalid_argument("profile_curve: grid must have at least 3 points");
    double psi_hat = g(fit.mle);

    double lo, hi;
    if (range) {
        lo = range->first;
        hi = range->second;
        if (!(lo < hi))
            throw std::invalid_argument("profile_curve: empty range");
    } else {
        IntervalEstimate wide = profile_interval(model, data, fit, g, 0.999, settings);
        double fallback = 0.1 * std::max(1.0, std::fabs(psi_hat));
        lo = wide.lower_unbounded ? psi_hat - 50.0 * fallback : wide.lower;
        hi = wide.upper_unbounded ? psi_hat + 50.0 * fallback : wide.upper;
        double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
        if (g.is_parameter()) {
            // keep the grid inside the parameter's open range
            const Interval& b = fit.space.bounds[g.parameter_index()];
            double margin = 1e-9 * std::max(1.0, hi - lo);
            if (std::isfinite(b.lo)) lo = std::max(lo, b.lo + margin);
            if (std::isfinite(b.hi)) hi = std::min(hi, b.hi - margin);
        }
    }

    ProfileCurve curve;
    curve.psi_hat = psi_hat;
    curve.max_loglik = fit.max_loglik;
    curve.points.resize(grid_size);

    std::vector<double> psis(grid_size);
    for (std::size_t i = 0; i < grid_size; ++i)
        psis[i] = lo + (hi - lo) * double(i) / double(grid_size - 1);

    // evaluate outward from the grid point nearest the estimate so each
    // point warm-starts from its neighbor
    std::size_t center = 0;
    for (std::size_t i = 1; i < grid_size; ++i)
        if (std::fabs(psis[i] - psi_hat) < std::fabs(psis[center] - psi_hat)) center = i;

    auto eval_to = [&](std::size_t idx, std::vector<double>& warm) {
        ProfileCurvePoint& p = curve.points[idx];
        p.psi = psis[idx];
        try {
            ProfilePoint pp = profile_loglik(model, data, g, psis[idx], warm, settings);
            warm = pp.maximizer;
            p.loglik = pp.loglik;
            p.relative = pp.loglik - fit.max_loglik;
            p.converged = pp.converged;
        } catch (const std::domain_error&) {
            p.loglik = -std::numeric_limits<double>::infinity();
            p.relative = -std::numeric_limits<double>::infinity();
            p.converged = false;
        }
    };

    std::vector<double> warm_up = fit.mle;
    for (std::size_t i = center; i < grid_size; ++i) eval_to(i, warm_up);
    std::vector<double> warm_down = fit.mle;
    for (std::size_t i = center; i-- > 0;) eval_to(i, warm_down);
    return curve;
}

} // namespace proflik
