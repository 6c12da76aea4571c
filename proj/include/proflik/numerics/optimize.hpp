#pragma once

// Derivative-free maximization: Nelder-Mead simplex with box-bound
// clamping and post-convergence restarts.  Objectives may return -inf
// (infeasible points rank worst); NaN at the starting point throws.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "proflik/errors.hpp"
#include "proflik/numerics/interval.hpp"

namespace proflik {

struct OptimizerSettings {
    double rel_tolerance = 1e-9;
    int max_iterations = 2000;
    int restarts = 2;
    double gradient_step = 1e-6;  // used by callers that pair a fit with numeric derivatives
};

struct MaxResult {
    std::vector<double> argmax;
    double value = -std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;
    long evaluations = 0;
};

namespace detail {

inline void clamp_into(std::vector<double>& x, const std::vector<Interval>& bounds) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Interval& b = bounds[i];
        if (std::isfinite(b.lo)) {
            double edge = b.lo + 1e-10 * std::max(1.0, std::fabs(b.lo));
            if (std::isfinite(b.hi)) edge = std::min(edge, b.lo + 0.25 * (b.hi - b.lo));
            x[i] = std::max(x[i], edge);
        }
        if (std::isfinite(b.hi)) {
            double edge = b.hi - 1e-10 * std::max(1.0, std::fabs(b.hi));
            if (std::isfinite(b.lo)) edge = std::max(edge, b.hi - 0.25 * (b.hi - b.lo));
            x[i] = std::min(x[i], edge);
        }
    }
}

} // namespace detail

// Maximize f over the box given by bounds, starting from init.
// bounds may be empty (unconstrained) or one Interval per coordinate.
template <class F>
MaxResult maximize(F&& f, std::span<const double> init,
                   const std::vector<Interval>& bounds = {},
                   const OptimizerSettings& settings = {}) {
    const std::size_t d = init.size();
    if (d == 0)
        throw std::invalid_argument("maximize: empty starting point");
    std::vector<Interval> box = bounds;
    if (box.empty()) box.assign(d, Interval::whole_line());
    if (box.size() != d)
        throw std::invalid_argument("maximize: bounds/init dimension mismatch");
    for (const Interval& b : box) b.validate();

    MaxResult result;
    long evals = 0;
    auto value_of = [&](std::vector<double>& x) {
        detail::clamp_into(x, box);
        ++evals;
        double v = f(std::span<const double>(x));
        if (std::isnan(v)) v = -std::numeric_limits<double>::infinity();
        return v;
    };

    std::vector<double> start(init.begin(), init.end());
    double f_start = value_of(start);
    if (!std::isfinite(f_start))
        throw eval_error("maximize: objective not finite at the starting point");

    std::vector<std::vector<double>> simplex;
    std::vector<double> fval;
    auto build_simplex = [&](const std::vector<double>& center, double scale) {
        simplex.assign(1, center);
        fval.assign(1, value_of(simplex[0]));
        for (std::size_t i = 0; i < d; ++i) {
            std::vector<double> v = center;
            double step = scale * std::max(1.0, std::fabs(center[i]));
            v[i] += step;
            detail::clamp_into(v, box);
            if (v[i] == center[i]) v[i] = center[i] - step;
            simplex.push_back(v);
            fval.push_back(value_of(simplex.back()));
        }
    };

    int iterations = 0;
    bool converged = false;
    std::vector<double> best = start;
    double f_best = f_start;

    double scale = 0.05;
    for (int round = 0; round <= settings.restarts; ++round) {
        build_simplex(best, scale);
        scale *= 0.2;  // tighter simplex on each restart
        int stable_iters = 0;
        double prev_best = *std::max_element(fval.begin(), fval.end());
        bool round_converged = false;
        while (iterations < settings.max_iterations) {
            ++iterations;
            // order: idx[0] best (largest f), idx[d] worst
            std::vector<std::size_t> idx(simplex.size());
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
            std::sort(idx.begin(), idx.end(),
                      [&](std::size_t a, std::size_t b) { return fval[a] > fval[b]; });
            std::size_t ibest = idx.front(), iworst = idx.back(), isecond = idx[idx.size() - 2];

            std::vector<double> centroid(d, 0.0);
            for (std::size_t k = 0; k < idx.size(); ++k) {
                if (idx[k] == iworst) continue;
                for (std::size_t i = 0; i < d; ++i) centroid[i] += simplex[idx[k]][i];
            }
            for (std::size_t i = 0; i < d; ++i) centroid[i] /= double(d);

            auto along = [&](double t) {
                std::vector<double> x(d);
                for (std::size_t i = 0; i < d; ++i)
                    x[i] = centroid[i] + t * (centroid[i] - simplex[iworst][i]);
                return x;
            };

            std::vector<double> xr = along(1.0);
            double fr = value_of(xr);
            if (fr > fval[ibest]) {
                std::vector<double> xe = along(2.0);
                double fe = value_of(xe);
                if (fe > fr) { simplex[iworst] = std::move(xe); fval[iworst] = fe; }
                else         { simplex[iworst] = std::move(xr); fval[iworst] = fr; }
            } else if (fr > fval[isecond]) {
                simplex[iworst] = std::move(xr);
                fval[iworst] = fr;
            } else {
                bool outside = fr > fval[iworst];
                std::vector<double> xc = along(outside ? 0.5 : -0.5);
                double fc = value_of(xc);
                if (fc > (outside ? fr : fval[iworst])) {
                    simplex[iworst] = std::move(xc);
                    fval[iworst] = fc;
                } else {
                    // shrink toward the best vertex
                    for (std::size_t k = 0; k < simplex.size(); ++k) {
                        if (k == ibest) continue;
                        for (std::size_t i = 0; i < d; ++i)
                            simplex[k][i] = simplex[ibest][i] + 0.5 * (simplex[k][i] - simplex[ibest][i]);
                        fval[k] = value_of(simplex[k]);
                    }
                }
            }

            double cur_best = *std::max_element(fval.begin(), fval.end());
            double change = std::fabs(cur_best - prev_best);
            if (change <= settings.rel_tolerance * (1.0 + std::fabs(cur_best)))
                ++stable_iters;
            else
                stable_iters = 0;
            prev_best = cur_best;
            if (stable_iters >= 3) { round_converged = true; break; }
        }
        for (std::size_t k = 0; k < simplex.size(); ++k) {
            if (fval[k] > f_best) { f_best = fval[k]; best = simplex[k]; }
        }
        converged = round_converged;
        if (iterations >= settings.max_iterations) break;
    }

    result.argmax = best;
    result.value = f_best;
    result.converged = converged;
    result.iterations = iterations;
    result.evaluations = evals;
    return result;
}

} // namespace proflik
