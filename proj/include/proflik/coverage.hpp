#pragma once

// Coverage simulation: draw datasets from a model at known parameters,
// fit each one, compute intervals by the requested methods and count how
// often they cover the true interest value.  Replicate r always uses the
// (seed, r) random substream, so results are identical for any worker
// count and any scheduling order.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "proflik/estimation.hpp"
#include "proflik/expr.hpp"
#include "proflik/model.hpp"
#include "proflik/profile.hpp"
#include "proflik/random.hpp"
#include "proflik/wald_delta.hpp"

namespace proflik {

struct CoverageScenario {
    ModelSpec family;                    // must provide a sampler
    std::vector<double> true_params;
    std::size_t sample_size = 0;
    std::string interest;                // builtin name or expression
    double level = 0.95;
    std::size_t replicates = 1000;
    std::uint64_t seed = 1;
    std::vector<IntervalMethod> methods = {IntervalMethod::Delta, IntervalMethod::Profile};

    // per-replicate numerics: looser than the defaults used for a single
    // analysis, since endpoint error orders of magnitude below an
    // interval's width cannot change a coverage count
    OptimizerSettings optimizer{1e-8, 600, 1, 1e-6};
    double profile_root_tol = 1e-5;
};

struct MethodTally {
    std::size_t covered = 0;
    std::size_t total = 0;       // replicates where the interval was produced
    std::size_t failures = 0;    // interval computation failed
    std::size_t unbounded = 0;   // interval had an unbounded side
    double width_sum = 0.0;      // over two-sided intervals only
    std::size_t width_count = 0;

    double coverage() const { return total ? double(covered) / double(total) : 0.0; }
    double mc_std_error() const {
        if (!total) return 0.0;
        double p = coverage();
        return std::sqrt(p * (1.0 - p) / double(total));
    }
    double mean_width() const { return width_count ? width_sum / double(width_count) : 0.0; }
};

struct CoverageReport {
    CoverageScenario scenario;
    double true_psi = 0.0;
    std::size_t fit_failures = 0;  // replicates lost before any interval
    std::vector<std::pair<IntervalMethod, MethodTally>> tallies;
    double elapsed_seconds = 0.0;
    std::size_t workers = 1;

    const MethodTally& tally(IntervalMethod m) const {
        for (const auto& [method, t] : tallies)
            if (method == m) return t;
        throw std::invalid_argument("CoverageReport: method not simulated");
    }
};

namespace detail {

struct ReplicateOutcome {
    bool fit_failed = false;
    // parallel to scenario.methods
    std::vector<signed char> covered;    // 1 covered, 0 missed, -1 failed
    std::vector<signed char> unbounded;  // 1 when a side was unbounded
    std::vector<double> width;           // NaN unless two-sided
};

} // namespace detail

inline void validate_coverage_scenario(const CoverageScenario& s) {
    if (!s.family.sampler)
        throw std::invalid_argument("coverage: model has no sampler");
    if (s.true_params.size() != s.family.parameter_space.dimension() ||
        !s.family.parameter_space.contains(s.true_params))
        throw std::domain_error("coverage: true parameters outside the model's space");
    if (s.sample_size < 2)
        throw std::invalid_argument("coverage: sample size must be at least 2");
    if (s.replicates < 1)
        throw std::invalid_argument("coverage: needs at least one replicate");
    if (!(s.level > 0.0 && s.level < 1.0))
        throw std::domain_error("coverage: level must lie strictly between 0 and 1");
    if (s.methods.empty())
        throw std::invalid_argument("coverage: no interval methods requested");
    InterestFunction g = interest_from_text(s.interest, s.family.parameter_space);
    for (IntervalMethod m : s.methods)
        if (m == IntervalMethod::Wald && !g.is_parameter())
            throw std::invalid_argument(
                "coverage: the wald method applies only to single-parameter interests");
}

inline CoverageReport run_coverage(const CoverageScenario& scenario, std::size_t workers = 1) {
    validate_coverage_scenario(scenario);
    auto t_start = std::chrono::steady_clock::now();

    InterestFunction g = interest_from_text(scenario.interest, scenario.family.parameter_space);
    double true_psi = g(scenario.true_params);

    const std::size_t R = scenario.replicates;
    const std::size_t n_methods = scenario.methods.size();
    std::vector<detail::ReplicateOutcome> outcomes(R);

    auto run_replicate = [&](std::size_t r) {
        detail::ReplicateOutcome& out = outcomes[r];
        out.covered.assign(n_methods, -1);
        out.unbounded.assign(n_methods, 0);
        out.width.assign(n_methods, std::numeric_limits<double>::quiet_NaN());

        RngStream rng(scenario.seed, r);
        Dataset data;
        data.observations.reserve(scenario.sample_size);
        for (std::size_t i = 0; i < scenario.sample_size; ++i)
            data.observations.push_back(
                Observation::exact(scenario.family.sampler(scenario.true_params, rng)));

        FitResult fit;
        try {
            fit = fit_mle(scenario.family, data, scenario.true_params, scenario.optimizer);
            if (!fit.converged)
                throw convergence_error("coverage: fit did not converge");
        } catch (const std::exception&) {
            out.fit_failed = true;
            return;
        }

        for (std::size_t m = 0; m < n_methods; ++m) {
            try {
                IntervalEstimate iv;
                switch (scenario.methods[m]) {
                    case IntervalMethod::Wald:
                        iv = wald_interval(fit, g.parameter_index(), scenario.level);
                        break;
                    case IntervalMethod::Delta:
                        iv = delta_interval(fit, g, scenario.level);
                        break;
                    case IntervalMethod::Profile:
                        iv = profile_interval(scenario.family, data, fit, g, scenario.level,
                                              scenario.optimizer, scenario.profile_root_tol);
                        break;
                }
                out.covered[m] = iv.contains(true_psi) ? 1 : 0;
                if (iv.lower_unbounded || iv.upper_unbounded) {
                    out.unbounded[m] = 1;
                } else {
                    out.width[m] = iv.width();
                }
            } catch (const std::exception&) {
                out.covered[m] = -1;
            }
        }
    };

    std::size_t n_workers = std::max<std::size_t>(workers, 1);
    if (n_workers == 1) {
        for (std::size_t r = 0; r < R; ++r) run_replicate(r);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (std::size_t wkr = 0; wkr < n_workers; ++wkr) {
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t r = next.fetch_add(1);
                    if (r >= R) return;
                    run_replicate(r);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    // reduce in replicate order: identical totals for any worker count
    CoverageReport report;
    report.scenario = scenario;
    report.true_psi = true_psi;
    report.workers = n_workers;
    report.tallies.reserve(n_methods);
    for (IntervalMethod m : scenario.methods) report.tallies.push_back({m, MethodTally{}});

    for (std::size_t r = 0; r < R; ++r) {
        const detail::ReplicateOutcome& out = outcomes[r];
        if (out.fit_failed) {
            ++report.fit_failures;
            continue;
        }
        for (std::size_t m = 0; m < n_methods; ++m) {
            MethodTally& tally = report.tallies[m].second;
            if (out.covered[m] < 0) {
                ++tally.failures;
                continue;
            }
            ++tally.total;
            tally.covered += out.covered[m];
            if (out.unbounded[m]) {
                ++tally.unbounded;
            } else if (std::isfinite(out.width[m])) {
                tally.width_sum += out.width[m];
                ++tally.width_count;
            }
        }
    }

    if (double(report.fit_failures) > 0.2 * double(R))
        throw std::runtime_error(
            "coverage: more than 20% of replicates failed to fit; the scenario is at fault");

    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

} // namespace proflik
