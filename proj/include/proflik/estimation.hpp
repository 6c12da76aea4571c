#pragma once

// Maximum likelihood fitting.  Optimization runs in unconstrained
// coordinates (log for half-bounded parameters, logit for bounded ones),
// so the simplex never has to fight the boundary; results are reported in
// the original parameterization together with the observed information.
//
// Also here: scale estimates built from mean absolute error and mean
// square error, and the log-likelihoods of the sample mean and sample
// median as statistics of a normal sample with known sigma.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "proflik/errors.hpp"
#include "proflik/model.hpp"
#include "proflik/numerics/optimize.hpp"
#include "proflik/numerics/special_functions.hpp"

namespace proflik {

namespace detail {

struct CoordinateTransform {
    enum class Kind { Identity, LogLower, NegLogUpper, Logit };
    Kind kind = Kind::Identity;
    double lo = 0.0, hi = 0.0;

    static CoordinateTransform from(const Interval& b) {
        CoordinateTransform t;
        bool lo_finite = std::isfinite(b.lo), hi_finite = std::isfinite(b.hi);
        if (lo_finite && hi_finite) t.kind = Kind::Logit;
        else if (lo_finite)         t.kind = Kind::LogLower;
        else if (hi_finite)         t.kind = Kind::NegLogUpper;
        else                        t.kind = Kind::Identity;
        t.lo = b.lo;
        t.hi = b.hi;
        return t;
    }

    double to_unconstrained(double x) const {
        switch (kind) {
            case Kind::Identity:    return x;
            case Kind::LogLower:    return std::log(x - lo);
            case Kind::NegLogUpper: return std::log(hi - x);
            case Kind::Logit:       return std::log((x - lo) / (hi - x));
        }
        return x;
    }

    double to_constrained(double t) const {
        switch (kind) {
            case Kind::Identity:    return t;
            case Kind::LogLower:    return lo + std::exp(t);
            case Kind::NegLogUpper: return hi - std::exp(t);
            case Kind::Logit:       return lo + (hi - lo) / (1.0 + std::exp(-t));
        }
        return t;
    }
};

inline std::vector<CoordinateTransform> transforms_for(const ParameterSpace& space) {
    std::vector<CoordinateTransform> ts;
    ts.reserve(space.dimension());
    for (const Interval& b : space.bounds) ts.push_back(CoordinateTransform::from(b));
    return ts;
}

inline std::vector<double> to_unconstrained(const std::vector<CoordinateTransform>& ts,
                                            std::span<const double> x) {
    std::vector<double> t(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) t[i] = ts[i].to_unconstrained(x[i]);
    return t;
}

inline std::vector<double> to_constrained(const std::vector<CoordinateTransform>& ts,
                                          std::span<const double> t) {
    std::vector<double> x(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) x[i] = ts[i].to_constrained(t[i]);
    return x;
}

inline std::vector<double> default_init_values(const ModelSpec& m, const Dataset& d) {
    if (m.default_init) return m.default_init(d);
    std::vector<double> x;
    for (const Interval& b : m.parameter_space.bounds)
        x.push_back(b.contains(1.0) ? 1.0 : 0.5 * (b.lo + b.hi));
    return x;
}

inline std::vector<double> default_init_values(const SamplingModel& m, const Dataset& d) {
    return default_init_values(m.base, d);
}

inline std::vector<double> default_init_values(const IndependenceModel& m, const Dataset& d) {
    std::vector<double> x;
    for (const auto& c : m.components) {
        std::vector<double> part = default_init_values(c.model, d.group_slice(c.group));
        x.insert(x.end(), part.begin(), part.end());
    }
    return x;
}

template <class M>
std::vector<double> default_init_values(const M& m, const Dataset& d) {
    if constexpr (requires { m.default_init_values(d); }) {
        return m.default_init_values(d);
    } else {
        std::vector<double> x;
        for (const Interval& b : m.space().bounds)
            x.push_back(b.contains(1.0) ? 1.0 : 0.5 * (b.lo + b.hi));
        return x;
    }
}

} // namespace detail

struct FitResult {
    ParameterSpace space;
    std::vector<double> mle;
    double max_loglik = 0.0;
    Matrix observed_info;
    double info_condition = 0.0;
    bool converged = false;
    int iterations = 0;
    long evaluations = 0;
    std::vector<double> init;
};

// Maximize the log-likelihood.  init, when given, must lie inside the
// parameter space; otherwise the model's moment-based starting values are
// used.  Throws unbounded_likelihood_error when the maximizer runs away
// (e.g. exponential data with every observation censored).
template <LikelihoodModel M>
FitResult fit_mle(const M& model, const Dataset& data,
                  std::optional<std::vector<double>> init = std::nullopt,
                  const OptimizerSettings& settings = {}) {
    if (data.empty())
        throw std::invalid_argument("fit_mle: empty dataset");
    const ParameterSpace& space = model.space();
    const std::size_t d = space.dimension();

    std::vector<double> x0;
    if (init) {
        if (init->size() != d || !space.contains(*init))
            throw std::domain_error("fit_mle: starting point outside the parameter space");
        x0 = *init;
    } else {
        x0 = detail::default_init_values(model, data);
        if (x0.size() != d || !space.contains(x0))
            throw std::domain_error("fit_mle: model produced an invalid starting point");
    }

    auto transforms = detail::transforms_for(space);
    std::vector<double> t0 = detail::to_unconstrained(transforms, x0);

    auto objective = [&](std::span<const double> t) {
        std::vector<double> x = detail::to_constrained(transforms, t);
        for (double xi : x)
            if (!std::isfinite(xi)) return -std::numeric_limits<double>::infinity();
        try {
            return model.log_likelihood(data, x);
        } catch (const std::domain_error&) {
            return -std::numeric_limits<double>::infinity();
        }
    };

    MaxResult opt = maximize(objective, t0, {}, settings);
    std::vector<double> mle = detail::to_constrained(transforms, opt.argmax);

    // Newton polish: the simplex stops on value flatness, which leaves the
    // argmax off by roughly the square root of the tolerance.  A few
    // curvature steps (with backtracking, never decreasing the value)
    // converge it to full precision when the surface is locally concave.
    try {
        double best = model.log_likelihood(data, mle);
        for (int pass = 0; pass < 8; ++pass) {
            std::vector<double> s = score(model, data, mle, settings.gradient_step);
            Matrix inv = spd_inverse(
                observed_information(model, data, mle, settings.gradient_step));
            std::vector<double> newton(d, 0.0);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) newton[i] += inv(i, j) * s[j];

            double t = 1.0;
            bool accepted = false;
            double moved = 0.0;
            for (int bt = 0; bt < 12 && !accepted; ++bt, t *= 0.5) {
                std::vector<double> cand(d);
                for (std::size_t i = 0; i < d; ++i) cand[i] = mle[i] + t * newton[i];
                if (!space.contains(cand)) continue;
                double lc;
                try {
                    lc = model.log_likelihood(data, cand);
                } catch (const std::domain_error&) {
                    continue;
                }
                if (lc >= best && std::isfinite(lc)) {
                    moved = 0.0;
                    for (std::size_t i = 0; i < d; ++i)
                        moved = std::max(moved, std::fabs(cand[i] - mle[i]) /
                                                    std::max(1.0, std::fabs(cand[i])));
                    mle = std::move(cand);
                    best = lc;
                    accepted = true;
                }
            }
            if (!accepted || moved <= 1e-13) break;
        }
    } catch (const std::exception&) {
        // differentiation failed or curvature is not positive definite here;
        // the simplex result stands on its own
    }

    // A maximizer pushed absurdly far past the data scale means the
    // likelihood has no interior maximum in that direction.
    double runaway = 1e8 * std::max(1.0, data.max_abs_value());
    for (std::size_t i = 0; i < d; ++i) {
        const Interval& b = space.bounds[i];
        double excursion;
        if (std::isfinite(b.lo) && !std::isfinite(b.hi))      excursion = mle[i] - b.lo;
        else if (!std::isfinite(b.lo) && std::isfinite(b.hi)) excursion = b.hi - mle[i];
        else if (!std::isfinite(b.lo) && !std::isfinite(b.hi)) excursion = std::fabs(mle[i]);
        else continue;
        if (excursion > runaway)
            throw unbounded_likelihood_error(
                "fit_mle: likelihood keeps increasing in parameter '" + space.names[i] +
                "'; no interior maximum (is every observation censored?)");
    }

    FitResult fit;
    fit.space = space;
    fit.mle = mle;
    fit.max_loglik = model.log_likelihood(data, mle);
    fit.observed_info = observed_information(model, data, mle, settings.gradient_step);
    SymmetricEigen eig = symmetric_eigen(fit.observed_info);
    fit.info_condition = symmetric_condition(eig);
    fit.iterations = opt.iterations;
    fit.evaluations = opt.evaluations;
    fit.init = x0;

    bool score_ok = true;
    std::vector<double> s = score(model, data, mle, settings.gradient_step);
    for (double si : s)
        score_ok = score_ok && std::fabs(si) <= 1e-5 * std::max(1.0, std::fabs(fit.max_loglik));
    fit.converged = opt.converged && score_ok;
    return fit;
}

// ======================================================================
// scale estimates from absolute and squared deviations
// ======================================================================

struct SpreadEstimate {
    double value = 0.0;
    bool degenerate = false;  // all observations equal
};

// sqrt(pi/2) * mean |y - ybar|: unbiased-in-the-limit normal scale
// estimate built from absolute deviations.
inline SpreadEstimate mean_error_estimate(std::span<const double> y) {
    if (y.size() < 2)
        throw std::domain_error("mean_error_estimate: needs at least two observations");
    double ybar = 0.0;
    for (double v : y) ybar += v;
    ybar /= double(y.size());
    double mad = 0.0;
    for (double v : y) mad += std::fabs(v - ybar);
    mad /= double(y.size());
    static const double sqrt_half_pi = 1.25331413731550025120;
    return {sqrt_half_pi * mad, mad == 0.0};
}

// sqrt(mean (y - ybar)^2): normal scale estimate from squared deviations.
inline SpreadEstimate mean_square_error_estimate(std::span<const double> y) {
    if (y.size() < 2)
        throw std::domain_error("mean_square_error_estimate: needs at least two observations");
    double ybar = 0.0;
    for (double v : y) ybar += v;
    ybar /= double(y.size());
    double ss = 0.0;
    for (double v : y) {
        double c = v - ybar;
        ss += c * c;
    }
    return {std::sqrt(ss / double(y.size())), ss == 0.0};
}

// ======================================================================
// log-likelihoods of the sample mean and sample median as statistics
// of a normal sample with known sigma
// ======================================================================

// Relative log-likelihood of mu given only the sample mean of n normal
// observations (known sigma); equals 0 at mu = ybar.
inline double statistic_loglik_mean(double mu, double ybar, std::size_t n, double sigma) {
    if (n < 1 || !(sigma > 0.0))
        throw std::domain_error("statistic_loglik_mean: requires n >= 1 and sigma > 0");
    double z = (ybar - mu) / sigma;
    return -0.5 * double(n) * z * z;
}

// Relative log-likelihood of mu given only the sample median of n normal
// observations (n odd, known sigma); equals 0 at mu = ymed.  The order
// statistic density gives -z^2/2 + (n-1)/2 * [ln Phi(z) + ln Phi(-z)],
// normalized by its value at z = 0.
inline double statistic_loglik_median(double mu, double ymed, std::size_t n, double sigma) {
    if (n < 3 || n % 2 == 0 || !(sigma > 0.0))
        throw std::domain_error("statistic_loglik_median: requires odd n >= 3 and sigma > 0");
    double z = (ymed - mu) / sigma;
    double m = 0.5 * double(n - 1);
    static const double log2 = 0.69314718055994530942;
    return -0.5 * z * z + m * (log_std_normal_cdf(z) + log_std_normal_cdf(-z)) + 2.0 * m * log2;
}

// Ratio of the median curve's curvature to the mean curve's curvature at
// the shared maximum, in the large-n limit.
inline double median_asymptotic_efficiency() {
    static const double pi = 3.14159265358979323846;
    return 2.0 / pi;
}

} // namespace proflik
