#pragma once

// Model core: observations with right censoring, named parameter spaces,
// model specifications built from log-density and log-survival callables,
// i.i.d. replication, independent-group composition, and the likelihood
// functions (value, relative value, score, observed information) every
// other module consumes.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "proflik/errors.hpp"
#include "proflik/linalg.hpp"
#include "proflik/numerics/differentiation.hpp"
#include "proflik/numerics/interval.hpp"
#include "proflik/random.hpp"

namespace proflik {

// ======================================================================
// data
// ======================================================================

struct Observation {
    double value = 0.0;
    bool censored = false;   // true: value is a lower bound (right censoring)
    std::string group;       // empty unless the dataset feeds a grouped model

    static Observation exact(double v, std::string g = {}) { return {v, false, std::move(g)}; }
    static Observation censored_at(double v, std::string g = {}) { return {v, true, std::move(g)}; }
};

struct Dataset {
    std::vector<Observation> observations;

    static Dataset from_values(const std::vector<double>& values) {
        Dataset d;
        d.observations.reserve(values.size());
        for (double v : values) d.observations.push_back(Observation::exact(v));
        return d;
    }

    std::size_t size() const { return observations.size(); }
    bool empty() const { return observations.empty(); }

    std::size_t event_count() const {
        std::size_t n = 0;
        for (const auto& o : observations) n += !o.censored;
        return n;
    }
    std::size_t censored_count() const { return size() - event_count(); }

    double total() const {
        double s = 0.0;
        for (const auto& o : observations) s += o.value;
        return s;
    }

    double max_abs_value() const {
        double m = 0.0;
        for (const auto& o : observations) m = std::max(m, std::fabs(o.value));
        return m;
    }

    Dataset group_slice(const std::string& group) const {
        Dataset d;
        for (const auto& o : observations)
            if (o.group == group) d.observations.push_back(o);
        return d;
    }
};

// ======================================================================
// parameter space
// ======================================================================

struct ParameterSpace {
    std::vector<std::string> names;
    std::vector<Interval> bounds;

    ParameterSpace() = default;
    ParameterSpace(std::vector<std::string> names_, std::vector<Interval> bounds_)
        : names(std::move(names_)), bounds(std::move(bounds_)) {
        validate();
    }

    void validate() const {
        if (names.empty() || names.size() != bounds.size())
            throw std::invalid_argument("ParameterSpace: names/bounds size mismatch or empty");
        for (const Interval& b : bounds) b.validate();
        for (std::size_t i = 0; i < names.size(); ++i)
            for (std::size_t j = i + 1; j < names.size(); ++j)
                if (names[i] == names[j])
                    throw std::invalid_argument("ParameterSpace: duplicate parameter name '" + names[i] + "'");
    }

    std::size_t dimension() const { return names.size(); }

    bool contains(std::span<const double> w) const {
        if (w.size() != bounds.size()) return false;
        for (std::size_t i = 0; i < bounds.size(); ++i)
            if (!bounds[i].contains(w[i])) return false;
        return true;
    }

    // Index of a named parameter, or npos when absent.
    static constexpr std::size_t npos = std::size_t(-1);
    std::size_t index_of(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return i;
        return npos;
    }
};

// ======================================================================
// model specification
// ======================================================================

struct ModelSpec {
    ParameterSpace parameter_space;

    // log f(y; w) for an exact observation
    std::function<double(double, std::span<const double>)> log_density;
    // log S(y; w) = log(1 - F(y; w)) for a right-censored observation
    std::function<double(double, std::span<const double>)> log_survival;
    // draw one observation value (optional; needed for simulation)
    std::function<double(std::span<const double>, RngStream&)> sampler;
    // moment-style starting values (optional; fit falls back to midpoints)
    std::function<std::vector<double>(const Dataset&)> default_init;
    // closed-form score and observed information (optional)
    std::function<std::vector<double>(const Dataset&, std::span<const double>)> analytic_score;
    std::function<Matrix(const Dataset&, std::span<const double>)> analytic_information;

    const ParameterSpace& space() const { return parameter_space; }

    double log_likelihood(const Dataset& data, std::span<const double> w) const {
        if (w.size() != parameter_space.dimension())
            throw std::invalid_argument("log_likelihood: parameter dimension mismatch");
        if (!parameter_space.contains(w))
            throw std::domain_error("log_likelihood: parameters outside the model's space");
        if (!log_density)
            throw std::invalid_argument("log_likelihood: model has no log_density");
        double total = 0.0;
        for (const Observation& o : data.observations) {
            double term;
            if (o.censored) {
                if (!log_survival)
                    throw std::invalid_argument(
                        "log_likelihood: censored observation but model has no log_survival");
                term = log_survival(o.value, w);
            } else {
                term = log_density(o.value, w);
            }
            if (std::isnan(term))
                throw eval_error("log_likelihood: NaN contribution at an interior point");
            total += term;
            if (total == -std::numeric_limits<double>::infinity())
                return total;  // zero likelihood; -inf is the sentinel
        }
        return total;
    }
};

// ======================================================================
// i.i.d. replication
// ======================================================================

struct SamplingModel {
    ModelSpec base;
    std::size_t sample_size = 0;

    const ParameterSpace& space() const { return base.parameter_space; }

    double log_likelihood(const Dataset& data, std::span<const double> w) const {
        if (sample_size != 0 && data.size() != sample_size)
            throw std::invalid_argument("SamplingModel: dataset size does not match declared sample size");
        return base.log_likelihood(data, w);
    }
};

// ======================================================================
// independent-group composition
// ======================================================================

struct IndependenceComponent {
    SamplingModel model;
    std::string group;
};

struct IndependenceModel {
    std::vector<IndependenceComponent> components;

    explicit IndependenceModel(std::vector<IndependenceComponent> comps)
        : components(std::move(comps)) {
        if (components.empty())
            throw std::invalid_argument("IndependenceModel: no components");
        std::vector<std::string> names;
        std::vector<Interval> bounds;
        for (const auto& c : components) {
            const ParameterSpace& s = c.model.space();
            for (std::size_t i = 0; i < s.dimension(); ++i) {
                names.push_back(s.names[i]);
                bounds.push_back(s.bounds[i]);
            }
        }
        // ParameterSpace validation rejects duplicate names across components.
        joint_space_ = ParameterSpace(std::move(names), std::move(bounds));
    }

    const ParameterSpace& space() const { return joint_space_; }

    double log_likelihood(const Dataset& data, std::span<const double> w) const {
        if (w.size() != joint_space_.dimension())
            throw std::invalid_argument("IndependenceModel: parameter dimension mismatch");
        for (const Observation& o : data.observations) {
            bool known = false;
            for (const auto& c : components) known = known || (c.group == o.group);
            if (!known)
                throw std::invalid_argument("IndependenceModel: observation with unknown group '" + o.group + "'");
        }
        double total = 0.0;
        std::size_t offset = 0;
        for (const auto& c : components) {
            Dataset slice = data.group_slice(c.group);
            if (slice.empty())
                throw std::invalid_argument("IndependenceModel: no observations for group '" + c.group + "'");
            std::size_t d = c.model.space().dimension();
            total += c.model.log_likelihood(slice, w.subspan(offset, d));
            if (total == -std::numeric_limits<double>::infinity()) return total;
            offset += d;
        }
        return total;
    }

private:
    ParameterSpace joint_space_;
};

// ======================================================================
// likelihood functions over any model
// ======================================================================

template <class M>
concept LikelihoodModel = requires(const M& m, const Dataset& d, std::span<const double> w) {
    { m.space() } -> std::convertible_to<const ParameterSpace&>;
    { m.log_likelihood(d, w) } -> std::convertible_to<double>;
};

template <LikelihoodModel M>
double log_likelihood(const M& model, const Dataset& data, const std::vector<double>& w) {
    return model.log_likelihood(data, w);
}

template <LikelihoodModel M>
double relative_log_likelihood(const M& model, const Dataset& data,
                               const std::vector<double>& w, const std::vector<double>& w_hat) {
    return model.log_likelihood(data, w) - model.log_likelihood(data, w_hat);
}

template <LikelihoodModel M>
double relative_likelihood(const M& model, const Dataset& data,
                           const std::vector<double>& w, const std::vector<double>& w_hat) {
    return std::exp(relative_log_likelihood(model, data, w, w_hat));
}

template <LikelihoodModel M>
std::vector<double> score(const M& model, const Dataset& data, const std::vector<double>& w,
                          double rel_step = default_gradient_step) {
    if constexpr (std::is_same_v<M, ModelSpec>) {
        if (model.analytic_score) return model.analytic_score(data, w);
    }
    return numeric_gradient(
        [&](std::span<const double> p) { return model.log_likelihood(data, p); }, w, rel_step);
}

// Observed information J(w) = -Hessian of the log-likelihood.
template <LikelihoodModel M>
Matrix observed_information(const M& model, const Dataset& data, const std::vector<double>& w,
                            double rel_step = default_gradient_step) {
    if constexpr (std::is_same_v<M, ModelSpec>) {
        if (model.analytic_information) return model.analytic_information(data, w);
    }
    Matrix h = numeric_hessian(
        [&](std::span<const double> p) { return model.log_likelihood(data, p); }, w, rel_step);
    Matrix j(h.rows(), h.cols());
    for (std::size_t i = 0; i < h.rows(); ++i)
        for (std::size_t k = 0; k < h.cols(); ++k) j(i, k) = -h(i, k);
    return j;
}

} // namespace proflik
