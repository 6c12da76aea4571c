#pragma once

// Model catalog: exponential, gamma (shape/mean parameterization) and
// normal with known sigma, each as a ModelSpec with density, survival,
// exact sampler and moment-based starting values.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "proflik/model.hpp"
#include "proflik/numerics/special_functions.hpp"

namespace proflik {

// Exponential with mean mu > 0.
inline ModelSpec exponential_model(std::string mean_name = "mu") {
    ModelSpec m;
    m.parameter_space = ParameterSpace({std::move(mean_name)}, {Interval::positive()});
    m.log_density = [](double y, std::span<const double> w) {
        if (y < 0.0) return -std::numeric_limits<double>::infinity();
        return -std::log(w[0]) - y / w[0];
    };
    m.log_survival = [](double y, std::span<const double> w) {
        if (y < 0.0) return 0.0;  // survival is 1 below the support
        return -y / w[0];
    };
    m.sampler = [](std::span<const double> w, RngStream& rng) {
        return rng.exponential(w[0]);
    };
    m.default_init = [](const Dataset& d) {
        double events = double(std::max<std::size_t>(d.event_count(), 1));
        return std::vector<double>{std::max(d.total(), 1e-12) / events};
    };
    m.analytic_score = [](const Dataset& d, std::span<const double> w) {
        double mu = w[0];
        double k = double(d.event_count()), t = d.total();
        return std::vector<double>{-k / mu + t / (mu * mu)};
    };
    m.analytic_information = [](const Dataset& d, std::span<const double> w) {
        double mu = w[0];
        double k = double(d.event_count()), t = d.total();
        Matrix j(1, 1);
        j(0, 0) = 2.0 * t / (mu * mu * mu) - k / (mu * mu);
        return j;
    };
    return m;
}

// Gamma with shape lambda > 0 and mean mu > 0 (rate = lambda / mu).
inline ModelSpec gamma_model(std::string shape_name = "shape", std::string mean_name = "mean") {
    ModelSpec m;
    m.parameter_space = ParameterSpace({std::move(shape_name), std::move(mean_name)},
                                       {Interval::positive(), Interval::positive()});
    m.log_density = [](double y, std::span<const double> w) {
        double lambda = w[0], mu = w[1];
        if (y <= 0.0) return -std::numeric_limits<double>::infinity();
        return lambda * std::log(lambda / mu) + (lambda - 1.0) * std::log(y)
               - lambda * y / mu - log_gamma(lambda);
    };
    m.log_survival = [](double y, std::span<const double> w) {
        double lambda = w[0], mu = w[1];
        if (y <= 0.0) return 0.0;
        return log_gamma_q(lambda, lambda * y / mu);
    };
    m.sampler = [](std::span<const double> w, RngStream& rng) {
        return rng.gamma(w[0], w[1]);
    };
    m.default_init = [](const Dataset& d) {
        double n = double(d.size());
        double mean = d.total() / n;
        double ss = 0.0;
        for (const auto& o : d.observations) {
            double c = o.value - mean;
            ss += c * c;
        }
        double var = ss / n;
        double shape = var > 0.0 ? mean * mean / var : 1.0;
        shape = std::min(std::max(shape, 0.05), 1e6);
        return std::vector<double>{shape, std::max(mean, 1e-12)};
    };
    return m;
}

// Normal with unknown mean and known standard deviation sigma.
inline ModelSpec normal_model(double sigma, std::string mean_name = "mu") {
    if (!(sigma > 0.0))
        throw std::domain_error("normal_model: requires sigma > 0");
    ModelSpec m;
    m.parameter_space = ParameterSpace({std::move(mean_name)}, {Interval::whole_line()});
    m.log_density = [sigma](double y, std::span<const double> w) {
        double z = (y - w[0]) / sigma;
        static const double half_log_two_pi = 0.91893853320467274178;
        return -0.5 * z * z - half_log_two_pi - std::log(sigma);
    };
    m.log_survival = [sigma](double y, std::span<const double> w) {
        return log_std_normal_cdf((w[0] - y) / sigma);
    };
    m.sampler = [sigma](std::span<const double> w, RngStream& rng) {
        return w[0] + sigma * rng.normal();
    };
    m.default_init = [](const Dataset& d) {
        return std::vector<double>{d.total() / double(std::max<std::size_t>(d.size(), 1))};
    };
    // hazard of the standard normal, exp(log phi - log Phi(-z)), stable far out
    auto hazard = [](double z) {
        static const double half_log_two_pi = 0.91893853320467274178;
        return std::exp(-0.5 * z * z - half_log_two_pi - log_std_normal_cdf(-z));
    };
    m.analytic_score = [sigma, hazard](const Dataset& d, std::span<const double> w) {
        double s = 0.0;
        for (const auto& o : d.observations) {
            double z = (o.value - w[0]) / sigma;
            s += o.censored ? hazard(z) / sigma : z / sigma;
        }
        return std::vector<double>{s};
    };
    m.analytic_information = [sigma, hazard](const Dataset& d, std::span<const double> w) {
        double j = 0.0;
        for (const auto& o : d.observations) {
            if (o.censored) {
                double z = (o.value - w[0]) / sigma;
                double h = hazard(z);
                j += h * (h - z) / (sigma * sigma);
            } else {
                j += 1.0 / (sigma * sigma);
            }
        }
        Matrix m1(1, 1);
        m1(0, 0) = j;
        return m1;
    };
    return m;
}

// Two independent exponential groups with distinct mean parameters,
// e.g. treatment/control survival comparisons.
inline IndependenceModel two_group_exponential(const std::string& name1, const std::string& group1,
                                               std::size_t n1, const std::string& name2,
                                               const std::string& group2, std::size_t n2) {
    std::vector<IndependenceComponent> comps;
    comps.push_back({SamplingModel{exponential_model(name1), n1}, group1});
    comps.push_back({SamplingModel{exponential_model(name2), n2}, group2});
    return IndependenceModel(std::move(comps));
}

} // namespace proflik
