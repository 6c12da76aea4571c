#pragma once

#include <stdexcept>
#include <string>

namespace proflik {

// Objective or expression produced a non-finite value where a finite one
// was required (probe points of numeric derivatives, expression nodes, ...).
struct eval_error : std::runtime_error {
    explicit eval_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Root finding asked to start from a bracket whose endpoints do not
// straddle a sign change.
struct bracket_error : std::invalid_argument {
    explicit bracket_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// An iterative routine hit its iteration budget without meeting its
// stopping rule.
struct convergence_error : std::runtime_error {
    explicit convergence_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Observed information is singular or too ill-conditioned to invert.
struct singular_information_error : std::runtime_error {
    explicit singular_information_error(const std::string& msg) : std::runtime_error(msg) {}
};

// The likelihood has no interior maximum (e.g. every observation censored
// under an exponential model: the likelihood increases without bound).
struct unbounded_likelihood_error : std::runtime_error {
    explicit unbounded_likelihood_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace proflik
