#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "proflik/estimation.hpp"
#include "proflik/expr.hpp"
#include "proflik/models/families.hpp"
#include "proflik/wald_delta.hpp"

using namespace proflik;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Dataset control_group() {
    return Dataset::from_values({1, 1, 2, 2, 3, 4, 4, 5, 5, 8, 8,
                                 8, 8, 11, 11, 12, 12, 15, 17, 22, 23});
}

}  // namespace

TEST_CASE("wald interval for the exponential mean") {
    auto fit = fit_mle(exponential_model(), control_group());
    auto w = wald_interval(fit, 0, 0.95);
    REQUIRE(w.method == IntervalMethod::Wald);
    REQUIRE_THAT(w.estimate, WithinRel(26.0 / 3.0, 1e-8));
    REQUIRE_THAT(w.standard_error, WithinRel(1.8912217153786006, 1e-4));
    REQUIRE_THAT(w.lower, WithinRel(4.959940217744548, 1e-4));
    REQUIRE_THAT(w.upper, WithinRel(12.373393115588783, 1e-4));
    REQUIRE(w.contains(26.0 / 3.0));
    REQUIRE_FALSE(w.lower_unbounded);
    REQUIRE_FALSE(w.outside_parameter_range);
    REQUIRE_THAT(w.width(), WithinRel(w.upper - w.lower, 1e-14));
}

TEST_CASE("wald interval can escape the parameter range and says so") {
    // tiny sample: mu-hat ± z*se dips below zero
    auto fit = fit_mle(exponential_model(), Dataset::from_values({1.0, 2.0}));
    auto w = wald_interval(fit, 0, 0.99);
    REQUIRE(w.lower < 0.0);
    REQUIRE(w.outside_parameter_range);
}

TEST_CASE("wald interval validates its inputs") {
    auto fit = fit_mle(exponential_model(), control_group());
    REQUIRE_THROWS_AS(wald_interval(fit, 3, 0.95), std::invalid_argument);
    REQUIRE_THROWS_AS(wald_interval(fit, 0, 0.0), std::domain_error);
    REQUIRE_THROWS_AS(wald_interval(fit, 0, 1.0), std::domain_error);
}

TEST_CASE("delta interval for a gamma standard deviation") {
    auto fit = fit_mle(gamma_model(), control_group());
    auto g = interest_from_text("gamma_sd", fit.space.names);
    auto d = delta_interval(fit, g, 0.95);
    REQUIRE(d.method == IntervalMethod::Delta);
    REQUIRE_THAT(d.estimate, WithinAbs(6.762872097052622, 1e-5));
    REQUIRE_THAT(d.standard_error, WithinRel(1.4968003908767895, 1e-3));
    REQUIRE_THAT(d.lower, WithinRel(3.829197238888639, 1e-3));
    REQUIRE_THAT(d.upper, WithinRel(9.696546955216604, 1e-3));
}

TEST_CASE("delta interval reduces to wald for a bare parameter") {
    auto fit = fit_mle(exponential_model(), control_group());
    auto g = parse_interest("mu", fit.space.names);
    auto d = delta_interval(fit, g, 0.95);
    auto w = wald_interval(fit, 0, 0.95);
    REQUIRE_THAT(d.lower, WithinRel(w.lower, 1e-9));
    REQUIRE_THAT(d.upper, WithinRel(w.upper, 1e-9));
}

TEST_CASE("delta interval is not invariant under curved reparameterization") {
    auto fit = fit_mle(exponential_model(), control_group());
    auto direct = delta_interval(fit, parse_interest("log(mu)", fit.space.names), 0.95);
    auto w = wald_interval(fit, 0, 0.95);
    // transforming the endpoints of the plain interval gives a different answer
    REQUIRE(std::fabs(direct.lower - std::log(w.lower)) > 1e-3);
    REQUIRE(std::fabs(direct.upper - std::log(w.upper)) > 1e-3);
}

TEST_CASE("a flat interest function is flagged as degenerate") {
    auto fit = fit_mle(exponential_model(), control_group());
    auto g = parse_interest("mu * 0 + 3", fit.space.names);
    auto d = delta_interval(fit, g, 0.95);
    REQUIRE(d.degenerate_gradient);
    REQUIRE_THAT(d.estimate, WithinAbs(3.0, 1e-12));
}
