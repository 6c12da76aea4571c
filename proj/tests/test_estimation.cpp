#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "proflik/errors.hpp"
#include "proflik/estimation.hpp"
#include "proflik/models/families.hpp"

using namespace proflik;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Dataset control_group() {
    return Dataset::from_values({1, 1, 2, 2, 3, 4, 4, 5, 5, 8, 8,
                                 8, 8, 11, 11, 12, 12, 15, 17, 22, 23});
}

Dataset drug_group() {
    Dataset d;
    for (double t : {6, 6, 6, 7, 10, 13, 16, 22, 23})
        d.observations.push_back(Observation::exact(t));
    for (double t : {6, 9, 10, 11, 17, 19, 20, 25, 32, 32, 34, 35})
        d.observations.push_back(Observation::censored_at(t));
    return d;
}

Dataset combined_groups() {
    Dataset all;
    for (auto o : drug_group().observations) {
        o.group = "drug";
        all.observations.push_back(o);
    }
    for (auto o : control_group().observations) {
        o.group = "control";
        all.observations.push_back(o);
    }
    return all;
}

}  // namespace

TEST_CASE("exponential fit recovers the closed-form maximum") {
    auto model = exponential_model();
    auto fit = fit_mle(model, control_group());
    REQUIRE(fit.converged);
    REQUIRE_THAT(fit.mle[0], WithinRel(26.0 / 3.0, 1e-8));
    REQUIRE_THAT(fit.max_loglik, WithinRel(-66.3491692364208, 1e-10));
    REQUIRE_THAT(fit.observed_info(0, 0), WithinRel(189.0 / 676.0, 1e-4));

    auto fit_d = fit_mle(model, drug_group());
    REQUIRE(fit_d.converged);
    REQUIRE_THAT(fit_d.mle[0], WithinRel(359.0 / 9.0, 1e-8));
    REQUIRE_THAT(fit_d.max_loglik, WithinRel(-42.174880300368535, 1e-10));
}

TEST_CASE("gamma fit on the fully observed group") {
    auto fit = fit_mle(gamma_model(), control_group());
    REQUIRE(fit.converged);
    REQUIRE_THAT(fit.mle[0], WithinAbs(1.6422597331404873, 2e-6));
    REQUIRE_THAT(fit.mle[1], WithinRel(26.0 / 3.0, 1e-6));
    REQUIRE_THAT(fit.max_loglik, WithinRel(-65.00137990017939, 1e-10));
    REQUIRE(fit.info_condition > 1.0);
}

TEST_CASE("joint two-group fit maximizes each group independently") {
    auto joint = two_group_exponential("m1", "drug", 21, "m2", "control", 21);
    auto fit = fit_mle(joint, combined_groups());
    REQUIRE(fit.converged);
    REQUIRE_THAT(fit.mle[0], WithinRel(359.0 / 9.0, 1e-7));
    REQUIRE_THAT(fit.mle[1], WithinRel(26.0 / 3.0, 1e-7));
    REQUIRE_THAT(fit.max_loglik, WithinRel(-108.52404953678935, 1e-10));
}

TEST_CASE("fit accepts explicit starting values and rejects invalid ones") {
    auto model = exponential_model();
    auto fit = fit_mle(model, control_group(), {{3.0}});
    REQUIRE_THAT(fit.mle[0], WithinRel(26.0 / 3.0, 1e-8));
    REQUIRE_THROWS_AS(fit_mle(model, control_group(), {{-2.0}}), std::domain_error);
}

TEST_CASE("an all-censored sample has no interior maximum") {
    Dataset d;
    for (double t : {5.0, 8.0, 11.0})
        d.observations.push_back(Observation::censored_at(t));
    REQUIRE_THROWS_AS(fit_mle(exponential_model(), d), unbounded_likelihood_error);
}

TEST_CASE("spread estimates from mean deviations") {
    std::vector<double> c{1, 1, 2, 2, 3, 4, 4, 5, 5, 8, 8,
                          8, 8, 11, 11, 12, 12, 15, 17, 22, 23};
    auto me = mean_error_estimate(c);
    REQUIRE_FALSE(me.degenerate);
    REQUIRE_THAT(me.value, WithinRel(6.405827812945887, 1e-12));
    auto mse = mean_square_error_estimate(c);
    REQUIRE_THAT(mse.value, WithinRel(6.311994125573141, 1e-12));
    std::vector<double> flat{4.0, 4.0, 4.0};
    REQUIRE(mean_error_estimate(flat).degenerate);
}

TEST_CASE("normal location log-likelihood of mean and median statistics") {
    // n = 11, unit sigma, evaluated 0.5 from the estimate
    REQUIRE_THAT(statistic_loglik_mean(0.5, 0.0, 11, 1.0), WithinRel(-1.375, 1e-12));
    REQUIRE_THAT(statistic_loglik_median(0.5, 0.0, 11, 1.0),
                 WithinRel(-0.9178190788119229, 1e-12));
    REQUIRE(statistic_loglik_mean(0.0, 0.0, 11, 1.0) == 0.0);
    REQUIRE_THAT(statistic_loglik_median(0.0, 0.0, 11, 1.0), WithinAbs(0.0, 1e-12));
    REQUIRE_THROWS_AS(statistic_loglik_median(0.5, 0.0, 10, 1.0), std::domain_error);
    REQUIRE_THROWS_AS(statistic_loglik_mean(0.5, 0.0, 11, 0.0), std::domain_error);
    REQUIRE_THAT(median_asymptotic_efficiency(), WithinRel(2.0 / M_PI, 1e-15));
}

TEST_CASE("curvature of the median statistic approaches the efficiency limit") {
    auto curvature_ratio = [](std::size_t n) {
        const double h = 1e-4;
        double c_mean = (statistic_loglik_mean(h, 0.0, n, 1.0) -
                         2.0 * statistic_loglik_mean(0.0, 0.0, n, 1.0) +
                         statistic_loglik_mean(-h, 0.0, n, 1.0)) / (h * h);
        double c_med = (statistic_loglik_median(h, 0.0, n, 1.0) -
                        2.0 * statistic_loglik_median(0.0, 0.0, n, 1.0) +
                        statistic_loglik_median(-h, 0.0, n, 1.0)) / (h * h);
        return c_med / c_mean;
    };
    REQUIRE_THAT(curvature_ratio(11), WithinRel(0.6696543385159831, 1e-6));
    REQUIRE_THAT(curvature_ratio(10001), WithinAbs(2.0 / M_PI, 1e-4));
}
