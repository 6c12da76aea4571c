#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <span>
#include <vector>

#include "proflik/estimation.hpp"
#include "proflik/expr.hpp"
#include "proflik/models/families.hpp"
#include "proflik/numerics/special_functions.hpp"
#include "proflik/profile.hpp"
#include "proflik/wald_delta.hpp"

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

TEST_CASE("profile of a one-parameter model is the log-likelihood itself") {
    auto model = exponential_model();
    Dataset c = control_group();
    auto g = parse_interest("mu", model.space().names);
    for (double mu : {5.0, 26.0 / 3.0, 14.0}) {
        auto p = profile_loglik(model, c, g, mu);
        REQUIRE(p.converged);
        REQUIRE_THAT(p.loglik, WithinRel(log_likelihood(model, c, {mu}), 1e-12));
        REQUIRE_THAT(p.maximizer[0], WithinRel(mu, 1e-14));
    }
}

TEST_CASE("profile interval for the exponential mean, fully observed group") {
    auto model = exponential_model();
    Dataset c = control_group();
    auto fit = fit_mle(model, c);
    auto g = parse_interest("mu", model.space().names);
    auto ci = profile_interval(model, c, fit, g, 0.95);
    REQUIRE(ci.method == IntervalMethod::Profile);
    REQUIRE_THAT(ci.estimate, WithinRel(26.0 / 3.0, 1e-8));
    REQUIRE_THAT(ci.lower, WithinRel(5.813715509912771, 1e-7));
    REQUIRE_THAT(ci.upper, WithinRel(13.735329425527574, 1e-7));
    REQUIRE_FALSE(ci.lower_unbounded);
    REQUIRE_FALSE(ci.upper_unbounded);
    // the endpoints sit exactly on the cutoff
    double cut = fit.max_loglik - 0.5 * chisq_quantile(0.95, 1);
    for (double e : {ci.lower, ci.upper})
        REQUIRE_THAT(log_likelihood(model, c, {e}), WithinAbs(cut, 1e-6));
}

TEST_CASE("profile interval with censored observations") {
    auto model = exponential_model();
    Dataset d = drug_group();
    auto fit = fit_mle(model, d);
    auto g = parse_interest("mu", model.space().names);
    auto ci = profile_interval(model, d, fit, g, 0.95);
    REQUIRE_THAT(ci.lower, WithinRel(22.127305079426172, 1e-7));
    REQUIRE_THAT(ci.upper, WithinRel(83.01319279269556, 1e-7));
}

TEST_CASE("profile interval for the gamma standard deviation") {
    auto model = gamma_model();
    Dataset c = control_group();
    auto fit = fit_mle(model, c);
    auto g = interest_from_text("gamma_sd", model.space().names);
    auto ci = profile_interval(model, c, fit, g, 0.95);
    REQUIRE_THAT(ci.estimate, WithinAbs(6.762872097052622, 1e-4));
    REQUIRE_THAT(ci.lower, WithinRel(4.633588064755127, 1e-5));
    REQUIRE_THAT(ci.upper, WithinRel(11.296840996245125, 1e-5));
    // narrower below, wider above than the quadratic approximation
    auto d = delta_interval(fit, g, 0.95);
    REQUIRE(ci.lower > d.lower);
    REQUIRE(ci.upper > d.upper);
}

TEST_CASE("table of interest functions for the two-group comparison") {
    auto joint = two_group_exponential("m1", "drug", 21, "m2", "control", 21);
    Dataset all = combined_groups();
    auto fit = fit_mle(joint, all);

    struct Row {
        const char* text;
        double psi, lo, hi;
    };
    const Row rows[] = {
        {"m1", 359.0 / 9.0, 22.127305079426172, 83.01319279269556},
        {"m2", 26.0 / 3.0, 5.813715509912771, 13.735329425527574},
        {"diff", 31.22222222222222, 12.784016247683854, 74.44426040562428},
        {"ratio", 4.602564102564102, 2.1738734133216136, 10.582746863672441},
        {"auc", 0.8215102974828375, 0.68492755240953, 0.9136650782157087},
        {"kl", -2.8198342541436464, -8.677240014927162, -0.6338820115364968},
    };
    for (const auto& row : rows) {
        auto g = interest_from_text(row.text, joint.space().names);
        auto ci = profile_interval(joint, all, fit, g, 0.95);
        INFO("interest " << row.text);
        REQUIRE_THAT(ci.estimate, WithinRel(row.psi, 1e-6));
        REQUIRE_THAT(ci.lower, WithinRel(row.lo, 1e-6));
        REQUIRE_THAT(ci.upper, WithinRel(row.hi, 1e-6));
    }
}

TEST_CASE("constrained extremum check agrees with the profile endpoints") {
    auto joint = two_group_exponential("m1", "drug", 21, "m2", "control", 21);
    Dataset all = combined_groups();
    auto fit = fit_mle(joint, all);
    for (const char* text : {"ratio", "auc", "diff"}) {
        auto g = interest_from_text(text, joint.space().names);
        auto ci = profile_interval(joint, all, fit, g, 0.95);
        auto check = constrained_extremum_check(joint, all, fit, g, 0.95);
        INFO("interest " << text);
        REQUIRE(check.converged);
        REQUIRE_THAT(check.lower, WithinRel(ci.lower, 1e-4));
        REQUIRE_THAT(check.upper, WithinRel(ci.upper, 1e-4));
    }
}

TEST_CASE("profile intervals are invariant under smooth monotone transformation") {
    auto joint = two_group_exponential("m1", "drug", 21, "m2", "control", 21);
    Dataset all = combined_groups();
    auto fit = fit_mle(joint, all);

    auto ratio = interest_from_text("ratio", joint.space().names);
    auto log_ratio = parse_interest("log(m1 / m2)", joint.space().names);
    auto ci = profile_interval(joint, all, fit, ratio, 0.95);
    auto ci_log = profile_interval(joint, all, fit, log_ratio, 0.95);
    REQUIRE_THAT(ci_log.lower, WithinRel(std::log(ci.lower), 1e-6));
    REQUIRE_THAT(ci_log.upper, WithinRel(std::log(ci.upper), 1e-6));

    auto auc = interest_from_text("auc", joint.space().names);
    auto auc_cubed = parse_interest("(m1 / (m1 + m2)) ^ 3", joint.space().names);
    auto ci_a = profile_interval(joint, all, fit, auc, 0.95);
    auto ci_c = profile_interval(joint, all, fit, auc_cubed, 0.95);
    REQUIRE_THAT(ci_c.lower, WithinRel(std::pow(ci_a.lower, 3.0), 1e-6));
    REQUIRE_THAT(ci_c.upper, WithinRel(std::pow(ci_a.upper, 3.0), 1e-6));

    // delta intervals do not share this property
    auto d = delta_interval(fit, ratio, 0.95);
    auto d_log = delta_interval(fit, log_ratio, 0.95);
    REQUIRE(std::fabs(d_log.lower - std::log(d.lower)) > 1e-3);
}

TEST_CASE("profile interval of a normal mean with known sigma is the z interval") {
    auto model = normal_model(2.0);
    Dataset d = Dataset::from_values({3.1, 4.7, 2.2, 5.9, 3.8, 4.4, 2.9, 5.1});
    auto fit = fit_mle(model, d);
    double se = 2.0 / std::sqrt(8.0);
    double z = std_normal_quantile(0.975);
    auto g = parse_interest("mu", model.space().names);
    auto ci = profile_interval(model, d, fit, g, 0.95);
    REQUIRE_THAT(ci.estimate, WithinAbs(4.0125, 1e-7));
    REQUIRE_THAT(ci.lower, WithinAbs(fit.mle[0] - z * se, 1e-9));
    REQUIRE_THAT(ci.upper, WithinAbs(fit.mle[0] + z * se, 1e-9));
}

TEST_CASE("one-sided boundary: interval for a probability stays inside (0,1)") {
    auto joint = two_group_exponential("m1", "drug", 21, "m2", "control", 21);
    Dataset all = combined_groups();
    auto fit = fit_mle(joint, all);
    auto auc = interest_from_text("auc", joint.space().names);
    auto ci = profile_interval(joint, all, fit, auc, 0.95);
    REQUIRE(ci.lower > 0.0);
    REQUIRE(ci.upper < 1.0);
}

TEST_CASE("a far upper endpoint under heavy censoring is still located") {
    // one event among nine censored times: the upper root sits near 11000
    Dataset d;
    d.observations.push_back(Observation::exact(6.0));
    for (double t : {9.0, 10.0, 11.0, 17.0, 19.0, 20.0, 25.0, 32.0})
        d.observations.push_back(Observation::censored_at(t));
    auto model = exponential_model();
    auto fit = fit_mle(model, d);
    REQUIRE_THAT(fit.mle[0], WithinRel(149.0, 1e-7));
    auto g = parse_interest("mu", model.space().names);
    auto ci = profile_interval(model, d, fit, g, 0.99);
    REQUIRE_FALSE(ci.upper_unbounded);
    REQUIRE(ci.upper > 10000.0);
    REQUIRE(ci.upper < 12000.0);
    double cut = fit.max_loglik - 0.5 * chisq_quantile(0.99, 1);
    REQUIRE_THAT(log_likelihood(model, d, {ci.upper}), WithinAbs(cut, 1e-5));
    REQUIRE_THAT(log_likelihood(model, d, {ci.lower}), WithinAbs(cut, 1e-5));
}

TEST_CASE("an unbounded side is reported rather than invented") {
    // location density with a heavy contamination floor: the log-likelihood
    // of the single observation levels off above the 95% cutoff on both sides
    ModelSpec m;
    m.parameter_space = ParameterSpace{{"loc"}, {Interval::whole_line()}};
    m.log_density = [](double y, std::span<const double> w) {
        return std::log(0.1 + 0.9 * std_normal_pdf(y - w[0]));
    };
    Dataset d = Dataset::from_values({0.0});
    auto fit = fit_mle(m, d, {{0.5}});
    REQUIRE_THAT(fit.mle[0], WithinAbs(0.0, 1e-6));
    auto g = parse_interest("loc", m.space().names);
    auto ci = profile_interval(m, d, fit, g, 0.95);
    REQUIRE(ci.lower_unbounded);
    REQUIRE(ci.upper_unbounded);
    REQUIRE(std::isinf(ci.lower));
    REQUIRE(std::isinf(ci.upper));
    // at a tighter level the same likelihood does cross its cutoff
    auto narrow = profile_interval(m, d, fit, g, 0.5);
    REQUIRE_FALSE(narrow.lower_unbounded);
    REQUIRE_FALSE(narrow.upper_unbounded);
    REQUIRE_THAT(narrow.lower, WithinAbs(-narrow.upper, 1e-6));
}

TEST_CASE("profile curve is concave-shaped around the maximum and warm-chains") {
    auto model = gamma_model();
    Dataset c = control_group();
    auto fit = fit_mle(model, c);
    auto g = interest_from_text("gamma_sd", model.space().names);
    auto curve = profile_curve(model, c, fit, g, 41);
    REQUIRE(curve.points.size() == 41);
    // relative log-likelihood peaks near zero and decreases away from psi-hat
    double best = -1e300;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        if (curve.points[i].relative > best) {
            best = curve.points[i].relative;
            best_i = i;
        }
    }
    REQUIRE(best <= 1e-9);
    REQUIRE(best > -5e-3);
    for (std::size_t i = 0; i + 1 < best_i; ++i)
        REQUIRE(curve.points[i].relative <= curve.points[i + 1].relative + 1e-7);
    for (std::size_t i = best_i; i + 1 < curve.points.size(); ++i)
        REQUIRE(curve.points[i].relative >= curve.points[i + 1].relative - 1e-7);
    // grid is strictly increasing and spans the 0.999 interval
    for (std::size_t i = 0; i + 1 < curve.points.size(); ++i)
        REQUIRE(curve.points[i].psi < curve.points[i + 1].psi);
}

TEST_CASE("profile rejects an interest function of no parameters") {
    auto model = exponential_model();
    Dataset c = control_group();
    auto g = parse_interest("1 + 2", model.space().names);
    REQUIRE_THROWS_AS(profile_loglik(model, c, g, 3.0), std::invalid_argument);
}

TEST_CASE("infeasible interest values raise domain_error") {
    auto joint = two_group_exponential("m1", "drug", 21, "m2", "control", 21);
    Dataset all = combined_groups();
    auto auc = interest_from_text("auc", joint.space().names);
    REQUIRE_THROWS_AS(profile_loglik(joint, all, auc, 1.5), std::domain_error);
    REQUIRE_THROWS_AS(profile_loglik(joint, all, auc, -0.2), std::domain_error);
}
