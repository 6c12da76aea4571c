// proflik: likelihood inference for parametric models with right-censored
// data.  Fits by maximum likelihood and computes Wald, delta-method and
// profile likelihood confidence intervals for smooth scalar interest
// functions of the parameters.
//
// Exit codes: 0 success, 1 computation failure, 2 usage error,
// 3 unreadable or malformed input file.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "proflik/coverage.hpp"
#include "proflik/estimation.hpp"
#include "proflik/expr.hpp"
#include "proflik/io.hpp"
#include "proflik/models/families.hpp"
#include "proflik/profile.hpp"
#include "proflik/wald_delta.hpp"

namespace {

using namespace proflik;

std::string fmt(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

void print_fit(const LoadedModel& model, const Dataset& data, const FitResult& fit) {
    std::printf("family: %s   observations: %zu (%zu events, %zu censored)\n",
                model.family().c_str(), data.size(), data.event_count(), data.censored_count());
    bool se_ok = true;
    Matrix inv;
    try {
        inv = spd_inverse(fit.observed_info);
    } catch (const singular_information_error&) {
        se_ok = false;
    }
    for (std::size_t i = 0; i < fit.mle.size(); ++i) {
        if (se_ok)
            std::printf("  %-8s = %12.6f   (se %.6f)\n", fit.space.names[i].c_str(), fit.mle[i],
                        std::sqrt(inv(i, i)));
        else
            std::printf("  %-8s = %12.6f\n", fit.space.names[i].c_str(), fit.mle[i]);
    }
    std::printf("max log-likelihood: %.6f\n", fit.max_loglik);
    std::printf("converged: %s   (iterations %d, evaluations %ld)\n",
                fit.converged ? "yes" : "NO", fit.iterations, fit.evaluations);
}

void print_interval(const std::string& interest, const IntervalEstimate& iv) {
    std::string lo = iv.lower_unbounded ? "-inf" : fmt(iv.lower);
    std::string hi = iv.upper_unbounded ? "+inf" : fmt(iv.upper);
    std::printf("%s: estimate %s, %.0f%% %s interval (%s, %s)\n", interest.c_str(),
                fmt(iv.estimate).c_str(), 100.0 * iv.level, method_name(iv.method), lo.c_str(),
                hi.c_str());
    if (std::isfinite(iv.standard_error))
        std::printf("  standard error: %s\n", fmt(iv.standard_error).c_str());
    if (iv.outside_parameter_range)
        std::printf("  note: an endpoint lies outside the parameter's natural range\n");
    if (iv.degenerate_gradient)
        std::printf("  note: interest gradient vanished at the estimate\n");
    if (iv.multiple_roots_suspected)
        std::printf("  note: the likelihood cut appears to be crossed more than twice\n");
}

json dataset_summary(const std::string& path, const Dataset& data) {
    return json{{"path", path},
                {"n", data.size()},
                {"events", data.event_count()},
                {"censored", data.censored_count()}};
}

int cmd_fit(const std::string& model_path, const std::string& data_path,
            const std::string& out_path) {
    LoadedModel model = read_model(model_path);
    Dataset data = read_dataset(data_path);
    FitResult fit = fit_mle(model, data);
    print_fit(model, data, fit);
    if (!out_path.empty()) {
        json doc{{"version", document_version},
                 {"command", "fit"},
                 {"model", load_json_file(model_path)},
                 {"data", dataset_summary(data_path, data)},
                 {"fit", fit_to_json(fit)}};
        write_json_file(doc, out_path);
        std::printf("wrote %s\n", out_path.c_str());
    }
    return fit.converged ? 0 : 1;
}

int cmd_ci(const std::string& model_path, const std::string& data_path,
           const std::string& interest_text, double level, const std::string& method,
           bool run_check, const std::string& out_path) {
    LoadedModel model = read_model(model_path);
    Dataset data = read_dataset(data_path);
    FitResult fit = fit_mle(model, data);
    print_fit(model, data, fit);
    std::printf("\n");

    InterestFunction g = interest_from_text(interest_text, model.space());
    IntervalEstimate iv;
    if (method == "wald") {
        if (!g.is_parameter()) {
            std::fprintf(stderr, "error: the wald method applies only to a single parameter\n");
            return 1;
        }
        iv = wald_interval(fit, g.parameter_index(), level);
    } else if (method == "delta") {
        iv = delta_interval(fit, g, level);
    } else {
        iv = profile_interval(model, data, fit, g, level);
    }
    print_interval(interest_text, iv);

    json check_json;
    if (run_check) {
        if (method != "profile") {
            std::fprintf(stderr, "error: --check applies to the profile method\n");
            return 1;
        }
        ConstrainedExtremum ce = constrained_extremum_check(model, data, fit, g, level);
        double dl = std::fabs(ce.lower - iv.lower) / std::max(1.0, std::fabs(iv.lower));
        double du = std::fabs(ce.upper - iv.upper) / std::max(1.0, std::fabs(iv.upper));
        double disagreement = std::max(dl, du);
        std::printf("cross-check (constrained extremum): (%s, %s)   max relative diff %.2e\n",
                    fmt(ce.lower).c_str(), fmt(ce.upper).c_str(), disagreement);
        if (!ce.converged || disagreement > 1e-4)
            std::printf("  WARNING: cross-check disagrees with the profile interval\n");
        check_json = json{{"lower", ce.lower},
                          {"upper", ce.upper},
                          {"converged", ce.converged},
                          {"max_relative_diff", disagreement}};
    }

    if (!out_path.empty()) {
        json doc{{"version", document_version},
                 {"command", "ci"},
                 {"model", load_json_file(model_path)},
                 {"data", dataset_summary(data_path, data)},
                 {"fit", fit_to_json(fit)},
                 {"interval", interval_to_json(iv, interest_text)}};
        if (!check_json.is_null()) doc["cross_check"] = check_json;
        write_json_file(doc, out_path);
        std::printf("wrote %s\n", out_path.c_str());
    }
    return 0;
}

int cmd_profile_curve(const std::string& model_path, const std::string& data_path,
                      const std::string& interest_text, std::size_t grid,
                      const std::string& range_text, const std::string& out_path) {
    LoadedModel model = read_model(model_path);
    Dataset data = read_dataset(data_path);
    FitResult fit = fit_mle(model, data);

    std::optional<std::pair<double, double>> range;
    if (!range_text.empty()) {
        auto colon = range_text.find(':');
        if (colon == std::string::npos)
            throw io_error("--range expects lo:hi");
        try {
            range = std::make_pair(std::stod(range_text.substr(0, colon)),
                                   std::stod(range_text.substr(colon + 1)));
        } catch (const std::exception&) {
            throw io_error("--range expects lo:hi with numeric bounds");
        }
    }

    InterestFunction g = interest_from_text(interest_text, model.space());
    ProfileCurve curve = profile_curve(model, data, fit, g, grid, range);
    if (out_path.empty()) {
        write_profile_trace(curve, std::cout);
    } else {
        write_profile_trace(curve, out_path);
        std::printf("wrote %s (%zu points, estimate %.6f, max log-lik %.6f)\n", out_path.c_str(),
                    curve.points.size(), curve.psi_hat, curve.max_loglik);
    }
    return 0;
}

int cmd_coverage(const std::string& scenario_path, std::size_t replicates_override,
                 std::uint64_t seed_override, bool seed_given, std::size_t workers,
                 const std::string& out_path) {
    CoverageScenario scenario = read_scenario(scenario_path);
    if (replicates_override) scenario.replicates = replicates_override;
    if (seed_given) scenario.seed = seed_override;

    CoverageReport report = run_coverage(scenario, workers);
    std::printf("coverage of %s at level %.2f: true value %.6f, n=%zu, R=%zu, seed %llu\n",
                scenario.interest.c_str(), scenario.level, report.true_psi, scenario.sample_size,
                scenario.replicates, static_cast<unsigned long long>(scenario.seed));
    std::printf("fit failures: %zu   elapsed: %.1fs   workers: %zu\n", report.fit_failures,
                report.elapsed_seconds, report.workers);
    for (const auto& [method, tally] : report.tallies) {
        std::printf("  %-8s coverage %.4f (mc se %.4f)  covered %zu/%zu  failures %zu"
                    "  unbounded %zu  mean width %.4f\n",
                    method_name(method), tally.coverage(), tally.mc_std_error(), tally.covered,
                    tally.total, tally.failures, tally.unbounded, tally.mean_width());
    }
    if (!out_path.empty()) {
        write_json_file(coverage_to_json(report), out_path);
        std::printf("wrote %s\n", out_path.c_str());
    }
    return 0;
}

// ----------------------------------------------------------------------
// reproduce: the full two-group and gamma analysis with expected values
// ----------------------------------------------------------------------

struct Expectation {
    std::string name;
    double computed;
    double expected;
    double tol;
    bool relative;
};

int cmd_reproduce(const std::string& data_dir, const std::string& out_path) {
    std::vector<Expectation> checks;
    auto expect = [&](const std::string& name, double computed, double expected, double tol,
                      bool relative = false) {
        checks.push_back({name, computed, expected, tol, relative});
    };

    // two-exponential independence model over both groups
    Dataset both = read_dataset(data_dir + "/leukemia.csv");
    IndependenceModel two = two_group_exponential("m1", "drug", 21, "m2", "control", 21);
    FitResult fit2 = fit_mle(two, both);
    expect("m1 estimate", fit2.mle[0], 39.889, 0.005);
    expect("m2 estimate", fit2.mle[1], 8.667, 0.005);

    struct Target {
        std::string label, interest;
        double estimate, lower, upper;
    };
    const std::vector<Target> targets = {
        {"m1 (drug mean)", "m1", 39.889, 22.127, 83.013},
        {"m2 (control mean)", "m2", 8.667, 5.814, 13.735},
        {"difference m1-m2", "diff", 31.222, 12.784, 74.444},
        {"ratio m1/m2", "ratio", 4.603, 2.174, 10.583},
        {"auc m1/(m1+m2)", "auc", 0.822, 0.685, 0.914},
        {"kl divergence", "kl", -2.820, -8.677, -0.634},
    };
    json rows = json::array();
    for (const Target& t : targets) {
        InterestFunction g = interest_from_text(t.interest, two.space());
        IntervalEstimate iv = profile_interval(two, both, fit2, g, 0.95);
        ConstrainedExtremum ce = constrained_extremum_check(two, both, fit2, g, 0.95);
        expect(t.label + " estimate", iv.estimate, t.estimate, 0.005);
        expect(t.label + " lower", iv.lower, t.lower, 0.01, true);
        expect(t.label + " upper", iv.upper, t.upper, 0.01, true);
        expect(t.label + " check lower", ce.lower, iv.lower, 1e-3, true);
        expect(t.label + " check upper", ce.upper, iv.upper, 1e-3, true);
        rows.push_back(json{{"interest", t.interest},
                            {"estimate", iv.estimate},
                            {"lower", iv.lower},
                            {"upper", iv.upper},
                            {"check_lower", ce.lower},
                            {"check_upper", ce.upper}});
    }

    // gamma model on the control group
    Dataset control = read_dataset(data_dir + "/leukemia_control.csv");
    ModelSpec gamma = gamma_model();
    FitResult fitg = fit_mle(gamma, control);
    expect("gamma shape", fitg.mle[0], 1.642, 0.005);
    expect("gamma mean", fitg.mle[1], 8.667, 0.005);
    InterestFunction gsd = builtin_interest("gamma_sd", gamma.parameter_space.names);
    IntervalEstimate sd_delta = delta_interval(fitg, gsd, 0.95);
    IntervalEstimate sd_profile = profile_interval(gamma, control, fitg, gsd, 0.95);
    expect("gamma sd estimate", sd_delta.estimate, 6.763, 0.005);
    expect("gamma sd delta lower", sd_delta.lower, 3.829, 0.01, true);
    expect("gamma sd delta upper", sd_delta.upper, 9.697, 0.01, true);
    expect("gamma sd profile lower", sd_profile.lower, 4.634, 0.01, true);
    expect("gamma sd profile upper", sd_profile.upper, 11.297, 0.01, true);

    // single-exponential intervals per group
    Dataset drug = read_dataset(data_dir + "/leukemia_drug.csv");
    ModelSpec expo = exponential_model();
    FitResult fitc = fit_mle(expo, control);
    FitResult fitd = fit_mle(expo, drug);
    InterestFunction mu = parse_interest("mu", expo.parameter_space);
    IntervalEstimate c_prof = profile_interval(expo, control, fitc, mu, 0.95);
    IntervalEstimate d_prof = profile_interval(expo, drug, fitd, mu, 0.95);
    IntervalEstimate c_wald = wald_interval(fitc, 0, 0.95);
    expect("control mu", fitc.mle[0], 8.667, 0.005);
    expect("drug mu", fitd.mle[0], 39.889, 0.005);
    expect("control profile lower", c_prof.lower, 5.814, 0.01, true);
    expect("control profile upper", c_prof.upper, 13.735, 0.01, true);
    expect("drug profile lower", d_prof.lower, 22.127, 0.01, true);
    expect("drug profile upper", d_prof.upper, 83.013, 0.01, true);
    expect("control wald lower", c_wald.lower, 4.960, 0.01, true);
    expect("control wald upper", c_wald.upper, 12.373, 0.01, true);

    std::printf("%-28s %14s %14s %10s  %s\n", "quantity", "computed", "expected", "diff", "ok");
    bool all_ok = true;
    for (const Expectation& c : checks) {
        double diff = c.computed - c.expected;
        double limit = c.relative ? c.tol * std::max(1.0, std::fabs(c.expected)) : c.tol;
        bool ok = std::fabs(diff) <= limit;
        all_ok = all_ok && ok;
        std::printf("%-28s %14.6f %14.6f %10.2e  %s\n", c.name.c_str(), c.computed, c.expected,
                    diff, ok ? "yes" : "NO");
    }
    std::printf("%s\n", all_ok ? "all quantities reproduced" : "SOME QUANTITIES DID NOT REPRODUCE");

    if (!out_path.empty()) {
        json doc{{"version", document_version},
                 {"command", "reproduce"},
                 {"two_group_fit", fit_to_json(fit2)},
                 {"two_group_intervals", rows},
                 {"gamma_fit", fit_to_json(fitg)},
                 {"gamma_sd_delta", interval_to_json(sd_delta, "gamma_sd")},
                 {"gamma_sd_profile", interval_to_json(sd_profile, "gamma_sd")},
                 {"all_reproduced", all_ok}};
        write_json_file(doc, out_path);
        std::printf("wrote %s\n", out_path.c_str());
    }
    return all_ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"likelihood inference with profile, delta and Wald intervals"};
    app.require_subcommand(1);

    std::string model_path, data_path, out_path, interest, method = "profile", range_text;
    std::string scenario_path, data_dir = "data";
    double level = 0.95;
    std::size_t grid = 101, replicates = 0, workers = 1;
    std::uint64_t seed = 0;
    bool run_check = false;

    CLI::App* fit = app.add_subcommand("fit", "maximum likelihood fit");
    fit->add_option("--model", model_path, "model JSON file")->required();
    fit->add_option("--data", data_path, "dataset CSV file")->required();
    fit->add_option("--out", out_path, "write a JSON result document");

    CLI::App* ci = app.add_subcommand("ci", "confidence interval for an interest function");
    ci->add_option("--model", model_path, "model JSON file")->required();
    ci->add_option("--data", data_path, "dataset CSV file")->required();
    ci->add_option("--interest", interest, "expression or builtin name")->required();
    ci->add_option("--level", level, "confidence level (default 0.95)");
    ci->add_option("--method", method, "profile | delta | wald (default profile)")
        ->check(CLI::IsMember({"profile", "delta", "wald"}));
    ci->add_flag("--check", run_check, "run the constrained-extremum cross-check");
    ci->add_option("--out", out_path, "write a JSON result document");

    CLI::App* curve = app.add_subcommand("profile-curve", "profile log-likelihood on a grid");
    curve->add_option("--model", model_path, "model JSON file")->required();
    curve->add_option("--data", data_path, "dataset CSV file")->required();
    curve->add_option("--interest", interest, "expression or builtin name")->required();
    curve->add_option("--grid", grid, "number of grid points (default 101)");
    curve->add_option("--range", range_text, "grid range lo:hi (default: padded 0.999 interval)");
    curve->add_option("--out", out_path, "write CSV here instead of stdout");

    CLI::App* cov = app.add_subcommand("coverage", "simulate interval coverage");
    cov->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    cov->add_option("--replicates", replicates, "override the scenario's replicate count");
    CLI::Option* seed_opt = cov->add_option("--seed", seed, "override the scenario's seed");
    cov->add_option("--workers", workers, "worker threads (default 1)");
    cov->add_option("--out", out_path, "write a JSON report");

    CLI::App* rep = app.add_subcommand("reproduce", "rerun the bundled leukemia analyses");
    rep->add_option("--data-dir", data_dir, "directory with the bundled data files");
    rep->add_option("--out", out_path, "write a JSON result document");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(fit)) return cmd_fit(model_path, data_path, out_path);
        if (app.got_subcommand(ci))
            return cmd_ci(model_path, data_path, interest, level, method, run_check, out_path);
        if (app.got_subcommand(curve))
            return cmd_profile_curve(model_path, data_path, interest, grid, range_text, out_path);
        if (app.got_subcommand(cov))
            return cmd_coverage(scenario_path, replicates, seed, seed_opt->count() > 0, workers,
                                out_path);
        if (app.got_subcommand(rep)) return cmd_reproduce(data_dir, out_path);
    } catch (const proflik::io_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
