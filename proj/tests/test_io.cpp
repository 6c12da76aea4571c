#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "proflik/estimation.hpp"
#include "proflik/io.hpp"
#include "proflik/models/families.hpp"
#include "proflik/wald_delta.hpp"

using namespace proflik;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("proflik_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace

TEST_CASE("dataset csv with a status column round-trips") {
    TempDir tmp;
    auto p = tmp.file("d.csv");
    write_text(p,
               "# remission times\n"
               "time,status,group\n"
               "6,1,drug\n"
               "6,0,drug\n"
               "1,1,control\n");
    Dataset d = read_dataset(p);
    REQUIRE(d.size() == 3);
    REQUIRE_FALSE(d.observations[0].censored);
    REQUIRE(d.observations[1].censored);
    REQUIRE(d.observations[1].value == 6.0);
    REQUIRE(d.observations[2].group == "control");

    auto q = tmp.file("round.csv");
    write_dataset(d, q);
    Dataset e = read_dataset(q);
    REQUIRE(e.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        REQUIRE(e.observations[i].value == d.observations[i].value);
        REQUIRE(e.observations[i].censored == d.observations[i].censored);
        REQUIRE(e.observations[i].group == d.observations[i].group);
    }
}

TEST_CASE("dataset in suffix notation marks censoring with a plus") {
    TempDir tmp;
    auto p = tmp.file("d.txt");
    write_text(p, "6\n6+\n10+\n13\n");
    Dataset d = read_dataset(p);
    REQUIRE(d.size() == 4);
    REQUIRE(d.event_count() == 2);
    REQUIRE(d.observations[1].censored);
    REQUIRE(d.observations[1].value == 6.0);
}

TEST_CASE("dataset errors carry file and line") {
    TempDir tmp;
    auto p = tmp.file("bad.csv");
    write_text(p, "time,status\n6,1\noops,1\n");
    try {
        read_dataset(p);
        FAIL("expected io_error");
    } catch (const io_error& e) {
        std::string msg = e.what();
        REQUIRE(msg.find("bad.csv") != std::string::npos);
        REQUIRE(msg.find(":3") != std::string::npos);
    }
    REQUIRE_THROWS_AS(read_dataset(tmp.file("missing.csv")), io_error);
}

TEST_CASE("model documents load each family") {
    TempDir tmp;
    auto p = tmp.file("m.json");
    write_text(p, R"({"version": 1, "family": "exponential", "parameter": "rate_inverse"})");
    LoadedModel m = read_model(p);
    REQUIRE(m.family() == "exponential");
    REQUIRE(m.space().names == std::vector<std::string>{"rate_inverse"});
    REQUIRE_FALSE(m.is_composite());

    write_text(p, R"({"version": 1, "family": "gamma"})");
    REQUIRE(read_model(p).space().dimension() == 2);

    write_text(p, R"({"version": 1, "family": "normal", "sigma": 2.0})");
    REQUIRE(read_model(p).family() == "normal");

    write_text(p, R"({
        "version": 1,
        "family": "two_group_exponential",
        "groups": [
            {"name": "m1", "group": "drug", "n": 21},
            {"name": "m2", "group": "control", "n": 21}
        ]
    })");
    LoadedModel joint = read_model(p);
    REQUIRE(joint.is_composite());
    REQUIRE(joint.space().names == (std::vector<std::string>{"m1", "m2"}));
}

TEST_CASE("model documents reject unknown versions and families") {
    TempDir tmp;
    auto p = tmp.file("m.json");
    write_text(p, R"({"version": 99, "family": "exponential"})");
    REQUIRE_THROWS_AS(read_model(p), io_error);
    write_text(p, R"({"version": 1, "family": "weibullish"})");
    REQUIRE_THROWS_AS(read_model(p), io_error);
    write_text(p, "{not json");
    REQUIRE_THROWS_AS(read_model(p), io_error);
}

TEST_CASE("scenario documents parse both parameter spellings") {
    TempDir tmp;
    auto p = tmp.file("s.json");
    write_text(p, R"({
        "version": 1,
        "family": "gamma",
        "true_params": {"shape": 1.642, "mean": 8.667},
        "sample_size": 21,
        "interest": "gamma_sd",
        "level": 0.95,
        "replicates": 500,
        "seed": 11,
        "methods": ["delta", "profile"]
    })");
    CoverageScenario s = read_scenario(p);
    REQUIRE(s.family.parameter_space.names == (std::vector<std::string>{"shape", "mean"}));
    REQUIRE_THAT(s.true_params[0], WithinAbs(1.642, 1e-15));
    REQUIRE_THAT(s.true_params[1], WithinAbs(8.667, 1e-15));
    REQUIRE(s.replicates == 500);
    REQUIRE(s.methods == (std::vector<IntervalMethod>{IntervalMethod::Delta,
                                                      IntervalMethod::Profile}));

    write_text(p, R"({
        "version": 1,
        "family": "exponential",
        "true_params": [8.667],
        "sample_size": 25,
        "interest": "mu",
        "replicates": 100,
        "seed": 1,
        "methods": ["wald"]
    })");
    CoverageScenario t = read_scenario(p);
    REQUIRE(t.true_params == std::vector<double>{8.667});
    REQUIRE(t.level == 0.95);
}

TEST_CASE("fit and interval exports are well formed json") {
    TempDir tmp;
    auto fit = fit_mle(exponential_model(), Dataset::from_values({2.0, 4.0, 9.0}));
    auto j = fit_to_json(fit);
    REQUIRE(j["parameters"]["mu"].get<double>() == fit.mle[0]);
    REQUIRE(j["max_loglik"].get<double>() == fit.max_loglik);
    REQUIRE(j["converged"].get<bool>());
    REQUIRE(j["standard_errors"]["mu"].get<double>() > 0.0);

    auto w = wald_interval(fit, 0, 0.95);
    auto ij = interval_to_json(w, "mu");
    REQUIRE(ij["method"].get<std::string>() == "wald");
    REQUIRE(ij["interest"].get<std::string>() == "mu");
    REQUIRE_THAT(ij["lower"].get<double>(), WithinRel(w.lower, 1e-15));
    REQUIRE(ij["level"].get<double>() == 0.95);

    IntervalEstimate open = w;
    open.upper_unbounded = true;
    open.upper = std::numeric_limits<double>::infinity();
    auto oj = interval_to_json(open, "mu");
    REQUIRE(oj["upper"].is_null());
    REQUIRE(oj["flags"]["upper_unbounded"].get<bool>());

    auto path = tmp.file("fit.json");
    write_json_file(j, path);
    auto back = load_json_file(path);
    REQUIRE(back["parameters"]["mu"].get<double>() == fit.mle[0]);
}

TEST_CASE("profile trace writes a csv table") {
    TempDir tmp;
    ProfileCurve curve;
    curve.points.push_back({8.0, -66.5, -0.15, true});
    curve.points.push_back({9.0, -66.4, -0.05, true});
    auto p = tmp.file("trace.csv");
    write_profile_trace(curve, p);
    std::ifstream in(p);
    std::string header, row1, row2;
    std::getline(in, header);
    std::getline(in, row1);
    std::getline(in, row2);
    REQUIRE(header == "psi,profile_loglik,relative_loglik,converged");
    REQUIRE(row1.substr(0, 2) == "8,");
    REQUIRE(row2.find("-0.05") != std::string::npos);
}
