#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "proflik/model.hpp"
#include "proflik/models/families.hpp"
#include "proflik/random.hpp"

using namespace proflik;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
using V = std::vector<double>;
}

TEST_CASE("exponential family density and survival") {
    auto m = exponential_model();
    REQUIRE(m.space().names == std::vector<std::string>{"mu"});
    REQUIRE_THAT(m.log_density(6.0, V{39.889}),
                 WithinRel(-std::log(39.889) - 6.0 / 39.889, 1e-14));
    REQUIRE_THAT(m.log_survival(6.0, V{39.889}), WithinRel(-0.15041740830805483, 1e-12));
    REQUIRE(m.log_density(-1.0, V{5.0}) == -std::numeric_limits<double>::infinity());
    REQUIRE(m.log_survival(-1.0, V{5.0}) == 0.0);
}

TEST_CASE("gamma family density and survival match reference values") {
    auto m = gamma_model();
    REQUIRE(m.space().names == std::vector<std::string>{"shape", "mean"});
    REQUIRE_THAT(m.log_density(1.0, V{2.0, 2.0}), WithinRel(-1.0, 1e-13));
    REQUIRE_THAT(m.log_survival(1.0, V{2.0, 2.0}),
                 WithinRel(-0.3068528194400546905828, 1e-12));
    REQUIRE_THAT(m.log_survival(12.0, V{1.6422597331404873, 8.666666724221663}),
                 WithinRel(-1.41477921333049042505, 1e-12));
    // shape 1 collapses to the exponential
    auto e = exponential_model();
    for (double y : {0.5, 3.0, 11.0})
        REQUIRE_THAT(m.log_density(y, V{1.0, 7.5}),
                     WithinRel(e.log_density(y, V{7.5}), 1e-12));
}

TEST_CASE("normal family with known sigma") {
    auto m = normal_model(1.0);
    REQUIRE_THAT(m.log_density(0.0, V{0.0}), WithinRel(-0.9189385332046727, 1e-14));
    REQUIRE_THAT(m.log_survival(1.0, V{0.0}),
                 WithinRel(std::log(1.0 - 0.841344746068543), 1e-9));
    auto wide = normal_model(2.5);
    REQUIRE_THAT(wide.log_density(1.0, V{1.0}),
                 WithinRel(-0.9189385332046727 - std::log(2.5), 1e-13));
    REQUIRE_THROWS_AS(normal_model(0.0), std::domain_error);
}

TEST_CASE("default initial values are sensible") {
    auto e = exponential_model();
    Dataset d = Dataset::from_values({2.0, 4.0, 6.0});
    REQUIRE_THAT(e.default_init(d)[0], WithinRel(4.0, 1e-12));

    auto g = gamma_model();
    RngStream r(5, 0);
    Dataset big;
    for (int i = 0; i < 500; ++i)
        big.observations.push_back(Observation::exact(r.gamma(3.0, 10.0)));
    auto init = g.default_init(big);
    REQUIRE(init[0] > 1.0);
    REQUIRE(init[0] < 9.0);
    REQUIRE_THAT(init[1], WithinRel(10.0, 0.2));
}

TEST_CASE("samplers draw from the right distributions") {
    auto g = gamma_model();
    RngStream r(99, 0);
    const int n = 100000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += g.sampler(V{1.642, 8.667}, r);
    REQUIRE_THAT(s / n, WithinAbs(8.667, 0.15));

    auto nm = normal_model(2.0);
    RngStream r2(99, 1);
    double sn = 0.0, sn2 = 0.0;
    for (int i = 0; i < n; ++i) {
        double y = nm.sampler(V{5.0}, r2);
        sn += y;
        sn2 += y * y;
    }
    double mean = sn / n;
    REQUIRE_THAT(mean, WithinAbs(5.0, 0.05));
    REQUIRE_THAT(sn2 / n - mean * mean, WithinAbs(4.0, 0.1));
}
