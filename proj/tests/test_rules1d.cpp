#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bisque/rules1d.hpp"

using namespace bisque;

namespace {

// E[Z^m] for Z ~ N(0,1): (m-1)!! for even m, 0 for odd m.
double normal_moment(int m) {
    if (m % 2 == 1) return 0.0;
    double v = 1.0;
    for (int j = 1; j < m; j += 2) v *= j;
    return v;
}

double apply(const Rule1D& r, double (*f)(double)) {
    double s = 0.0;
    for (std::size_t l = 0; l < r.size(); ++l) s += f(r.nodes[l]) * r.weights[l];
    return s;
}

} // namespace

TEST_CASE("classical one-node rule is the origin") {
    auto r = univariate_rule(RuleFamily::GaussHermiteClassical, 1);
    REQUIRE(r.size() == 1);
    CHECK(r.nodes[0] == 0.0);
    CHECK(r.weights[0] == 1.0);
}

TEST_CASE("classical three-node rule matches moment-matching solution") {
    auto r = univariate_rule(RuleFamily::GaussHermiteClassical, 2);
    REQUIRE(r.size() == 3);
    CHECK(r.nodes[0] == Catch::Approx(-std::sqrt(3.0)).margin(1e-13));
    CHECK(r.nodes[1] == Catch::Approx(0.0).margin(1e-13));
    CHECK(r.nodes[2] == Catch::Approx(std::sqrt(3.0)).margin(1e-13));
    CHECK(r.weights[0] == Catch::Approx(1.0 / 6.0).margin(1e-14));
    CHECK(r.weights[1] == Catch::Approx(2.0 / 3.0).margin(1e-14));
    CHECK(r.weights[2] == Catch::Approx(1.0 / 6.0).margin(1e-14));
    // oracle: the 3-node rule must satisfy all moment conditions m = 0..5
    for (int m = 0; m <= 5; ++m) {
        double s = 0.0;
        for (std::size_t l = 0; l < r.size(); ++l) s += std::pow(r.nodes[l], m) * r.weights[l];
        CHECK(s == Catch::Approx(normal_moment(m)).margin(1e-12));
    }
}

TEST_CASE("classical three-node rule integrates x^4 to 3") {
    auto r = univariate_rule(RuleFamily::GaussHermiteClassical, 2);
    CHECK(apply(r, [](double x) { return x * x * x * x; }) == Catch::Approx(3.0).margin(1e-12));
}

TEST_CASE("rule invariants hold for both families") {
    for (auto family : {RuleFamily::GaussHermiteNested, RuleFamily::GaussHermiteClassical}) {
        const int lmax = family == RuleFamily::GaussHermiteNested ? max_nested_level() : 8;
        for (int level = 1; level <= lmax; ++level) {
            auto r = univariate_rule(family, level);
            INFO(family_name(family) << " level " << level);
            REQUIRE(r.size() == rule_size(family, level));
            double wsum = 0.0;
            for (double w : r.weights) wsum += w;
            CHECK(wsum == Catch::Approx(1.0).margin(1e-12));
            for (std::size_t l = 1; l < r.size(); ++l) CHECK(r.nodes[l] > r.nodes[l - 1]);
            for (std::size_t l = 0; l < r.size(); ++l) {
                CHECK(r.nodes[l] == Catch::Approx(-r.nodes[r.size() - 1 - l]).margin(1e-12));
                CHECK(r.weights[l] == Catch::Approx(r.weights[r.size() - 1 - l]).margin(1e-12));
            }
        }
    }
}

TEST_CASE("nested nodes are subsets across levels") {
    for (int level = 1; level < max_nested_level(); ++level) {
        auto lo = univariate_rule(RuleFamily::GaussHermiteNested, level);
        auto hi = univariate_rule(RuleFamily::GaussHermiteNested, level + 1);
        for (double x : lo.nodes) {
            double best = 1e300;
            for (double y : hi.nodes) best = std::min(best, std::abs(x - y));
            CHECK(best < 1e-12);
        }
    }
}

TEST_CASE("rules achieve their documented polynomial degree") {
    for (auto family : {RuleFamily::GaussHermiteNested, RuleFamily::GaussHermiteClassical}) {
        const int lmax = family == RuleFamily::GaussHermiteNested ? max_nested_level() : 6;
        for (int level = 1; level <= lmax; ++level) {
            auto r = univariate_rule(family, level);
            const int deg = rule_degree(family, level);
            for (int m = 0; m <= deg; ++m) {
                double s = 0.0, scale = 1.0;
                for (std::size_t l = 0; l < r.size(); ++l) {
                    const double t = std::pow(r.nodes[l], m) * r.weights[l];
                    s += t;
                    scale += std::abs(t);
                }
                INFO(family_name(family) << " level " << level << " degree " << m);
                CHECK(std::abs(s - normal_moment(m)) < 1e-13 * scale);
            }
        }
    }
}

TEST_CASE("rule construction errors") {
    CHECK_THROWS_AS(univariate_rule(RuleFamily::GaussHermiteClassical, 0), ConfigError);
    CHECK_THROWS_WITH(univariate_rule(RuleFamily::GaussHermiteNested, max_nested_level() + 1),
                      Catch::Matchers::ContainsSubstring("table exhausted") &&
                          Catch::Matchers::ContainsSubstring(std::to_string(max_nested_level())));
}
