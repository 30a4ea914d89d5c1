#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "bisque/mixture.hpp"

using namespace bisque;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd vec1(double x) {
    VectorXd v(1);
    v << x;
    return v;
}

VectorXd vec2(double x, double y) {
    VectorXd v(2);
    v << x, y;
    return v;
}

double norm_pdf(double x, double mean, double var) {
    return std::exp(-0.5 * (x - mean) * (x - mean) / var) / std::sqrt(2.0 * M_PI * var);
}

double norm_cdf(double x, double mean, double var) {
    return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * var));
}

// Normal likelihood with a normal-inverse-gamma prior; every posterior
// quantity used below has a closed form.
struct ConjugateToy {
    double m0 = 0.0, k0 = 1.0, a0 = 2.0, b0 = 1.0;
    std::vector<double> data;
    double mn, kn, an, bn;

    ConjugateToy() {
        data = {1.31, 0.27, 2.02, 1.64, 0.88, 1.15, 0.42, 1.77, 1.09, 0.63,
                1.48, 0.95, 1.86, 0.35, 1.22, 1.55, 0.71, 1.39, 1.04, 0.58};
        const double n = static_cast<double>(data.size());
        const double xbar = std::accumulate(data.begin(), data.end(), 0.0) / n;
        double ss = 0.0;
        for (double x : data) ss += (x - xbar) * (x - xbar);
        kn = k0 + n;
        mn = (k0 * m0 + n * xbar) / kn;
        an = a0 + 0.5 * n;
        bn = b0 + 0.5 * (ss + k0 * n * (xbar - m0) * (xbar - m0) / kn);
    }

    // sigma^2 | X ~ InverseGamma(an, bn), expressed in nu = log sigma^2
    HierarchicalModel model() const {
        HierarchicalModel m;
        m.dim_theta2 = 1;
        m.transform = Transform({CoordinateMap::log_map()});
        const double a = an, b = bn;
        m.log_marginal_nu = [a, b](const VectorXd& nu) { return -a * nu[0] - b * std::exp(-nu[0]); };
        return m;
    }

    GaussianWeight weight() const {
        auto m = model();
        return build_weight(m.log_marginal_nu, vec1(std::log(bn / an)));
    }

    // mu | sigma^2, X ~ N(mn, sigma^2 / kn)
    double cond_density(double mu, const VectorXd& s2) const {
        return norm_pdf(mu, mn, s2[0] / kn);
    }
    double cond_cdf(double b, const VectorXd& s2) const { return norm_cdf(b, mn, s2[0] / kn); }

    // mu | X ~ Student-t(2 an) with location mn and scale^2 bn/(an kn)
    double t_density(double mu) const {
        const double d = 2.0 * an;
        const double s = std::sqrt(bn / (an * kn));
        const double z = (mu - mn) / s;
        return std::exp(std::lgamma(0.5 * (d + 1)) - std::lgamma(0.5 * d)) /
               (std::sqrt(d * M_PI) * s) * std::pow(1.0 + z * z / d, -0.5 * (d + 1));
    }
    double mean() const { return mn; }
    double variance() const { return bn / (kn * (an - 1.0)); }
};

} // namespace

TEST_CASE("std weights reduce to quadrature weights for an exactly Gaussian marginal") {
    MatrixXd sigma(2, 2);
    sigma << 1.4, -0.3, -0.3, 0.9;
    MatrixXd prec = sigma.inverse();
    VectorXd m = vec2(0.8, -1.1);
    HierarchicalModel model;
    model.dim_theta2 = 2;
    model.transform = Transform::identity(2);
    model.log_marginal_nu = [&](const VectorXd& nu) {
        return 7.7 - 0.5 * (nu - m).dot(prec * (nu - m));
    };
    auto gw = build_weight(model.log_marginal_nu, vec2(0.0, 0.0));
    auto mix = bisque_weights(model, gw, 5);
    auto grid = sparse_grid(2, 5, RuleFamily::GaussHermiteNested);
    double wsum = 0.0;
    for (double w : grid.weights) wsum += w;
    for (std::size_t l = 0; l < mix.size(); ++l) {
        CHECK(mix.std_weights[l] == Catch::Approx(grid.weights[l] / wsum).margin(1e-8));
    }
    CHECK(mix.ratio_spread < 1e-6);
}

TEST_CASE("level q = p gives a single node at the mode with weight one") {
    HierarchicalModel model;
    model.dim_theta2 = 2;
    model.transform = Transform::identity(2);
    model.log_marginal_nu = [](const VectorXd& nu) { return -0.5 * nu.squaredNorm(); };
    auto gw = build_weight(model.log_marginal_nu, vec2(0.3, -0.2));
    auto mix = bisque_weights(model, gw, 2);
    REQUIRE(mix.size() == 1);
    CHECK((mix.nodes_nu[0] - gw.mode).norm() < 1e-12);
    CHECK(mix.std_weights[0] == 1.0);
}

TEST_CASE("std weights sum to one and are log-shift invariant") {
    ConjugateToy toy;
    auto model = toy.model();
    auto gw = toy.weight();
    auto mix = bisque_weights(model, gw, 4);
    CHECK(kahan_sum(mix.std_weights) == Catch::Approx(1.0).margin(1e-14));

    HierarchicalModel shifted = model;
    auto base = model.log_marginal_nu;
    shifted.log_marginal_nu = [base](const VectorXd& nu) { return base(nu) + 123.456; };
    auto mix2 = bisque_weights(shifted, gw, 4);
    for (std::size_t l = 0; l < mix.size(); ++l) {
        CHECK(mix2.std_weights[l] == Catch::Approx(mix.std_weights[l]).margin(1e-13));
    }
}

TEST_CASE("gamma posterior under log transform converges with level") {
    // Gamma(40, 2) target for theta > 0
    HierarchicalModel model;
    model.dim_theta2 = 1;
    model.transform = Transform({CoordinateMap::log_map()});
    model.log_marginal_nu = [](const VectorXd& nu) {
        // transformed density: alpha*nu - beta*exp(nu)
        return 40.0 * nu[0] - 2.0 * std::exp(nu[0]);
    };
    auto gw = build_weight(model.log_marginal_nu, vec1(std::log(20.0)));

    auto mean_at = [&](int level) {
        auto mix = bisque_weights(model, gw, level);
        return posterior_expectation(mix, [](const VectorXd& th) { return th[0]; });
    };
    const double e4 = mean_at(4);
    const double e5 = mean_at(5);
    CHECK(std::abs(e5 - e4) < 1e-8);
    // dense-trapezoid oracle for E[theta | X] in nu-space
    double num = 0.0, den = 0.0;
    const int n = 400000;
    const double lo = 0.0, hi = 6.0, h = (hi - lo) / n;
    for (int i = 0; i <= n; ++i) {
        const double nu = lo + i * h;
        const double f = std::exp(model.log_marginal_nu(vec1(nu)));
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        num += w * std::exp(nu) * f;
        den += w * f;
    }
    CHECK(e5 == Catch::Approx(num / den).margin(1e-8));
}

TEST_CASE("bisque_weights error paths") {
    HierarchicalModel model;
    model.dim_theta2 = 1;
    model.transform = Transform::identity(1);
    model.log_marginal_nu = [](const VectorXd&) { return -0.5; };
    GaussianWeight gw{vec1(0.0), MatrixXd::Identity(1, 1), -0.5 * std::log(2.0 * M_PI)};

    CHECK_THROWS_AS(bisque_weights(model, gw, 0), ConfigError);

    HierarchicalModel vanishing = model;
    vanishing.log_marginal_nu = [](const VectorXd&) {
        return -std::numeric_limits<double>::infinity();
    };
    CHECK_THROWS_WITH(bisque_weights(vanishing, gw, 3),
                      Catch::Matchers::ContainsSubstring("degenerate mixture"));

    HierarchicalModel bad = model;
    bad.log_marginal_nu = [](const VectorXd& nu) {
        return nu[0] > 1.0 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
    };
    CHECK_THROWS_WITH(bisque_weights(bad, gw, 4), Catch::Matchers::ContainsSubstring("node"));

    HierarchicalModel neither = model;
    neither.log_marginal_nu = nullptr;
    CHECK_THROWS_AS(model_log_marginal_nu(neither, vec1(0.0)), ConfigError);
}

TEST_CASE("parallel node evaluation matches serial") {
    ConjugateToy toy;
    auto model = toy.model();
    auto gw = toy.weight();
    auto serial = bisque_weights(model, gw, 5, RuleFamily::GaussHermiteNested, 1);
    auto parallel = bisque_weights(model, gw, 5, RuleFamily::GaussHermiteNested, 4);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t l = 0; l < serial.size(); ++l) {
        CHECK(parallel.std_weights[l] == serial.std_weights[l]);
    }
}

TEST_CASE("single-node mixture returns the conditional density at the mode") {
    ConjugateToy toy;
    auto model = toy.model();
    auto gw = toy.weight();
    auto mix = bisque_weights(model, gw, 1);
    REQUIRE(mix.size() == 1);
    const VectorXd mode_theta2 = mix.nodes_theta2[0];
    std::vector<double> pts = {toy.mn - 0.5, toy.mn, toy.mn + 0.3};
    auto curve = marginal_density(
        mix, [&](double mu, const VectorXd& s2) { return toy.cond_density(mu, s2); }, pts);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(curve.values[i] == Catch::Approx(toy.cond_density(pts[i], mode_theta2)).margin(1e-15));
    }
}

TEST_CASE("conjugate toy marginal density matches the Student-t closed form") {
    ConjugateToy toy;
    auto model = toy.model();
    auto gw = toy.weight();
    auto mix = bisque_weights(model, gw, 5);

    const double sd = std::sqrt(toy.variance());
    std::vector<double> pts(201);
    for (int i = 0; i < 201; ++i) pts[i] = toy.mn + (i - 100) * 6.0 * sd / 100.0;
    auto curve = marginal_density(
        mix, [&](double mu, const VectorXd& s2) { return toy.cond_density(mu, s2); }, pts);

    double peak = 0.0;
    for (double v : curve.values) peak = std::max(peak, v);
    double sup_rel = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        sup_rel = std::max(sup_rel, std::abs(curve.values[i] - toy.t_density(pts[i])) / peak);
    }
    CHECK(sup_rel < 1e-3);
    CHECK(curve.clipped == 0);

    // unit mass over a wide grid (trapezoid)
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        mass += 0.5 * (curve.values[i] + curve.values[i + 1]) * (pts[i + 1] - pts[i]);
    }
    CHECK(mass == Catch::Approx(1.0).margin(1e-3));
}

TEST_CASE("posterior expectation") {
    ConjugateToy toy;
    auto mix = bisque_weights(toy.model(), toy.weight(), 5);

    CHECK(posterior_expectation(mix, [](const VectorXd&) { return 4.25; }) ==
          Catch::Approx(4.25).margin(1e-14));

    auto cond_mean = [&](const VectorXd&) { return toy.mn; };
    CHECK(posterior_expectation(mix, cond_mean) == Catch::Approx(toy.mean()).margin(1e-6));

    // linearity on a genuinely theta2-dependent quantity
    auto g = [](const VectorXd& s2) { return std::sqrt(s2[0]); };
    auto ag_b = [&](const VectorXd& s2) { return 2.5 * g(s2) - 1.25; };
    CHECK(posterior_expectation(mix, ag_b) ==
          Catch::Approx(2.5 * posterior_expectation(mix, g) - 1.25).margin(1e-12));
}

TEST_CASE("posterior variance") {
    ConjugateToy toy;
    auto mix = bisque_weights(toy.model(), toy.weight(), 5);

    CHECK(posterior_variance(mix, [](const VectorXd&) { return 2.0; },
                             [](const VectorXd&) { return 0.7; }, 2.0) ==
          Catch::Approx(0.7).margin(1e-14));

    auto cond_mean = [&](const VectorXd&) { return toy.mn; };
    auto cond_var = [&](const VectorXd& s2) { return s2[0] / toy.kn; };
    const double mean = posterior_expectation(mix, cond_mean);
    const double var = posterior_variance(mix, cond_mean, cond_var, mean);
    CHECK(var == Catch::Approx(toy.variance()).epsilon(1e-4));

    // brute-force dense quadrature of the joint over (mu, sigma^2)
    double s0 = 0.0, s1 = 0.0, s2sum = 0.0;
    const int nm = 1200, ns = 1200;
    for (int j = 0; j <= ns; ++j) {
        const double s2 = 0.05 + j * (3.0 - 0.05) / ns;
        const double wj = (j == 0 || j == ns) ? 0.5 : 1.0;
        const double fs2 = std::exp(-(toy.an + 1.0) * std::log(s2) - toy.bn / s2);
        for (int i = 0; i <= nm; ++i) {
            const double mu = toy.mn - 2.0 + i * 4.0 / nm;
            const double wi = (i == 0 || i == nm) ? 0.5 : 1.0;
            const double f = wi * wj * fs2 * norm_pdf(mu, toy.mn, s2 / toy.kn);
            s0 += f;
            s1 += f * mu;
            s2sum += f * mu * mu;
        }
    }
    const double brute_mean = s1 / s0;
    const double brute_var = s2sum / s0 - brute_mean * brute_mean;
    CHECK(var == Catch::Approx(brute_var).epsilon(1e-4));

    // nonnegative whenever all standardized weights are nonnegative
    bool all_nonneg = true;
    for (double w : mix.std_weights) all_nonneg = all_nonneg && w >= 0.0;
    if (all_nonneg) CHECK(var >= 0.0);
}

TEST_CASE("interval probability") {
    ConjugateToy toy;
    auto mix = bisque_weights(toy.model(), toy.weight(), 5);
    auto cdf = [&](double b, const VectorXd& s2) { return toy.cond_cdf(b, s2); };
    const double inf = std::numeric_limits<double>::infinity();

    CHECK(interval_probability(mix, cdf, -inf, inf) == Catch::Approx(1.0).margin(1e-10));

    const double a = toy.mn - 0.2, b = toy.mn + 0.35;
    const double p1 = interval_probability(mix, cdf, -inf, a);
    const double p2 = interval_probability(mix, cdf, a, b);
    const double p3 = interval_probability(mix, cdf, b, inf);
    CHECK(p1 + p2 + p3 == Catch::Approx(1.0).margin(1e-10));

    // closed-form Student-t mass via a dense trapezoid of the exact density
    double oracle = 0.0;
    const int n = 200000;
    for (int i = 0; i <= n; ++i) {
        const double mu = a + i * (b - a) / n;
        oracle += ((i == 0 || i == n) ? 0.5 : 1.0) * toy.t_density(mu);
    }
    oracle *= (b - a) / n;
    CHECK(p2 == Catch::Approx(oracle).margin(1e-4));

    CHECK_THROWS_AS(interval_probability(mix, cdf, 1.0, 1.0), ConfigError);
}

TEST_CASE("nested constant") {
    HierarchicalModel model;
    model.dim_theta2 = 1;
    model.transform = Transform::identity(1);
    Factorization fac;
    fac.inner_dim = 1;
    fac.inner_init = vec1(0.0);
    fac.log_g1 = [](const VectorXd& t1, const VectorXd&) { return -0.5 * t1[0] * t1[0]; };
    fac.log_g2 = [](const VectorXd&) { return 0.0; };
    model.factorization = fac;

    const double c = nested_constant(model, vec1(0.0), 8);
    CHECK(c == Catch::Approx(std::sqrt(2.0 * M_PI)).margin(1e-8));

    model.factorization->log_g1 = [](const VectorXd& t1, const VectorXd&) {
        return -0.5 * t1[0] * t1[0] - 0.5 * std::log(2.0 * M_PI);
    };
    CHECK(nested_constant(model, vec1(0.0), 8) == Catch::Approx(1.0).margin(1e-8));

    model.factorization->log_g1 = [](const VectorXd& t1, const VectorXd&) {
        return std::log(10.0) - 0.5 * t1[0] * t1[0] - 0.5 * std::log(2.0 * M_PI);
    };
    CHECK(nested_constant(model, vec1(0.0), 8) == Catch::Approx(10.0).margin(1e-7));

    HierarchicalModel plain;
    plain.dim_theta2 = 1;
    plain.transform = Transform::identity(1);
    CHECK_THROWS_AS(nested_constant(plain, vec1(0.0), 8), ConfigError);
}

TEST_CASE("factored log marginal") {
    // g1(t1, t2) = N(t1; t2, 1) unnormalized, g2(t2) = exp(-t2^2/2)
    HierarchicalModel model;
    model.dim_theta2 = 1;
    model.transform = Transform::identity(1);
    Factorization fac;
    fac.inner_dim = 1;
    fac.inner_init = vec1(0.0);
    fac.log_g1 = [](const VectorXd& t1, const VectorXd& t2) {
        const double d = t1[0] - t2[0];
        return -0.5 * d * d - 0.5 * std::log(2.0 * M_PI);
    };
    fac.log_g2 = [](const VectorXd&) { return 0.0; };
    model.factorization = fac;

    // g2 == 1 and g1 normalized in t1: log marginal is zero
    CHECK(factored_log_marginal(model, vec1(0.7)) == Catch::Approx(0.0).margin(1e-8));

    model.factorization->log_g2 = [](const VectorXd& t2) { return -0.5 * t2[0] * t2[0]; };
    const VectorXd t2 = vec1(0.4);
    const double got = factored_log_marginal(model, t2);

    // dense marginalization of g1 * g2 over t1
    double mass = 0.0;
    const int n = 200000;
    for (int i = 0; i <= n; ++i) {
        const double t1 = -10.0 + i * 20.0 / n;
        mass += ((i == 0 || i == n) ? 0.5 : 1.0) *
                std::exp(model.factorization->log_g1(vec1(t1), t2) +
                         model.factorization->log_g2(t2));
    }
    mass *= 20.0 / n;
    CHECK(got == Catch::Approx(std::log(mass)).margin(1e-6));

    // shift invariance in log g2
    auto g2 = model.factorization->log_g2;
    model.factorization->log_g2 = [g2](const VectorXd& x) { return g2(x) + 3.3; };
    CHECK(factored_log_marginal(model, t2) == Catch::Approx(got + 3.3).margin(1e-10));
}

TEST_CASE("factored conditional") {
    HierarchicalModel model;
    model.dim_theta2 = 1;
    model.transform = Transform::identity(1);
    Factorization fac;
    fac.inner_dim = 1;
    fac.inner_init = vec1(0.0);
    fac.log_g1 = [](const VectorXd& t1, const VectorXd&) {
        return 2.7 - 0.5 * t1[0] * t1[0]; // unnormalized standard normal
    };
    fac.log_g2 = [](const VectorXd&) { return 0.0; };
    model.factorization = fac;

    for (double t1 : {-1.5, 0.0, 0.8}) {
        CHECK(factored_conditional(model, vec1(t1), vec1(0.0)) ==
              Catch::Approx(norm_pdf(t1, 0.0, 1.0)).margin(1e-8));
    }

    // integrates to one
    double mass = 0.0;
    const int n = 20000;
    for (int i = 0; i <= n; ++i) {
        const double t1 = -8.0 + i * 16.0 / n;
        mass += ((i == 0 || i == n) ? 0.5 : 1.0) *
                factored_conditional(model, vec1(t1), vec1(0.0));
    }
    mass *= 16.0 / n;
    CHECK(mass == Catch::Approx(1.0).margin(1e-6));

    // invariant to rescaling g1
    const double base = factored_conditional(model, vec1(0.5), vec1(0.0));
    model.factorization->log_g1 = [](const VectorXd& t1, const VectorXd&) {
        return 9.9 - 0.5 * t1[0] * t1[0];
    };
    CHECK(factored_conditional(model, vec1(0.5), vec1(0.0)) ==
          Catch::Approx(base).margin(1e-10));
}

TEST_CASE("direct marginal of independent standard normals") {
    auto joint = [](double t1, const VectorXd& nu2) {
        return -0.5 * t1 * t1 - 0.5 * nu2.squaredNorm();
    };
    std::vector<double> pts(201);
    for (int i = 0; i < 201; ++i) pts[i] = -6.0 + i * 12.0 / 200.0;
    for (auto strategy : {WeightStrategy::PerPoint, WeightStrategy::Shared}) {
        auto curve = direct_marginal(joint, strategy, 1, 4, RuleFamily::GaussHermiteNested, pts,
                                     vec1(0.0));
        CHECK(curve.values[100] == Catch::Approx(1.0 / std::sqrt(2.0 * M_PI)).margin(1e-6));
    }
}

TEST_CASE("direct marginal of a separable joint is proportional to the theta1 factor") {
    auto log_f1 = [](double t1) { return -0.5 * t1 * t1 - 0.05 * t1 * t1 * t1 * t1; };
    auto joint = [&](double t1, const VectorXd& nu2) {
        const double d = nu2[0] - 1.0;
        return log_f1(t1) - 0.5 * d * d * 4.0;
    };
    std::vector<double> pts(101);
    for (int i = 0; i < 101; ++i) pts[i] = -3.0 + i * 6.0 / 100.0;
    auto curve = direct_marginal(joint, WeightStrategy::PerPoint, 1, 3,
                                 RuleFamily::GaussHermiteNested, pts, vec1(0.0));
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double r = curve.values[i] / std::exp(log_f1(pts[i]));
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    CHECK((hi - lo) / hi < 1e-8);

    CHECK_THROWS_AS(direct_marginal(joint, WeightStrategy::PerPoint, 1, 3,
                                    RuleFamily::GaussHermiteNested, {0.0}, vec1(0.0)),
                    ConfigError);
}

TEST_CASE("converge on a constant quantity stops immediately") {
    auto job = [](int) { return std::vector<double>{42.0}; };
    auto res = converge(job, 1, 5, 1e-8);
    CHECK(res.converged);
    CHECK(res.level == 2);
    REQUIRE(res.changes.size() == 1);
    CHECK(res.changes[0] == 0.0);
}

TEST_CASE("converge on the conjugate toy density curve") {
    ConjugateToy toy;
    auto model = toy.model();
    auto gw = toy.weight();
    const double sd = std::sqrt(toy.variance());
    std::vector<double> pts(201);
    for (int i = 0; i < 201; ++i) pts[i] = toy.mn + (i - 100) * 6.0 * sd / 100.0;

    auto job = [&](int level) {
        auto mix = bisque_weights(model, gw, level);
        auto curve = marginal_density(
            mix, [&](double mu, const VectorXd& s2) { return toy.cond_density(mu, s2); }, pts);
        return curve.values;
    };
    auto res = converge(job, 1, 5, 1e-6);
    CHECK(res.converged);
    CHECK(res.level <= 5); // p + 4

    // non-converged path flagged, change sequence retained
    auto wiggly = [](int level) { return std::vector<double>{static_cast<double>(level)}; };
    auto bad = converge(wiggly, 1, 4, 1e-8);
    CHECK_FALSE(bad.converged);
    CHECK(bad.changes.size() == 3);
    CHECK_THROWS_AS(converge(wiggly, 3, 2, 1e-8), ConfigError);
}

TEST_CASE("caching evaluator enables node reuse across nested levels") {
    ConjugateToy toy;
    auto model = toy.model();
    auto gw = toy.weight();

    CachingEvaluator cached([&](const VectorXd& nu) { return model.log_marginal_nu(nu); });
    auto m3 = bisque_weights(model, gw, 3, RuleFamily::GaussHermiteNested, 1, &cached);
    const long long after_q3 = cached.calls();
    CHECK(after_q3 == static_cast<long long>(m3.size()));

    auto m4 = bisque_weights(model, gw, 4, RuleFamily::GaussHermiteNested, 1, &cached);
    const long long after_q4 = cached.calls();
    CHECK(after_q4 == static_cast<long long>(m4.size())); // union of levels = level-4 set
    CHECK(after_q4 - after_q3 < static_cast<long long>(m4.size())); // strictly fewer than rebuild

    // cached evaluations reproduce the uncached weights exactly
    auto plain = bisque_weights(model, gw, 4);
    REQUIRE(plain.size() == m4.size());
    for (std::size_t l = 0; l < plain.size(); ++l) {
        CHECK(m4.std_weights[l] == plain.std_weights[l]);
    }
}
