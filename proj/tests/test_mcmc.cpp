#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bisque/mcmc.hpp"

using namespace bisque;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("fur-seal chain is reproducible from the seed") {
    auto data = simulate_furseal(42);
    auto a = run_furseal_chain(data, 2000, 7);
    auto b = run_furseal_chain(data, 2000, 7);
    CHECK(a.draws == b.draws);
    auto c = run_furseal_chain(data, 2000, 8);
    CHECK(a.draws != c.draws);
    CHECK(a.burn_in == 1000);
    CHECK(a.names.front() == "N");
    CHECK(a.names.back() == "U1");
    CHECK_THROWS_AS(run_furseal_chain(data, 10, 7), ConfigError);
}

TEST_CASE("fur-seal conjugate alpha block matches its closed-form conditional mean") {
    auto data = simulate_furseal(42);
    auto chain = run_furseal_chain(data, 30000, 11);
    const int kept = chain.iterations() - chain.burn_in;

    // tower property: E[alpha_i] equals the average conditional Beta mean
    // over the chain's (N, U1) draws, up to Monte Carlo error
    for (int i = 0; i < data.visits; ++i) {
        double cond_mean_avg = 0.0;
        for (int it = chain.burn_in; it < chain.iterations(); ++it) {
            const auto params =
                furseal_conditional_alpha(data, chain.draws(it, 0), chain.draws(it, data.visits + 1));
            const auto& p = params[static_cast<std::size_t>(i)];
            cond_mean_avg += p.a / (p.a + p.b);
        }
        cond_mean_avg /= kept;
        const double alpha_mean = chain.retained_mean(1 + i);
        // conservative MC standard error: assume effective sample size kept/20
        const double se = std::sqrt(chain.retained_variance(1 + i) / (kept / 20.0));
        CHECK(std::abs(alpha_mean - cond_mean_avg) < 3.0 * se + 1e-4);
    }
}

TEST_CASE("fur-seal U1 Metropolis acceptance is in a healthy range") {
    auto data = simulate_furseal(42);
    auto chain = run_furseal_chain(data, 5000, 3);
    CHECK(chain.acceptance.at("U1") > 0.1);
    CHECK(chain.acceptance.at("U1") < 0.7);
}

TEST_CASE("spatial chain is reproducible and respects prior support") {
    auto config = simulate_spatial(5, 12, 4, 1.0, 0.3, 0.5);
    auto a = run_spatial_chain(config, 1500, 21);
    auto b = run_spatial_chain(config, 1500, 21);
    CHECK(a.draws == b.draws);
    for (int it = 0; it < a.iterations(); ++it) {
        CHECK(a.draws(it, 0) > 0.0);
        CHECK(a.draws(it, 1) > config.rho_lower);
        CHECK(a.draws(it, 1) < config.rho_upper);
        CHECK(a.draws(it, 2) > config.nu_lower);
        CHECK(a.draws(it, 2) < config.nu_upper);
    }
    CHECK(a.acceptance.at("rho_nu") > 0.05);
    CHECK(a.acceptance.at("rho_nu") < 0.95);
    CHECK_THROWS_AS(run_spatial_chain(config, 10, 21), ConfigError);
}

TEST_CASE("spatial sigma2 block matches scalar conjugacy on a 1-point dataset") {
    SpatialConfig config;
    config.locations.resize(1, 2);
    config.locations << 0.5, 0.5;
    config.responses.resize(1);
    config.responses << 0.8;
    config.pred_locations.resize(1, 2);
    config.pred_locations << 0.2, 0.2;

    auto chain = run_spatial_chain(config, 40000, 13);
    // with one observation R = [1]: sigma^2 | X ~ InverseGamma(a + 1/2, b + x^2/2)
    const double an = config.prior_a + 0.5;
    const double bn = config.prior_b + 0.5 * 0.64;
    const double closed_mean = bn / (an - 1.0);
    const int kept = chain.iterations() - chain.burn_in;
    const double se = std::sqrt(chain.retained_variance(0) / (kept / 5.0));
    CHECK(std::abs(chain.retained_mean(0) - closed_mean) < 3.0 * se);
}

TEST_CASE("composition prediction") {
    auto config = simulate_spatial(5, 10, 4, 1.0, 0.3, 0.5);
    auto chain = run_spatial_chain(config, 2000, 17);

    auto draws = composition_predict(chain, config, 4);
    CHECK(draws.rows() == (chain.iterations() - chain.burn_in + 3) / 4);
    CHECK(draws.cols() == 4);

    // concurrent generation is bit-identical to serial
    auto par = composition_predict(chain, config, 4, 4);
    CHECK(par == draws);

    // a prediction point coincident with an observation has (near-)zero
    // conditional variance: draws collapse onto the observed value
    SpatialConfig coincident = config;
    coincident.pred_locations = config.locations.row(0);
    auto spikes = composition_predict(chain, coincident, 10);
    for (int s = 0; s < spikes.rows(); ++s) {
        CHECK(spikes(s, 0) == Catch::Approx(config.responses[0]).margin(1e-4));
    }
}

TEST_CASE("kernel density estimate") {
    std::mt19937_64 rng(29);
    std::normal_distribution<double> norm(0.0, 1.0);
    std::vector<double> samples(100000);
    for (double& x : samples) x = norm(rng);
    std::vector<double> pts(161);
    for (int i = 0; i < 161; ++i) pts[i] = -4.0 + i * 8.0 / 160.0;
    auto curve = kde_density(samples, pts);
    CHECK(curve.values[80] == Catch::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(0.05));
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        mass += 0.5 * (curve.values[i] + curve.values[i + 1]) * (pts[i + 1] - pts[i]);
    }
    CHECK(mass == Catch::Approx(1.0).margin(1e-2));

    // near-degenerate samples give a spike centered on the common value
    std::vector<double> spike(200);
    for (std::size_t i = 0; i < spike.size(); ++i) {
        spike[i] = 2.5 + (i % 2 == 0 ? 1e-6 : -1e-6);
    }
    std::vector<double> wide = {-1.0, 1.0, 2.0, 2.5, 3.0, 5.0};
    auto sc = kde_density(spike, wide);
    const auto peak = std::max_element(sc.values.begin(), sc.values.end());
    CHECK(wide[static_cast<std::size_t>(peak - sc.values.begin())] == 2.5);

    CHECK_THROWS_AS(kde_density(std::vector<double>(200, 1.0), wide), NumericalError);
    CHECK_THROWS_AS(kde_density(std::vector<double>(10, 1.0), wide), ConfigError);
}

TEST_CASE("chain CSV export") {
    auto data = simulate_furseal(42);
    auto chain = run_furseal_chain(data, 1000, 7);
    std::ostringstream os;
    write_chain_csv(chain, os);
    const std::string text = os.str();
    CHECK(text.rfind("iteration,N,alpha_1", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1001);
}
TEST_CASE("Silverman bandwidth on an arithmetic sequence") {
    std::vector<double> x(100);
    for (int i = 0; i < 100; ++i) x[static_cast<std::size_t>(i)] = static_cast<double>(i);
    // sd = 29.011491975882016 < IQR/1.34 = 37.31343283582089, so
    // bw = 0.9 * sd * 100^{-1/5}
    CHECK(silverman_bandwidth(x) == Catch::Approx(10.39471468564849).epsilon(1e-12));

    CHECK_THROWS_AS(silverman_bandwidth(std::vector<double>(50, 1.0)), ConfigError);
    CHECK_THROWS_AS(silverman_bandwidth(std::vector<double>(100, 1.0)), NumericalError);
}

TEST_CASE("kernel density estimate with an explicit bandwidth") {
    std::vector<double> x(100);
    for (int i = 0; i < 100; ++i) x[static_cast<std::size_t>(i)] = static_cast<double>(i);
    // deep inside a unit-spaced sample the KDE is flat at density 1/100
    auto curve = kde_density(x, {50.0}, 2.0);
    CHECK(curve.values[0] == Catch::Approx(0.01).epsilon(1e-12));
    // widening the bandwidth must not change the flat-region density
    auto wide = kde_density(x, {50.0}, 5.0);
    CHECK(wide.values[0] == Catch::Approx(0.01).epsilon(1e-9));
}

TEST_CASE("Gaussian curve convolved with a Gaussian kernel") {
    // N(0,1) smoothed with bandwidth h is N(0, 1 + h^2)
    const double h = 0.5;
    DensityCurve curve;
    for (int i = 0; i <= 320; ++i) {
        const double t = -8.0 + i * 16.0 / 320.0;
        curve.points.push_back(t);
        curve.values.push_back(std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI));
    }
    const auto out = smooth_curve(curve, h);
    const double v = 1.0 + h * h;
    for (std::size_t i = 0; i < out.points.size(); ++i) {
        const double t = out.points[i];
        if (std::abs(t) > 6.0) continue; // convolution truncates at the grid edge
        const double expect = std::exp(-0.5 * t * t / v) / std::sqrt(2.0 * M_PI * v);
        CHECK(out.values[i] == Catch::Approx(expect).margin(1e-6));
    }

    CHECK_THROWS_AS(smooth_curve(curve, 0.0), ConfigError);
    DensityCurve tiny;
    tiny.points = {0.0};
    tiny.values = {1.0};
    CHECK_THROWS_AS(smooth_curve(tiny, 1.0), ConfigError);
}

TEST_CASE("spatial chain matches a dense-grid posterior on a small dataset") {
    auto config = simulate_spatial(17, 10, 4, 1.0, 0.3, 0.5);
    const double n = static_cast<double>(config.n_obs());

    // exact reference: sigma^2 integrates out analytically against its
    // inverse-gamma prior, leaving a 2-D (rho, nu) posterior evaluated on a
    // dense grid; E[sigma^2 | X] follows from the conditional IG mean
    const int g = 60;
    double total = 0.0, e_sigma2 = 0.0, e_rho = 0.0;
    double max_log = -std::numeric_limits<double>::infinity();
    std::vector<double> logs(static_cast<std::size_t>(g * g));
    std::vector<double> cond_s2(logs.size()), rhos(logs.size());
    for (int a = 0; a < g; ++a) {
        for (int b = 0; b < g; ++b) {
            const double rho = (a + 0.5) / g, nu = (b + 0.5) / g;
            const auto f = gp_factor(config, rho, nu);
            const double post_b = config.prior_b + 0.5 * f.quad_form;
            logs[static_cast<std::size_t>(a * g + b)] =
                -0.5 * f.logdet_corr - (config.prior_a + 0.5 * n) * std::log(post_b);
            cond_s2[static_cast<std::size_t>(a * g + b)] =
                post_b / (config.prior_a + 0.5 * n - 1.0);
            rhos[static_cast<std::size_t>(a * g + b)] = rho;
            max_log = std::max(max_log, logs[static_cast<std::size_t>(a * g + b)]);
        }
    }
    for (std::size_t i = 0; i < logs.size(); ++i) {
        const double w = std::exp(logs[i] - max_log);
        total += w;
        e_sigma2 += w * cond_s2[i];
        e_rho += w * rhos[i];
    }
    e_sigma2 /= total;
    e_rho /= total;

    auto chain = run_spatial_chain(config, 30000, 23);
    CHECK(chain.retained_mean(0) == Catch::Approx(e_sigma2).epsilon(0.05));
    CHECK(chain.retained_mean(1) == Catch::Approx(e_rho).margin(0.03));
}
