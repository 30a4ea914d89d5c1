#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bisque/error.hpp"
#include "bisque/mixture.hpp"
#include "bisque/models/furseal.hpp"
#include "bisque/models/spatial.hpp"
#include "bisque/util.hpp"

namespace bisque {

// Metropolis-within-Gibbs output: one row per iteration, one column per
// sampled parameter, plus per-block acceptance diagnostics.
struct ChainSamples {
    Eigen::MatrixXd draws; // iterations x parameters
    std::vector<std::string> names;
    std::uint64_t seed = 0;
    int burn_in = 0;
    std::map<std::string, double> acceptance;

    int iterations() const { return static_cast<int>(draws.rows()); }

    // post-burn-in column view
    Eigen::VectorXd retained(int column) const {
        return draws.col(column).tail(iterations() - burn_in);
    }

    double retained_mean(int column) const { return retained(column).mean(); }

    double retained_variance(int column) const {
        const Eigen::VectorXd r = retained(column);
        return (r.array() - r.mean()).square().sum() / (static_cast<double>(r.size()) - 1.0);
    }
};

namespace detail {

inline double beta_draw(std::mt19937_64& rng, double a, double b) {
    std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
    const double x = ga(rng), y = gb(rng);
    return x / (x + y);
}

inline double inverse_gamma_draw(std::mt19937_64& rng, double shape, double rate) {
    std::gamma_distribution<double> g(shape, 1.0 / rate);
    return 1.0 / g(rng);
}

} // namespace detail

// Gibbs sampler for the fur-seal model: inverse-CDF draws for N over its
// truncated support, then a blocked (U1, alpha) update — random-walk
// Metropolis on U1 under the alpha-marginalized conditional f(U1 | N, X)
// followed by conjugate Beta draws for the capture probabilities.  The
// blocking breaks the strong alpha--U1 cross-correlation the prior sample
// size e^{U2} induces.  Columns: N, alpha_1..alpha_I, U1.
inline ChainSamples run_furseal_chain(const FurSealData& data, int iterations,
                                      std::uint64_t seed, double proposal_sd = 0.2,
                                      double u2 = 5.5) {
    if (iterations < 1000) throw ConfigError("run_furseal_chain requires iterations >= 1000");
    data.validate();
    const int visits = data.visits;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> norm(0.0, 1.0);

    ChainSamples chain;
    chain.seed = seed;
    chain.burn_in = iterations / 2;
    chain.draws.resize(iterations, visits + 2);
    chain.names.push_back("N");
    for (int i = 1; i <= visits; ++i) chain.names.push_back("alpha_" + std::to_string(i));
    chain.names.push_back("U1");

    // a few U1 sub-steps per sweep keep the U1 autocorrelation time short
    const int u1_steps = 10;
    double n_pop = static_cast<double>(data.total_marked + 10);
    double u1 = 0.0;
    Eigen::VectorXd alpha = Eigen::VectorXd::Constant(visits, 0.3);
    long long accepted = 0;
    for (int it = 0; it < iterations; ++it) {
        // N | alpha: inverse CDF over the truncated integer support
        const auto dist = furseal_conditional_N(data, alpha);
        const double u = unif(rng);
        double cum = 0.0;
        int n_draw = dist.support_start + static_cast<int>(dist.probs.size()) - 1;
        for (std::size_t k = 0; k < dist.probs.size(); ++k) {
            cum += dist.probs[k];
            if (u <= cum) {
                n_draw = dist.support_start + static_cast<int>(k);
                break;
            }
        }
        n_pop = static_cast<double>(n_draw);
        // U1 | N (alpha marginalized): random-walk Metropolis sub-steps
        double cur_target = furseal_log_marginal(data, n_pop, u1, u2);
        for (int s = 0; s < u1_steps; ++s) {
            const double prop = u1 + proposal_sd * norm(rng);
            const double prop_target = furseal_log_marginal(data, n_pop, prop, u2);
            if (std::log(unif(rng)) < prop_target - cur_target) {
                u1 = prop;
                cur_target = prop_target;
                ++accepted;
            }
        }
        // alpha | N, U1: conjugate Beta, completing the blocked (U1, alpha) draw
        const auto params = furseal_conditional_alpha(data, n_pop, u1, u2);
        for (int i = 0; i < visits; ++i) {
            alpha[i] = detail::beta_draw(rng, params[static_cast<std::size_t>(i)].a,
                                         params[static_cast<std::size_t>(i)].b);
        }
        chain.draws(it, 0) = n_pop;
        for (int i = 0; i < visits; ++i) chain.draws(it, 1 + i) = alpha[i];
        chain.draws(it, visits + 1) = u1;
    }
    chain.acceptance["U1"] = static_cast<double>(accepted) / (static_cast<double>(u1_steps) * iterations);
    return chain;
}

// Metropolis-within-Gibbs for the spatial model: conjugate inverse-gamma
// draws for sigma^2 and a mixture of logit-scale random-walk and uniform
// independence Metropolis moves for (rho, nu).  Columns: sigma2, rho, nu.
inline ChainSamples run_spatial_chain(const SpatialConfig& config, int iterations,
                                      std::uint64_t seed, double proposal_sd_rho = 1.5,
                                      double proposal_sd_nu = 0.5) {
    if (iterations < 1000) throw ConfigError("run_spatial_chain requires iterations >= 1000");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> norm(0.0, 1.0);

    ChainSamples chain;
    chain.seed = seed;
    chain.burn_in = iterations / 2;
    chain.draws.resize(iterations, 3);
    chain.names = {"sigma2", "rho", "nu"};

    auto logit = [](double x, double lo, double hi) { return std::log((x - lo) / (hi - x)); };
    auto inv_logit = [](double z, double lo, double hi) {
        return lo + (hi - lo) * detail::sigmoid(z);
    };
    const double n = static_cast<double>(config.n_obs());
    // log f(rho, nu | X) with sigma2 integrated out against its inverse-gamma
    // prior; collapsing sigma2 here removes the sigma2-(rho, nu) posterior
    // ridge that otherwise makes the alternating update crawl
    auto log_marginal = [&](const GpFactor& f) {
        return -0.5 * f.logdet_corr -
               (config.prior_a + 0.5 * n) * std::log(config.prior_b + 0.5 * f.quad_form);
    };
    // the same marginal on the logit scale, including the Jacobian
    auto log_target = [&](const GpFactor& f, double z_rho, double z_nu) {
        return log_marginal(f) + detail::log_sigmoid(z_rho) + detail::log_sigmoid(-z_rho) +
               detail::log_sigmoid(z_nu) + detail::log_sigmoid(-z_nu);
    };
    double rho = 0.5 * (config.rho_lower + config.rho_upper);
    double nu = 0.5 * (config.nu_lower + config.nu_upper);
    double z_rho = logit(rho, config.rho_lower, config.rho_upper);
    double z_nu = logit(nu, config.nu_lower, config.nu_upper);
    GpFactor cur = gp_factor(config, rho, nu);
    double sigma2 = 1.0;
    long long accepted = 0, chol_failures = 0;
    for (int it = 0; it < iterations; ++it) {
        // (rho, nu) | X with sigma2 collapsed: a mixture kernel — a joint
        // logit random walk for local moves, and uniform independence
        // proposals that traverse the wide, weakly identified stretches of
        // the support in one hop
        const bool independence = unif(rng) < 0.5;
        double p_rho, p_nu, pz_rho, pz_nu;
        if (independence) {
            p_rho = config.rho_lower + (config.rho_upper - config.rho_lower) * unif(rng);
            p_nu = config.nu_lower + (config.nu_upper - config.nu_lower) * unif(rng);
            pz_rho = logit(p_rho, config.rho_lower, config.rho_upper);
            pz_nu = logit(p_nu, config.nu_lower, config.nu_upper);
        } else {
            pz_rho = z_rho + proposal_sd_rho * norm(rng);
            pz_nu = z_nu + proposal_sd_nu * norm(rng);
            p_rho = inv_logit(pz_rho, config.rho_lower, config.rho_upper);
            p_nu = inv_logit(pz_nu, config.nu_lower, config.nu_upper);
        }
        const double u = unif(rng);
        try {
            const GpFactor prop = gp_factor(config, p_rho, p_nu);
            // independence moves work on the original scale, where the
            // uniform prior and the uniform proposal both cancel; random-walk
            // moves work on the logit scale and carry the Jacobian terms
            const double log_ratio =
                independence ? log_marginal(prop) - log_marginal(cur)
                             : log_target(prop, pz_rho, pz_nu) - log_target(cur, z_rho, z_nu);
            if (std::log(u) < log_ratio) {
                z_rho = pz_rho;
                z_nu = pz_nu;
                rho = p_rho;
                nu = p_nu;
                cur = prop;
                ++accepted;
            }
        } catch (const NumericalError&) {
            ++chol_failures; // proposal rejected
        }
        // sigma2 | rho, nu, X: conjugate inverse gamma
        sigma2 = detail::inverse_gamma_draw(rng, config.prior_a + 0.5 * n,
                                            config.prior_b + 0.5 * cur.quad_form);
        chain.draws(it, 0) = sigma2;
        chain.draws(it, 1) = rho;
        chain.draws(it, 2) = nu;
    }
    chain.acceptance["rho_nu"] = static_cast<double>(accepted) / iterations;
    chain.acceptance["cholesky_failures"] = static_cast<double>(chol_failures) / iterations;
    return chain;
}

// Composition sampling: one kriging-conditional Gaussian draw per retained
// posterior sample, with a deterministic sub-seed per sample so draws may be
// generated concurrently without changing the result.
inline Eigen::MatrixXd composition_predict(const ChainSamples& chain, const SpatialConfig& config,
                                           int thin = 1, unsigned threads = 1) {
    if (thin < 1) throw ConfigError("composition_predict requires thin >= 1");
    std::vector<int> rows;
    for (int it = chain.burn_in; it < chain.iterations(); it += thin) rows.push_back(it);
    Eigen::MatrixXd draws(static_cast<int>(rows.size()), config.n_pred());
    parallel_for(rows.size(), threads, [&](std::size_t s) {
        const int it = rows[s];
        const auto krig = kriging_conditional(config, chain.draws(it, 0), chain.draws(it, 1),
                                              chain.draws(it, 2));
        Eigen::LLT<Eigen::MatrixXd> llt(
            krig.cov + 1e-12 * Eigen::MatrixXd::Identity(config.n_pred(), config.n_pred()));
        if (llt.info() != Eigen::Success) {
            throw NumericalError("composition_predict: conditional covariance not factorizable");
        }
        std::mt19937_64 rng(chain.seed + 0x9e3779b97f4a7c15ull * (s + 1)); // per-sample sub-seed
        std::normal_distribution<double> norm(0.0, 1.0);
        Eigen::VectorXd z(config.n_pred());
        for (int j = 0; j < config.n_pred(); ++j) z[j] = norm(rng);
        draws.row(s) = (krig.mean + Eigen::MatrixXd(llt.matrixL()) * z).transpose();
    });
    return draws;
}

// Silverman's rule-of-thumb kernel bandwidth.
inline double silverman_bandwidth(const std::vector<double>& samples) {
    if (samples.size() < 100) throw ConfigError("silverman_bandwidth requires at least 100 samples");
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : samples) var += (x - mean) * (x - mean);
    var /= n - 1.0;
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    const double q1 = sorted[static_cast<std::size_t>(0.25 * (n - 1))];
    const double q3 = sorted[static_cast<std::size_t>(0.75 * (n - 1))];
    const double spread = std::min(std::sqrt(var), (q3 - q1) / 1.34);
    if (!(spread > 0.0)) {
        throw NumericalError("silverman_bandwidth: degenerate (zero-variance) samples");
    }
    return 0.9 * spread * std::pow(n, -0.2);
}

// Gaussian kernel density estimate; bandwidth <= 0 selects Silverman's rule.
inline DensityCurve kde_density(const std::vector<double>& samples,
                                const std::vector<double>& eval_points,
                                double bandwidth = 0.0) {
    if (samples.size() < 100) throw ConfigError("kde_density requires at least 100 samples");
    const double n = static_cast<double>(samples.size());
    const double bw = bandwidth > 0.0 ? bandwidth : silverman_bandwidth(samples);

    DensityCurve curve;
    curve.points = eval_points;
    curve.values.resize(eval_points.size());
    const double norm_const = 1.0 / (n * bw * std::sqrt(2.0 * M_PI));
    for (std::size_t i = 0; i < eval_points.size(); ++i) {
        double s = 0.0;
        for (double x : samples) {
            const double z = (eval_points[i] - x) / bw;
            s += std::exp(-0.5 * z * z);
        }
        curve.values[i] = s * norm_const;
    }
    return curve;
}

// Gaussian-kernel convolution of a sampled density curve, matching the
// resolution of a KDE built with the same bandwidth so curve-vs-KDE
// comparisons are free of kernel smoothing bias.
inline DensityCurve smooth_curve(const DensityCurve& curve, double bandwidth) {
    if (!(bandwidth > 0.0)) throw ConfigError("smooth_curve requires a positive bandwidth");
    const std::size_t n = curve.points.size();
    if (n < 2) throw ConfigError("smooth_curve needs at least two points");
    std::vector<double> trap(n, 0.0); // trapezoid quadrature weights
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double h = 0.5 * (curve.points[j + 1] - curve.points[j]);
        trap[j] += h;
        trap[j + 1] += h;
    }
    DensityCurve out;
    out.points = curve.points;
    out.values.resize(n);
    const double norm_const = 1.0 / (bandwidth * std::sqrt(2.0 * M_PI));
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double z = (curve.points[i] - curve.points[j]) / bandwidth;
            s += curve.values[j] * trap[j] * std::exp(-0.5 * z * z);
        }
        out.values[i] = s * norm_const;
    }
    return out;
}

inline void write_chain_csv(const ChainSamples& chain, std::ostream& os) {
    os << "iteration";
    for (const auto& name : chain.names) os << ',' << name;
    os << '\n' << std::setprecision(17);
    for (int it = 0; it < chain.iterations(); ++it) {
        os << it;
        for (int j = 0; j < chain.draws.cols(); ++j) os << ',' << chain.draws(it, j);
        os << '\n';
    }
}

} // namespace bisque
