#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bisque/error.hpp"
#include "bisque/mixture.hpp"
#include "bisque/transform.hpp"

namespace bisque {

// Capture-recapture census counts: c_i pups captured on visit i, of which
// m_i were captured for the first time; r is the total ever marked.
struct FurSealData {
    int visits = 0;
    std::vector<int> captured;
    std::vector<int> newly_captured;
    int total_marked = 0;

    void validate() const {
        if (visits < 1 || static_cast<int>(captured.size()) != visits ||
            static_cast<int>(newly_captured.size()) != visits) {
            throw ConfigError("fur-seal data needs matching capture counts for every visit");
        }
        int r = 0, cmax = 0;
        for (int i = 0; i < visits; ++i) {
            if (captured[i] < 0 || newly_captured[i] < 0 || newly_captured[i] > captured[i]) {
                throw ConfigError("fur-seal counts invalid at visit " + std::to_string(i + 1) +
                                  ": need 0 <= newly_captured <= captured");
            }
            r += newly_captured[i];
            cmax = std::max(cmax, captured[i]);
        }
        if (r != total_marked) throw ConfigError("total_marked does not equal the sum of new captures");
        if (r < cmax) throw ConfigError("total marked is below the largest single-visit capture count");
    }
};

namespace detail {

inline double lbeta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

inline double beta_log_pdf(double x, double a, double b) {
    if (x <= 0.0 || x >= 1.0) return -std::numeric_limits<double>::infinity();
    return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lbeta(a, b);
}

} // namespace detail

// Mean--sample-size parameterization of the Beta prior on capture
// probabilities: theta1 = e^{U2} sigmoid(U1), theta2 = e^{U2} (1 - sigmoid(U1)).
struct FurSealTheta {
    double theta1 = 0.0, theta2 = 0.0;
};

inline FurSealTheta furseal_theta(double u1, double u2) {
    const double mean = detail::sigmoid(u1);
    const double size = std::exp(u2);
    return {size * mean, size * (1.0 - mean)};
}

// log of N!/(N-r)! prod alpha_i^{c_i} (1-alpha_i)^{N-c_i} * (1/N)
//        * prod Beta(alpha_i; theta1, theta2) * exp(-(theta1+theta2)/1000),
// with the factorial ratio through log-gamma so N may be real.
inline double furseal_log_joint(const FurSealData& data, double n_pop,
                                const Eigen::VectorXd& alpha, double u1, double u2 = 5.5) {
    const double r = static_cast<double>(data.total_marked);
    if (n_pop < r) return -std::numeric_limits<double>::infinity();
    const auto th = furseal_theta(u1, u2);
    double v = std::lgamma(n_pop + 1.0) - std::lgamma(n_pop - r + 1.0) - std::log(n_pop) -
               (th.theta1 + th.theta2) / 1000.0;
    for (int i = 0; i < data.visits; ++i) {
        const double a = alpha[i];
        if (a <= 0.0 || a >= 1.0) return -std::numeric_limits<double>::infinity();
        v += data.captured[i] * std::log(a) + (n_pop - data.captured[i]) * std::log1p(-a);
        v += detail::beta_log_pdf(a, th.theta1, th.theta2);
    }
    return v;
}

// Conjugate conditional: alpha_i | N, U1, X ~ Beta(c_i + theta1, N - c_i + theta2).
struct BetaParams {
    double a = 1.0, b = 1.0;
};

inline std::vector<BetaParams> furseal_conditional_alpha(const FurSealData& data, double n_pop,
                                                         double u1, double u2 = 5.5) {
    const auto th = furseal_theta(u1, u2);
    std::vector<BetaParams> out(static_cast<std::size_t>(data.visits));
    for (int i = 0; i < data.visits; ++i) {
        out[static_cast<std::size_t>(i)] = {data.captured[i] + th.theta1,
                                            n_pop - data.captured[i] + th.theta2};
    }
    return out;
}

// Normalized discrete conditional for N given the capture probabilities:
// kernel (N-1)!/(N-r)! prod (1-alpha_i)^N over integers N >= r.
struct FurSealNDist {
    int support_start = 0;           // = r
    std::vector<double> probs;       // probs[k] = P(N = support_start + k)

    double pmf(int n_pop) const {
        const int k = n_pop - support_start;
        if (k < 0 || k >= static_cast<int>(probs.size())) return 0.0;
        return probs[static_cast<std::size_t>(k)];
    }
    double mean() const {
        double s = 0.0;
        for (std::size_t k = 0; k < probs.size(); ++k) s += (support_start + static_cast<double>(k)) * probs[k];
        return s;
    }
    double variance() const {
        const double m = mean();
        double s = 0.0;
        for (std::size_t k = 0; k < probs.size(); ++k) {
            const double d = support_start + static_cast<double>(k) - m;
            s += d * d * probs[k];
        }
        return s;
    }
};

inline FurSealNDist furseal_conditional_N(const FurSealData& data, const Eigen::VectorXd& alpha) {
    const int r = data.total_marked;
    double log_q = 0.0; // log prod (1 - alpha_i)
    for (int i = 0; i < data.visits; ++i) log_q += std::log1p(-alpha[i]);
    if (!(log_q < 0.0)) {
        throw NumericalError("fur-seal N conditional has no normalizable tail: all capture "
                             "probabilities are at or below zero");
    }
    std::vector<double> log_kernel;
    const int max_support = 10000000;
    double max_lk = -std::numeric_limits<double>::infinity();
    for (int n = r;; ++n) {
        const double lk = std::lgamma(static_cast<double>(n)) -
                          std::lgamma(static_cast<double>(n - r + 1)) + n * log_q;
        log_kernel.push_back(lk);
        max_lk = std::max(max_lk, lk);
        // geometric tail bound once the kernel ratio drops below 1
        const double ratio = static_cast<double>(n + 1) / (n - r + 1) * std::exp(log_q);
        if (ratio < 1.0 && std::exp(lk - max_lk) * ratio / (1.0 - ratio) < 1e-12) break;
        if (n - r >= max_support) {
            throw NumericalError("fur-seal N conditional support exceeded the cutoff bound");
        }
    }
    FurSealNDist dist;
    dist.support_start = r;
    dist.probs.resize(log_kernel.size());
    double total = 0.0;
    for (std::size_t k = 0; k < log_kernel.size(); ++k) {
        dist.probs[k] = std::exp(log_kernel[k] - max_lk);
        total += dist.probs[k];
    }
    for (double& p : dist.probs) p /= total;
    return dist;
}

// Marginal log posterior of (N, U1) with alpha integrated out analytically:
// f(N, U1 | X) up to a constant; the Beta normalizing constants survive.
inline double furseal_log_marginal(const FurSealData& data, double n_pop, double u1,
                                   double u2 = 5.5) {
    const double r = static_cast<double>(data.total_marked);
    if (n_pop < r) return -std::numeric_limits<double>::infinity();
    const auto th = furseal_theta(u1, u2);
    double v = std::lgamma(n_pop + 1.0) - std::lgamma(n_pop - r + 1.0) - std::log(n_pop) -
               (th.theta1 + th.theta2) / 1000.0;
    for (int i = 0; i < data.visits; ++i) {
        v += detail::lbeta(data.captured[i] + th.theta1, n_pop - data.captured[i] + th.theta2) -
             detail::lbeta(th.theta1, th.theta2);
    }
    return v;
}

// Discrete conditional of N given U1 with alpha integrated out analytically:
// kernel exp(furseal_log_marginal(n, u1, u2)) over integers n >= r.  When
// log_norm is non-null it receives log sum_n kernel(n), i.e. the log marginal
// posterior of U1 up to a constant.
inline FurSealNDist furseal_conditional_N_given_u1(const FurSealData& data, double u1,
                                                   double u2 = 5.5, double* log_norm = nullptr) {
    const int r = data.total_marked;
    std::vector<double> log_kernel;
    const int max_support = 1000000;
    double max_lk = -std::numeric_limits<double>::infinity();
    double prev = -std::numeric_limits<double>::infinity();
    for (int n = r;; ++n) {
        const double lk = furseal_log_marginal(data, static_cast<double>(n), u1, u2);
        log_kernel.push_back(lk);
        max_lk = std::max(max_lk, lk);
        if (n > r && lk < prev) {
            // past the mode the kernel decays at least polynomially in n;
            // bound the remaining mass by the integral of the local power law
            const double p = n * (prev - lk); // local decay exponent
            if (p > 1.0 && std::exp(lk - max_lk) * n / (p - 1.0) < 1e-12) break;
        }
        if (n - r >= max_support) {
            throw NumericalError("fur-seal N|U1 conditional support exceeded the cutoff bound");
        }
        prev = lk;
    }
    FurSealNDist dist;
    dist.support_start = r;
    dist.probs.resize(log_kernel.size());
    double total = 0.0;
    for (std::size_t k = 0; k < log_kernel.size(); ++k) {
        dist.probs[k] = std::exp(log_kernel[k] - max_lk);
        total += dist.probs[k];
    }
    for (double& p : dist.probs) p /= total;
    if (log_norm) *log_norm = max_lk + std::log(total);
    return dist;
}

// Log marginal posterior of U1 alone (alpha analytically and N discretely
// integrated out), up to a constant.
inline double furseal_log_marginal_u1(const FurSealData& data, double u1, double u2 = 5.5) {
    double log_norm = 0.0;
    furseal_conditional_N_given_u1(data, u1, u2, &log_norm);
    return log_norm;
}

// BISQuE conditioning split over U1 alone: nu = U1 with an identity map;
// theta1 = (N, alpha) is handled by the closed-form conditionals above.
inline HierarchicalModel furseal_u1_model(const FurSealData& data, double u2 = 5.5) {
    data.validate();
    HierarchicalModel m;
    m.dim_theta2 = 1;
    m.transform = Transform({CoordinateMap::identity()});
    m.log_marginal_nu = [data, u2](const Eigen::VectorXd& nu) {
        return furseal_log_marginal_u1(data, nu[0], u2);
    };
    return m;
}

// BISQuE conditioning split: theta2 = (N - r, U1) with N - r log-transformed
// so quadrature nodes stay inside the support; theta1 = alpha.
inline HierarchicalModel furseal_model(const FurSealData& data, double u2 = 5.5) {
    data.validate();
    HierarchicalModel m;
    m.dim_theta2 = 2;
    m.transform = Transform({CoordinateMap::log_map(), CoordinateMap::identity()});
    const int r = data.total_marked;
    auto log_theta2 = [data, r, u2](const Eigen::VectorXd& t) {
        return furseal_log_marginal(data, r + t[0], t[1], u2);
    };
    const Transform tf = m.transform;
    m.log_marginal_nu = [log_theta2, tf](const Eigen::VectorXd& nu) {
        return transformed_log_density(log_theta2, tf, nu);
    };
    return m;
}

// Seed-fixed synthetic census: per-individual Bernoulli capture histories.
inline FurSealData simulate_furseal(std::uint64_t seed, int n_true = 100, int visits = 7,
                                    double u1 = 0.0, double u2 = 5.5) {
    if (n_true < 1 || visits < 1) throw ConfigError("simulate_furseal needs n_true >= 1, visits >= 1");
    std::mt19937_64 rng(seed);
    const auto th = furseal_theta(u1, u2);
    std::gamma_distribution<double> g1(th.theta1, 1.0), g2(th.theta2, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    FurSealData data;
    data.visits = visits;
    data.captured.assign(static_cast<std::size_t>(visits), 0);
    data.newly_captured.assign(static_cast<std::size_t>(visits), 0);
    std::vector<bool> marked(static_cast<std::size_t>(n_true), false);
    for (int i = 0; i < visits; ++i) {
        const double x1 = g1(rng), x2 = g2(rng);
        const double alpha = x1 / (x1 + x2); // Beta(theta1, theta2) draw
        for (int j = 0; j < n_true; ++j) {
            if (unif(rng) >= alpha) continue;
            ++data.captured[static_cast<std::size_t>(i)];
            if (!marked[static_cast<std::size_t>(j)]) {
                marked[static_cast<std::size_t>(j)] = true;
                ++data.newly_captured[static_cast<std::size_t>(i)];
                ++data.total_marked;
            }
        }
    }
    data.validate();
    return data;
}

} // namespace bisque
