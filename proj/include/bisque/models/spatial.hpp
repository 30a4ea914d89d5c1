#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "bisque/bessel.hpp"
#include "bisque/error.hpp"
#include "bisque/mixture.hpp"
#include "bisque/transform.hpp"

namespace bisque {

// Gaussian process X ~ N(0, Sigma) on [0,1]^2 with isotropic Matern
// covariance; priors InverseGamma(a, b) on sigma^2 and Uniform bounds on the
// range rho and smoothness nu.
struct SpatialConfig {
    Eigen::MatrixXd locations;      // N x 2 observation sites
    Eigen::VectorXd responses;      // N observed values
    Eigen::MatrixXd pred_locations; // M x 2 prediction sites

    double prior_a = 2.0, prior_b = 1.0; // sigma^2 ~ InverseGamma(a, b)
    double rho_lower = 0.0, rho_upper = 1.0;
    double nu_lower = 0.0, nu_upper = 1.0;

    int n_obs() const { return static_cast<int>(locations.rows()); }
    int n_pred() const { return static_cast<int>(pred_locations.rows()); }
};

// kappa(d) = sigma^2 / (2^{nu-1} Gamma(nu)) (d/rho)^nu K_nu(d/rho)
inline double matern_cov(const Eigen::Vector2d& s, const Eigen::Vector2d& t, double sigma2,
                         double rho, double nu_smooth) {
    if (!(sigma2 > 0.0) || !(rho > 0.0) || !(nu_smooth > 0.0)) {
        throw DomainError("matern_cov requires sigma2, rho, nu all positive");
    }
    const double d = (s - t).norm();
    if (d == 0.0) return sigma2;
    const double u = d / rho;
    return sigma2 / (std::pow(2.0, nu_smooth - 1.0) * std::tgamma(nu_smooth)) *
           std::pow(u, nu_smooth) * bessel_k(nu_smooth, u);
}

namespace detail {

// Matern correlation matrix (unit scale) between two point sets; the
// one-argument overload exploits symmetry.
inline Eigen::MatrixXd matern_corr(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double rho,
                                   double nu_smooth) {
    Eigen::MatrixXd out(a.rows(), b.rows());
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < b.rows(); ++j) {
            out(i, j) = matern_cov(a.row(i), b.row(j), 1.0, rho, nu_smooth);
        }
    }
    return out;
}

inline Eigen::MatrixXd matern_corr(const Eigen::MatrixXd& a, double rho, double nu_smooth) {
    Eigen::MatrixXd out(a.rows(), a.rows());
    for (int i = 0; i < a.rows(); ++i) {
        out(i, i) = 1.0;
        for (int j = i + 1; j < a.rows(); ++j) {
            out(i, j) = out(j, i) = matern_cov(a.row(i), a.row(j), 1.0, rho, nu_smooth);
        }
    }
    return out;
}

// Cholesky with a diagnostic pivot index on failure.
inline Eigen::LLT<Eigen::MatrixXd> chol_or_throw(const Eigen::MatrixXd& m, const char* what) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() == Eigen::Success) return llt;
    // re-run an explicit elimination to locate the failing pivot
    Eigen::MatrixXd a = m;
    const int n = static_cast<int>(a.rows());
    int pivot = n - 1;
    for (int j = 0; j < n; ++j) {
        double d = a(j, j);
        for (int k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        if (!(d > 0.0)) {
            pivot = j;
            break;
        }
        a(j, j) = std::sqrt(d);
        for (int i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (int k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / a(j, j);
        }
    }
    throw NumericalError(std::string(what) + ": covariance Cholesky failed at pivot " +
                         std::to_string(pivot));
}

} // namespace detail

// One factorization of the unit-scale correlation matrix, reusable across
// the sigma^2 dimension: log|R| and X^T R^{-1} X.
struct GpFactor {
    double logdet_corr = 0.0;
    double quad_form = 0.0; // X^T R^{-1} X
};

inline GpFactor gp_factor(const SpatialConfig& config, double rho, double nu_smooth) {
    const Eigen::MatrixXd corr =
        detail::matern_corr(config.locations, rho, nu_smooth);
    auto llt = detail::chol_or_throw(corr, "gp_factor");
    GpFactor f;
    const Eigen::MatrixXd l = llt.matrixL();
    for (int j = 0; j < l.rows(); ++j) f.logdet_corr += 2.0 * std::log(l(j, j));
    const Eigen::VectorXd z = llt.matrixL().solve(config.responses);
    f.quad_form = z.squaredNorm();
    return f;
}

// log f(sigma^2, rho, nu | X) up to a constant: Gaussian likelihood via
// Cholesky plus the InverseGamma and Uniform priors.
inline double gp_log_posterior(const SpatialConfig& config, double sigma2, double rho,
                               double nu_smooth) {
    if (!(sigma2 > 0.0) || rho <= config.rho_lower || rho >= config.rho_upper ||
        nu_smooth <= config.nu_lower || nu_smooth >= config.nu_upper) {
        return -std::numeric_limits<double>::infinity();
    }
    const GpFactor f = gp_factor(config, rho, nu_smooth);
    const double n = static_cast<double>(config.n_obs());
    return -0.5 * (n * std::log(sigma2) + f.logdet_corr) - 0.5 * f.quad_form / sigma2 -
           (config.prior_a + 1.0) * std::log(sigma2) - config.prior_b / sigma2;
}

struct KrigingResult {
    Eigen::VectorXd mean; // Sigma_0x Sigma^{-1} X
    Eigen::MatrixXd cov;  // Sigma_00 - Sigma_0x Sigma^{-1} Sigma_x0
};

inline KrigingResult kriging_conditional(const SpatialConfig& config, double sigma2, double rho,
                                         double nu_smooth) {
    const Eigen::MatrixXd r_xx =
        detail::matern_corr(config.locations, rho, nu_smooth);
    const Eigen::MatrixXd r_0x =
        detail::matern_corr(config.pred_locations, config.locations, rho, nu_smooth);
    const Eigen::MatrixXd r_00 =
        detail::matern_corr(config.pred_locations, config.pred_locations, rho, nu_smooth);
    auto llt = detail::chol_or_throw(r_xx, "kriging_conditional");
    KrigingResult out;
    out.mean = r_0x * llt.solve(config.responses);
    Eigen::MatrixXd cross = llt.solve(r_0x.transpose());
    out.cov = sigma2 * (r_00 - r_0x * cross);
    out.cov = 0.5 * (out.cov + out.cov.transpose());
    return out;
}

// BISQuE conditioning split: theta2 = (sigma^2, rho, nu) with (log, logit,
// logit) transforms; theta1 = the unobserved field values.
inline HierarchicalModel spatial_model(const SpatialConfig& config) {
    HierarchicalModel m;
    m.dim_theta2 = 3;
    m.transform = Transform({CoordinateMap::log_map(),
                             CoordinateMap::logit(config.rho_lower, config.rho_upper),
                             CoordinateMap::logit(config.nu_lower, config.nu_upper)});
    const SpatialConfig cfg = config;
    auto log_theta2 = [cfg](const Eigen::VectorXd& t) {
        return gp_log_posterior(cfg, t[0], t[1], t[2]);
    };
    const Transform tf = m.transform;
    m.log_marginal_nu = [log_theta2, tf](const Eigen::VectorXd& nu) {
        return transformed_log_density(log_theta2, tf, nu);
    };
    return m;
}

// Seed-fixed synthetic dataset: uniform observation sites on [0,1]^2, a
// near-square grid of prediction sites, and one Gaussian field draw.
inline SpatialConfig simulate_spatial(std::uint64_t seed, int n_obs, int n_pred, double sigma2,
                                      double rho, double nu_smooth, double prior_a = 2.0,
                                      double prior_b = 1.0, double rho_lower = 0.0,
                                      double rho_upper = 1.0, double nu_lower = 0.0,
                                      double nu_upper = 1.0) {
    if (n_obs < 1 || n_pred < 1) throw ConfigError("simulate_spatial needs n_obs, n_pred >= 1");
    if (!(sigma2 > 0.0) || rho <= rho_lower || rho >= rho_upper || nu_smooth <= nu_lower ||
        nu_smooth >= nu_upper) {
        throw ConfigError("simulate_spatial parameters outside the prior support");
    }
    SpatialConfig config;
    config.prior_a = prior_a;
    config.prior_b = prior_b;
    config.rho_lower = rho_lower;
    config.rho_upper = rho_upper;
    config.nu_lower = nu_lower;
    config.nu_upper = nu_upper;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    config.locations.resize(n_obs, 2);
    for (int i = 0; i < n_obs; ++i) {
        config.locations(i, 0) = unif(rng);
        config.locations(i, 1) = unif(rng);
    }
    const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_pred))));
    config.pred_locations.resize(n_pred, 2);
    for (int k = 0; k < n_pred; ++k) {
        const int i = k / side, j = k % side;
        config.pred_locations(k, 0) = (i + 0.5) / side;
        config.pred_locations(k, 1) = (j + 0.5) / side;
    }

    Eigen::MatrixXd cov =
        sigma2 * detail::matern_corr(config.locations, rho, nu_smooth);
    auto llt = detail::chol_or_throw(cov, "simulate_spatial");
    std::normal_distribution<double> norm(0.0, 1.0);
    Eigen::VectorXd z(n_obs);
    for (int i = 0; i < n_obs; ++i) z[i] = norm(rng);
    config.responses = Eigen::MatrixXd(llt.matrixL()) * z;
    return config;
}

} // namespace bisque
