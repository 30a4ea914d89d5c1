#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "bisque/gaussian_weight.hpp"
#include "bisque/mixture.hpp"
#include "bisque/transform.hpp"

namespace bisque {

// Normal likelihood with unknown mean mu and variance sigma^2 under a
// conjugate normal-inverse-gamma prior.  Every posterior quantity has a
// closed form, making this model an exact validation target: the
// conditioning variable is sigma^2 and the marginal of mu is Student-t.
struct ConjugateToy {
    double m0 = 0.0; // prior mean of mu
    double k0 = 1.0; // prior precision scale
    double a0 = 2.0; // inverse-gamma shape
    double b0 = 1.0; // inverse-gamma rate
    std::vector<double> data;

    // posterior hyperparameters
    double mn = 0.0, kn = 1.0, an = 2.0, bn = 1.0;

    void update() {
        const double n = static_cast<double>(data.size());
        kn = k0 + n;
        an = a0 + 0.5 * n;
        if (data.empty()) {
            mn = m0;
            bn = b0;
            return;
        }
        const double xbar = std::accumulate(data.begin(), data.end(), 0.0) / n;
        double ss = 0.0;
        for (double x : data) ss += (x - xbar) * (x - xbar);
        mn = (k0 * m0 + n * xbar) / kn;
        bn = b0 + 0.5 * (ss + k0 * n * (xbar - m0) * (xbar - m0) / kn);
    }

    // sigma^2 | X ~ InverseGamma(an, bn); expressed in nu = log sigma^2 with
    // the Jacobian folded in.
    HierarchicalModel model() const {
        HierarchicalModel m;
        m.dim_theta2 = 1;
        m.transform = Transform({CoordinateMap::log_map()});
        const double a = an, b = bn;
        m.log_marginal_nu = [a, b](const Eigen::VectorXd& nu) {
            return -a * nu[0] - b * std::exp(-nu[0]);
        };
        return m;
    }

    GaussianWeight weight() const {
        auto m = model();
        Eigen::VectorXd init(1);
        init << std::log(bn / an); // exact mode of the transformed density
        return build_weight(m.log_marginal_nu, init);
    }

    // mu | sigma^2, X ~ N(mn, sigma^2 / kn)
    double cond_mean(const Eigen::VectorXd&) const { return mn; }
    double cond_var(const Eigen::VectorXd& s2) const { return s2[0] / kn; }
    double cond_density(double mu, const Eigen::VectorXd& s2) const {
        const double v = s2[0] / kn;
        return std::exp(-0.5 * (mu - mn) * (mu - mn) / v) / std::sqrt(2.0 * M_PI * v);
    }
    double cond_cdf(double bound, const Eigen::VectorXd& s2) const {
        return 0.5 * std::erfc(-(bound - mn) / std::sqrt(2.0 * s2[0] / kn));
    }

    // closed-form Student-t marginal: 2*an dof, location mn, scale^2 bn/(an kn)
    double marginal_density(double mu) const {
        const double d = 2.0 * an;
        const double s = std::sqrt(bn / (an * kn));
        const double z = (mu - mn) / s;
        return std::exp(std::lgamma(0.5 * (d + 1.0)) - std::lgamma(0.5 * d)) /
               (std::sqrt(d * M_PI) * s) * std::pow(1.0 + z * z / d, -0.5 * (d + 1.0));
    }
    double marginal_mean() const { return mn; }
    double marginal_variance() const { return bn / (kn * (an - 1.0)); }
};

inline ConjugateToy conjugate_toy(std::vector<double> data, double m0 = 0.0, double k0 = 1.0,
                                  double a0 = 2.0, double b0 = 1.0) {
    ConjugateToy toy;
    toy.m0 = m0;
    toy.k0 = k0;
    toy.a0 = a0;
    toy.b0 = b0;
    toy.data = std::move(data);
    toy.update();
    return toy;
}

} // namespace bisque
