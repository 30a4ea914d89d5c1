#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bisque/error.hpp"

namespace bisque {

// One coordinate of a monotone map Omega_2 -> R.  All maps are coordinate-wise
// so the Jacobian is diagonal and its log-determinant a sum of univariate terms.
struct CoordinateMap {
    enum class Kind { Identity, Log, Logit, Affine };

    Kind kind = Kind::Identity;
    double lower = 0.0, upper = 1.0; // logit bounds
    double shift = 0.0, scale = 1.0; // affine: theta = shift + scale * nu

    static CoordinateMap identity() { return {}; }
    static CoordinateMap log_map() { return {Kind::Log}; }
    static CoordinateMap logit(double lower, double upper) {
        if (!(lower < upper)) throw ConfigError("logit requires lower < upper");
        return {Kind::Logit, lower, upper};
    }
    static CoordinateMap affine(double shift, double scale) {
        if (scale == 0.0) throw ConfigError("affine requires nonzero scale");
        CoordinateMap m{Kind::Affine};
        m.shift = shift;
        m.scale = scale;
        return m;
    }
};

namespace detail {

inline double sigmoid(double x) {
    // saturating; finite for any finite input
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

inline double log_sigmoid(double x) {
    return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

} // namespace detail

// Coordinate-wise monotone map nu = T(theta) with inverse and log-Jacobian.
class Transform {
public:
    Transform() = default;
    explicit Transform(std::vector<CoordinateMap> coords) : coords_(std::move(coords)) {}

    static Transform identity(int dim) {
        return Transform(std::vector<CoordinateMap>(static_cast<std::size_t>(dim)));
    }

    int dim() const { return static_cast<int>(coords_.size()); }
    const std::vector<CoordinateMap>& coordinates() const { return coords_; }

    Eigen::VectorXd forward(const Eigen::VectorXd& theta) const {
        check_dim(theta);
        Eigen::VectorXd nu(theta.size());
        for (int j = 0; j < theta.size(); ++j) nu[j] = forward1(coords_[j], theta[j], j);
        return nu;
    }

    Eigen::VectorXd inverse(const Eigen::VectorXd& nu) const {
        check_dim(nu);
        Eigen::VectorXd theta(nu.size());
        for (int j = 0; j < nu.size(); ++j) theta[j] = inverse1(coords_[j], nu[j]);
        return theta;
    }

    // log |d theta / d nu| summed over coordinates (Jacobian of the inverse map)
    double log_jacobian_det(const Eigen::VectorXd& nu) const {
        check_dim(nu);
        double s = 0.0;
        for (int j = 0; j < nu.size(); ++j) s += log_jacobian1(coords_[j], nu[j]);
        return s;
    }

private:
    static double forward1(const CoordinateMap& m, double theta, int coord) {
        switch (m.kind) {
            case CoordinateMap::Kind::Identity:
                return theta;
            case CoordinateMap::Kind::Log:
                if (!(theta > 0.0)) {
                    throw DomainError("log transform: coordinate " + std::to_string(coord) +
                                      " must be strictly positive, got " + std::to_string(theta));
                }
                return std::log(theta);
            case CoordinateMap::Kind::Logit:
                if (!(theta > m.lower && theta < m.upper)) {
                    throw DomainError("logit transform: coordinate " + std::to_string(coord) +
                                      " must lie strictly inside (" + std::to_string(m.lower) +
                                      ", " + std::to_string(m.upper) + "), got " +
                                      std::to_string(theta));
                }
                return std::log((theta - m.lower) / (m.upper - theta));
            case CoordinateMap::Kind::Affine:
                return (theta - m.shift) / m.scale;
        }
        throw ConfigError("unknown coordinate map kind");
    }

    static double inverse1(const CoordinateMap& m, double nu) {
        switch (m.kind) {
            case CoordinateMap::Kind::Identity:
                return nu;
            case CoordinateMap::Kind::Log:
                return std::exp(std::min(nu, 700.0));
            case CoordinateMap::Kind::Logit: {
                const double s = detail::sigmoid(nu);
                // keep the image strictly interior
                const double eps = 1e-300;
                return m.lower + (m.upper - m.lower) * std::min(std::max(s, eps), 1.0 - 1e-16);
            }
            case CoordinateMap::Kind::Affine:
                return m.shift + m.scale * nu;
        }
        throw ConfigError("unknown coordinate map kind");
    }

    static double log_jacobian1(const CoordinateMap& m, double nu) {
        switch (m.kind) {
            case CoordinateMap::Kind::Identity:
                return 0.0;
            case CoordinateMap::Kind::Log:
                return nu; // d/dnu exp(nu)
            case CoordinateMap::Kind::Logit:
                return std::log(m.upper - m.lower) + detail::log_sigmoid(nu) +
                       detail::log_sigmoid(-nu);
            case CoordinateMap::Kind::Affine:
                return std::log(std::abs(m.scale));
        }
        throw ConfigError("unknown coordinate map kind");
    }

    void check_dim(const Eigen::VectorXd& v) const {
        if (v.size() != dim()) {
            throw ConfigError("transform dimension mismatch: expected " + std::to_string(dim()) +
                              ", got " + std::to_string(v.size()));
        }
    }

    std::vector<CoordinateMap> coords_;
};

// log f(T^{-1}(nu) | X) + log |J(T^{-1}(nu))|: the density of nu when theta
// has log-density logf.
template <typename LogF>
double transformed_log_density(const LogF& logf, const Transform& t, const Eigen::VectorXd& nu) {
    return logf(t.inverse(nu)) + t.log_jacobian_det(nu);
}

} // namespace bisque
