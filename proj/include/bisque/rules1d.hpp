#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bisque/error.hpp"
#include "bisque/genz_keister_table.hpp"

namespace bisque {

enum class RuleFamily {
    GaussHermiteNested,    // tabulated Genz-Keister sequence, 1/3/9/19/35 nodes
    GaussHermiteClassical, // Golub-Welsch, k = 2*level - 1 nodes, any level
};

inline std::string family_name(RuleFamily f) {
    return f == RuleFamily::GaussHermiteNested ? "gauss-hermite-nested"
                                               : "gauss-hermite-classical";
}

inline RuleFamily family_from_name(const std::string& s) {
    if (s == "gauss-hermite-nested") return RuleFamily::GaussHermiteNested;
    if (s == "gauss-hermite-classical") return RuleFamily::GaussHermiteClassical;
    throw ConfigError("unsupported rule family: " + s);
}

// A univariate quadrature rule against the standard normal density.
// Weights sum to one; nodes are strictly increasing and symmetric about 0.
struct Rule1D {
    int level = 1;
    RuleFamily family = RuleFamily::GaussHermiteNested;
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

inline int max_nested_level() {
    return static_cast<int>(detail::kGenzKeisterLevels);
}

namespace detail {

inline Rule1D nested_rule(int level) {
    if (level > max_nested_level()) {
        throw ConfigError("nested Gauss-Hermite table exhausted: level " +
                          std::to_string(level) + " requested, maximum is " +
                          std::to_string(max_nested_level()));
    }
    Rule1D r;
    r.level = level;
    r.family = RuleFamily::GaussHermiteNested;
    auto assign = [&r](const auto& nodes, const auto& weights) {
        r.nodes.assign(nodes.begin(), nodes.end());
        r.weights.assign(weights.begin(), weights.end());
    };
    switch (level) {
        case 1: assign(kGenzKeisterNodes1, kGenzKeisterWeights1); break;
        case 2: assign(kGenzKeisterNodes2, kGenzKeisterWeights2); break;
        case 3: assign(kGenzKeisterNodes3, kGenzKeisterWeights3); break;
        case 4: assign(kGenzKeisterNodes4, kGenzKeisterWeights4); break;
        case 5: assign(kGenzKeisterNodes5, kGenzKeisterWeights5); break;
        default: throw ConfigError("invalid nested level");
    }
    return r;
}

// Golub-Welsch on the probabilists' Hermite recurrence: the Jacobi matrix has
// zero diagonal and off-diagonal sqrt(n), eigenvalues are the nodes and the
// squared first eigenvector components are the weights (mu0 = 1).
inline Rule1D classical_rule(int level) {
    const int k = 2 * level - 1;
    Rule1D r;
    r.level = level;
    r.family = RuleFamily::GaussHermiteClassical;
    if (k == 1) {
        r.nodes = {0.0};
        r.weights = {1.0};
        return r;
    }
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(k, k);
    for (int n = 1; n < k; ++n) {
        jacobi(n, n - 1) = jacobi(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    if (es.info() != Eigen::Success) {
        throw NumericalError("Golub-Welsch eigendecomposition failed at level " +
                             std::to_string(level));
    }
    std::vector<std::pair<double, double>> nw(k);
    for (int j = 0; j < k; ++j) {
        const double v0 = es.eigenvectors()(0, j);
        nw[j] = {es.eigenvalues()(j), v0 * v0};
    }
    std::sort(nw.begin(), nw.end());
    // k is odd; force exact symmetry by mirroring the positive half
    const int half = k / 2;
    r.nodes.resize(k);
    r.weights.resize(k);
    r.nodes[half] = 0.0;
    r.weights[half] = nw[half].second;
    for (int j = 0; j < half; ++j) {
        const double x = 0.5 * (nw[k - 1 - j].first - nw[j].first);
        const double w = 0.5 * (nw[k - 1 - j].second + nw[j].second);
        r.nodes[j] = -x;
        r.nodes[k - 1 - j] = x;
        r.weights[j] = r.weights[k - 1 - j] = w;
    }
    double sum = 0.0;
    for (double w : r.weights) sum += w;
    for (double& w : r.weights) w /= sum;
    return r;
}

} // namespace detail

// Node count of the rule at a given level without building it.
inline std::size_t rule_size(RuleFamily family, int level) {
    if (level < 1) throw ConfigError("rule level must be >= 1");
    if (family == RuleFamily::GaussHermiteNested) {
        if (level > max_nested_level()) {
            throw ConfigError("nested Gauss-Hermite table exhausted: level " +
                              std::to_string(level) + " requested, maximum is " +
                              std::to_string(max_nested_level()));
        }
        return detail::kGenzKeisterCounts[static_cast<std::size_t>(level - 1)];
    }
    return static_cast<std::size_t>(2 * level - 1);
}

inline Rule1D univariate_rule(RuleFamily family, int level) {
    if (level < 1) throw ConfigError("rule level must be >= 1");
    return family == RuleFamily::GaussHermiteNested ? detail::nested_rule(level)
                                                    : detail::classical_rule(level);
}

// Maximum exactly-integrated polynomial degree of the univariate rule.
inline int rule_degree(RuleFamily family, int level) {
    if (family == RuleFamily::GaussHermiteNested) {
        if (level < 1 || level > max_nested_level()) throw ConfigError("invalid nested level");
        return detail::kGenzKeisterDegrees[static_cast<std::size_t>(level - 1)];
    }
    return 2 * (2 * level - 1) - 1;
}

} // namespace bisque
