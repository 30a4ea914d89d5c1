#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bisque/error.hpp"
#include "bisque/rules1d.hpp"

namespace bisque {

struct MultiIndex {
    std::vector<int> components; // i_1, ..., i_d, all >= 1

    int norm() const {
        int s = 0;
        for (int c : components) s += c;
        return s;
    }
};

// Signed Smolyak combination coefficient (-1)^(q-|i|) * C(d-1, q-|i|).
inline long long smolyak_coefficient(int q, int d, int norm) {
    if (d < 1 || q < d) throw ConfigError("smolyak_coefficient requires d >= 1 and q >= d");
    if (norm < q - d + 1 || norm > q) {
        throw ConfigError("multi-index norm " + std::to_string(norm) +
                          " outside [" + std::to_string(q - d + 1) + ", " +
                          std::to_string(q) + "]");
    }
    const int k = q - norm; // 0 <= k <= d-1
    long long binom = 1;
    for (int j = 1; j <= k; ++j) binom = binom * (d - 1 - k + j) / j;
    return (k % 2 == 0) ? binom : -binom;
}

struct WeightedIndex {
    MultiIndex index;
    long long coefficient = 1;
};

// A d-dimensional quadrature rule against N(0, I): deduplicated node union
// with aggregated (possibly negative) Smolyak weights.
struct SparseGrid {
    int dim = 1;
    int level = 1; // Smolyak level q; for plain product rules, sum of levels
    RuleFamily family = RuleFamily::GaussHermiteNested;
    std::vector<std::vector<double>> nodes;
    std::vector<double> weights;
    std::vector<WeightedIndex> contributing_indices;

    std::size_t size() const { return nodes.size(); }
};

namespace detail {

constexpr double kNodeMergeTol = 1e-12;
// Only exactly cancelled telescoping weights may be dropped: legitimate
// quadrature weights in the nested family reach 1e-18, far below any
// tolerance that would also catch cancellation residue.
constexpr double kWeightDropTol = 0.0;

inline bool node_less(const std::vector<double>& a, const std::vector<double>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

inline bool node_close(const std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (std::abs(a[j] - b[j]) > kNodeMergeTol) return false;
    }
    return true;
}

// Sort node/weight pairs lexicographically and merge coincident nodes.
inline void merge_nodes(std::vector<std::vector<double>>& nodes, std::vector<double>& weights,
                        bool drop_small) {
    std::vector<std::size_t> order(nodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return node_less(nodes[a], nodes[b]); });
    std::vector<std::vector<double>> out_nodes;
    std::vector<double> out_weights;
    out_nodes.reserve(nodes.size());
    for (std::size_t i : order) {
        if (!out_nodes.empty() && node_close(out_nodes.back(), nodes[i])) {
            out_weights.back() += weights[i];
        } else {
            out_nodes.push_back(nodes[i]);
            out_weights.push_back(weights[i]);
        }
    }
    if (drop_small) {
        std::size_t k = 0;
        for (std::size_t i = 0; i < out_nodes.size(); ++i) {
            if (std::abs(out_weights[i]) <= kWeightDropTol) continue;
            if (k != i) {
                out_nodes[k] = std::move(out_nodes[i]);
                out_weights[k] = out_weights[i];
            }
            ++k;
        }
        out_nodes.resize(k);
        out_weights.resize(k);
    }
    nodes = std::move(out_nodes);
    weights = std::move(out_weights);
}

// Append the Cartesian product of `rules` with weights scaled by `coeff`.
inline void append_product(const std::vector<Rule1D>& rules, double coeff,
                           std::vector<std::vector<double>>& nodes,
                           std::vector<double>& weights) {
    const std::size_t d = rules.size();
    std::vector<std::size_t> idx(d, 0);
    while (true) {
        std::vector<double> node(d);
        double w = coeff;
        for (std::size_t j = 0; j < d; ++j) {
            node[j] = rules[j].nodes[idx[j]];
            w *= rules[j].weights[idx[j]];
        }
        nodes.push_back(std::move(node));
        weights.push_back(w);
        std::size_t j = 0;
        for (; j < d; ++j) {
            if (++idx[j] < rules[j].size()) break;
            idx[j] = 0;
        }
        if (j == d) break;
    }
}

// All multi-indices with components >= 1 and lo <= |i| <= hi, lexicographic.
inline std::vector<MultiIndex> enumerate_indices(int d, int lo, int hi) {
    std::vector<MultiIndex> out;
    std::vector<int> cur(static_cast<std::size_t>(d), 1);
    std::function<void(int, int)> rec = [&](int pos, int used) {
        if (pos == d) {
            if (used >= lo) out.push_back(MultiIndex{cur});
            return;
        }
        const int remaining = d - pos - 1; // other components contribute >= 1 each
        for (int i = 1; used + i + remaining <= hi; ++i) {
            cur[static_cast<std::size_t>(pos)] = i;
            rec(pos + 1, used + i);
        }
    };
    rec(0, 0);
    return out;
}

} // namespace detail

inline SparseGrid product_rule(const std::vector<Rule1D>& rules) {
    if (rules.empty()) throw ConfigError("product_rule requires at least one rule");
    SparseGrid g;
    g.dim = static_cast<int>(rules.size());
    g.family = rules.front().family;
    g.level = 0;
    MultiIndex mi;
    for (const auto& r : rules) {
        g.level += r.level;
        mi.components.push_back(r.level);
    }
    g.contributing_indices.push_back({mi, 1});
    detail::append_product(rules, 1.0, g.nodes, g.weights);
    return g;
}

inline SparseGrid sparse_grid(int dim, int level, RuleFamily family) {
    if (dim < 1) throw ConfigError("sparse_grid requires dim >= 1");
    if (level < dim) throw ConfigError("sparse_grid requires level >= dim");
    SparseGrid g;
    g.dim = dim;
    g.level = level;
    g.family = family;

    std::vector<Rule1D> rule_cache; // rule_cache[i-1] = level-i rule
    auto rule_at = [&](int i) -> const Rule1D& {
        while (static_cast<int>(rule_cache.size()) < i) {
            rule_cache.push_back(univariate_rule(family, static_cast<int>(rule_cache.size()) + 1));
        }
        return rule_cache[static_cast<std::size_t>(i - 1)];
    };

    for (const auto& mi : detail::enumerate_indices(dim, level - dim + 1, level)) {
        const long long coeff = smolyak_coefficient(level, dim, mi.norm());
        g.contributing_indices.push_back({mi, coeff});
        std::vector<Rule1D> rules;
        rules.reserve(mi.components.size());
        for (int i : mi.components) rules.push_back(rule_at(i));
        detail::append_product(rules, static_cast<double>(coeff), g.nodes, g.weights);
    }
    detail::merge_nodes(g.nodes, g.weights, /*drop_small=*/true);
    return g;
}

// Weighted sum over grid nodes; approximates E[f(Z)], Z ~ N(0, I).
template <typename F>
double integrate(const SparseGrid& grid, F&& f) {
    double sum = 0.0;
    for (std::size_t l = 0; l < grid.size(); ++l) {
        const double v = f(grid.nodes[l]);
        if (!std::isfinite(v)) {
            std::ostringstream os;
            os << "integrand non-finite at node " << l << " (";
            for (std::size_t j = 0; j < grid.nodes[l].size(); ++j) {
                os << (j ? ", " : "") << grid.nodes[l][j];
            }
            os << ")";
            throw NumericalError(os.str());
        }
        sum += v * grid.weights[l];
    }
    return sum;
}

struct RefineResult {
    SparseGrid grid;                        // level q+1
    std::vector<std::size_t> new_nodes;     // indices into grid.nodes absent at level q
};

// Escalate a nested-family grid one level, reporting which nodes are new so
// callers can reuse prior evaluations.
inline RefineResult refine(const SparseGrid& grid) {
    if (grid.family != RuleFamily::GaussHermiteNested) {
        throw ConfigError("refine requires a nested rule family");
    }
    RefineResult res;
    res.grid = sparse_grid(grid.dim, grid.level + 1, grid.family);
    for (std::size_t l = 0; l < res.grid.size(); ++l) {
        bool found = false;
        for (const auto& old : grid.nodes) {
            if (detail::node_close(old, res.grid.nodes[l])) {
                found = true;
                break;
            }
        }
        if (!found) res.new_nodes.push_back(l);
    }
    return res;
}

inline void write_grid_csv(const SparseGrid& grid, std::ostream& os) {
    os << "dim,level";
    for (int j = 1; j <= grid.dim; ++j) os << ",node_" << j;
    os << ",weight\n";
    os << std::setprecision(17);
    for (std::size_t l = 0; l < grid.size(); ++l) {
        os << grid.dim << ',' << grid.level;
        for (double x : grid.nodes[l]) os << ',' << x;
        os << ',' << grid.weights[l] << '\n';
    }
}

} // namespace bisque
