#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bisque/error.hpp"
#include "bisque/gaussian_weight.hpp"
#include "bisque/sparse_grid.hpp"
#include "bisque/transform.hpp"
#include "bisque/util.hpp"

namespace bisque {

// Inner factorization f(theta1, theta2, X) = g1(theta1, theta2) g2(theta2)
// for models whose marginal f(theta2 | X) lacks a closed form.
struct Factorization {
    int inner_dim = 1;
    std::function<double(const Eigen::VectorXd& theta1, const Eigen::VectorXd& theta2)> log_g1;
    std::function<double(const Eigen::VectorXd& theta2)> log_g2;
    Eigen::VectorXd inner_init;
    int inner_level = 8; // classical rule level; 2*8-1 = 15 nodes per inner dimension
};

// Evaluator bundle for one BISQuE conditioning split.  Exactly one of the
// direct log-marginal and the g1/g2 factorization may be active.
struct HierarchicalModel {
    int dim_theta2 = 1;
    Transform transform;
    // log f(nu | X) up to a constant, transform-corrected (nu-space)
    std::function<double(const Eigen::VectorXd& nu)> log_marginal_nu;
    std::optional<Factorization> factorization;
};

inline double nested_log_constant(const HierarchicalModel& model, const Eigen::VectorXd& theta2,
                                  int inner_level);

// log f(nu|X) for either route; factored models get the transform correction here.
inline double model_log_marginal_nu(const HierarchicalModel& model, const Eigen::VectorXd& nu) {
    const bool direct = static_cast<bool>(model.log_marginal_nu);
    const bool factored = model.factorization.has_value();
    if (direct == factored) {
        throw ConfigError("exactly one of {direct log-marginal, g1/g2 factorization} must be active");
    }
    if (direct) return model.log_marginal_nu(nu);
    const Eigen::VectorXd theta2 = model.transform.inverse(nu);
    return model.factorization->log_g2(theta2) +
           nested_log_constant(model, theta2, model.factorization->inner_level) +
           model.transform.log_jacobian_det(nu);
}

// The BISQuE weighted mixture: back-transformed nodes with raw and
// standardized weight-ratio weights.  Raw weights carry a common factor
// exp(log_scale) removed for representability.
struct MixtureApprox {
    int level = 0;
    std::vector<Eigen::VectorXd> nodes_nu;
    std::vector<Eigen::VectorXd> nodes_theta2;
    std::vector<double> raw_weights;
    std::vector<double> std_weights;
    double log_scale = 0.0;
    GaussianWeight weight_fn;

    // spread of log f/w across nodes, an importance diagnostic
    double ratio_spread = 0.0;

    std::size_t size() const { return nodes_nu.size(); }
};

// Memoizing, call-counting wrapper for expensive log-marginal evaluators.
// Keys are bit-exact node coordinates, which nested refinement reproduces.
class CachingEvaluator {
public:
    explicit CachingEvaluator(std::function<double(const Eigen::VectorXd&)> fn)
        : fn_(std::move(fn)) {}

    double operator()(const Eigen::VectorXd& x) const {
        std::vector<double> key(x.data(), x.data() + x.size());
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        const double v = fn_(x);
        std::lock_guard<std::mutex> lock(mu_);
        ++calls_;
        cache_.emplace(std::move(key), v);
        return v;
    }

    long long calls() const {
        std::lock_guard<std::mutex> lock(mu_);
        return calls_;
    }

private:
    std::function<double(const Eigen::VectorXd&)> fn_;
    mutable std::map<std::vector<double>, double> cache_;
    mutable long long calls_ = 0;
    mutable std::mutex mu_;
};

namespace detail {

struct SignedLog {
    int sign = 0;       // -1, 0, +1
    double log_mag = -std::numeric_limits<double>::infinity();
};

} // namespace detail

// Raw mixture weights f(nu|X)/w(nu,X) * quadrature weight, carried as
// (sign, log-magnitude) pairs and standardized to sum to one.
inline MixtureApprox bisque_weights(const HierarchicalModel& model, const GaussianWeight& gw,
                                    int level,
                                    RuleFamily family = RuleFamily::GaussHermiteNested,
                                    unsigned threads = 1,
                                    const CachingEvaluator* cached_log_marginal = nullptr) {
    const int p = model.dim_theta2;
    if (level < p) throw ConfigError("bisque_weights requires level >= dim_theta2");
    const SparseGrid grid = sparse_grid(p, level, family);
    const auto mapped = map_nodes(gw, grid);

    MixtureApprox mix;
    mix.level = level;
    mix.weight_fn = gw;
    mix.nodes_nu.resize(mapped.size());
    mix.nodes_theta2.resize(mapped.size());
    std::vector<detail::SignedLog> raw(mapped.size());
    std::vector<double> log_ratios(mapped.size());

    parallel_for(mapped.size(), threads, [&](std::size_t l) {
        const Eigen::VectorXd& nu = mapped[l].nu;
        const double lf = cached_log_marginal ? (*cached_log_marginal)(nu)
                                              : model_log_marginal_nu(model, nu);
        if (std::isnan(lf) || lf == std::numeric_limits<double>::infinity()) {
            std::ostringstream os;
            os << "log-marginal not finite at node " << l << " (" << nu.transpose() << ")";
            throw NumericalError(os.str());
        }
        const double log_ratio = lf - gw.log_density(nu);
        log_ratios[l] = log_ratio;
        const double w = mapped[l].weight;
        detail::SignedLog sl;
        if (w != 0.0 && std::isfinite(log_ratio)) {
            sl.sign = w > 0.0 ? 1 : -1;
            sl.log_mag = log_ratio + std::log(std::abs(w));
        }
        raw[l] = sl;
        mix.nodes_nu[l] = nu;
        mix.nodes_theta2[l] = model.transform.inverse(nu);
    });

    double max_log = -std::numeric_limits<double>::infinity();
    for (const auto& sl : raw) {
        if (sl.sign != 0) max_log = std::max(max_log, sl.log_mag);
    }
    if (!std::isfinite(max_log)) {
        throw NumericalError("degenerate mixture: all raw weights vanish");
    }
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double r : log_ratios) {
        if (!std::isfinite(r)) continue;
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    mix.ratio_spread = hi - lo;
    mix.log_scale = max_log;
    mix.raw_weights.resize(raw.size());
    for (std::size_t l = 0; l < raw.size(); ++l) {
        mix.raw_weights[l] = raw[l].sign == 0 ? 0.0 : raw[l].sign * std::exp(raw[l].log_mag - max_log);
    }
    const double total = kahan_sum(mix.raw_weights);
    if (!(total > 0.0)) {
        throw NumericalError("degenerate mixture: raw weights sum to a non-positive value (" +
                             std::to_string(total) + "); the weight function is grossly mismatched");
    }
    mix.std_weights.resize(raw.size());
    for (std::size_t l = 0; l < raw.size(); ++l) mix.std_weights[l] = mix.raw_weights[l] / total;
    // second normalization pass pins the sum to one
    const double resid = kahan_sum(mix.std_weights);
    for (double& w : mix.std_weights) w /= resid;
    return mix;
}

struct DensityCurve {
    std::vector<double> points;
    std::vector<double> values;
    int clipped = 0; // count of negative mixture values clipped to zero
};

// h(theta1; X) with h = f(theta1 | theta2, X): a weighted mixture of
// conditional densities over the eval grid.
inline DensityCurve marginal_density(
    const MixtureApprox& mix,
    const std::function<double(double theta1, const Eigen::VectorXd& theta2)>& cond_density,
    const std::vector<double>& eval_points) {
    DensityCurve curve;
    curve.points = eval_points;
    curve.values.resize(eval_points.size(), 0.0);
    for (std::size_t i = 0; i < eval_points.size(); ++i) {
        double s = 0.0;
        for (std::size_t l = 0; l < mix.size(); ++l) {
            const double d = cond_density(eval_points[i], mix.nodes_theta2[l]);
            if (!std::isfinite(d)) {
                throw NumericalError("conditional density non-finite at eval point " +
                                     std::to_string(eval_points[i]));
            }
            s += d * mix.std_weights[l];
        }
        if (s < 0.0) {
            s = 0.0;
            ++curve.clipped;
        }
        curve.values[i] = s;
    }
    return curve;
}

inline double posterior_expectation(
    const MixtureApprox& mix,
    const std::function<double(const Eigen::VectorXd& theta2)>& cond_mean) {
    double s = 0.0;
    for (std::size_t l = 0; l < mix.size(); ++l) {
        const double m = cond_mean(mix.nodes_theta2[l]);
        if (!std::isfinite(m)) {
            throw NumericalError("conditional mean non-finite at node " + std::to_string(l));
        }
        s += m * mix.std_weights[l];
    }
    return s;
}

// Law-of-total-variance mixture; marg_mean must be the previously computed
// posterior_expectation.  May be negative with signed weights; never clipped.
inline double posterior_variance(
    const MixtureApprox& mix,
    const std::function<double(const Eigen::VectorXd& theta2)>& cond_mean,
    const std::function<double(const Eigen::VectorXd& theta2)>& cond_var, double marg_mean) {
    double s = 0.0;
    for (std::size_t l = 0; l < mix.size(); ++l) {
        const double m = cond_mean(mix.nodes_theta2[l]);
        const double v = cond_var(mix.nodes_theta2[l]);
        if (!std::isfinite(m) || !std::isfinite(v)) {
            throw NumericalError("conditional moment non-finite at node " + std::to_string(l));
        }
        const double dm = m - marg_mean;
        s += (v + dm * dm) * mix.std_weights[l];
    }
    return s;
}

inline double interval_probability(
    const MixtureApprox& mix,
    const std::function<double(double bound, const Eigen::VectorXd& theta2)>& cond_cdf,
    double lower, double upper) {
    if (!(lower < upper)) throw ConfigError("interval_probability requires lower < upper");
    double s = 0.0;
    for (std::size_t l = 0; l < mix.size(); ++l) {
        const double hi = upper == std::numeric_limits<double>::infinity()
                              ? 1.0
                              : cond_cdf(upper, mix.nodes_theta2[l]);
        const double lo = lower == -std::numeric_limits<double>::infinity()
                              ? 0.0
                              : cond_cdf(lower, mix.nodes_theta2[l]);
        s += (hi - lo) * mix.std_weights[l];
    }
    return s;
}

// log C1(theta2) = log int g1(theta1, theta2) dtheta1 via a Laplace-style
// recentering and a classical Gauss-Hermite product rule.
inline double nested_log_constant(const HierarchicalModel& model, const Eigen::VectorXd& theta2,
                                  int inner_level) {
    if (!model.factorization) throw ConfigError("nested integration requires a factorization");
    const auto& fac = *model.factorization;
    if (fac.inner_dim > 3) {
        throw ConfigError("nested integration supports inner dimension <= 3");
    }
    LogDensity inner = [&](const Eigen::VectorXd& t1) { return fac.log_g1(t1, theta2); };
    const GaussianWeight inner_gw = build_weight(inner, fac.inner_init);

    std::vector<Rule1D> rules(static_cast<std::size_t>(fac.inner_dim),
                              univariate_rule(RuleFamily::GaussHermiteClassical, inner_level));
    const SparseGrid grid = product_rule(rules);
    const auto mapped = map_nodes(inner_gw, grid);
    std::vector<double> terms(mapped.size());
    for (std::size_t l = 0; l < mapped.size(); ++l) {
        const double lg = fac.log_g1(mapped[l].nu, theta2);
        if (std::isnan(lg)) {
            throw NumericalError("inner integrand not finite during nested integration");
        }
        terms[l] = lg - inner_gw.log_density(mapped[l].nu) + std::log(mapped[l].weight);
    }
    return logsumexp(terms);
}

inline double nested_constant(const HierarchicalModel& model, const Eigen::VectorXd& theta2,
                              int inner_level) {
    return std::exp(nested_log_constant(model, theta2, inner_level));
}

// log f(theta2 | X) + log f(X) = log g2 + log C1 (theta2-space, no Jacobian)
inline double factored_log_marginal(const HierarchicalModel& model, const Eigen::VectorXd& theta2) {
    if (!model.factorization) throw ConfigError("factored_log_marginal requires a factorization");
    return model.factorization->log_g2(theta2) +
           nested_log_constant(model, theta2, model.factorization->inner_level);
}

// f(theta1 | theta2, X) = g1 / C1
inline double factored_conditional(const HierarchicalModel& model, const Eigen::VectorXd& theta1,
                                   const Eigen::VectorXd& theta2) {
    if (!model.factorization) throw ConfigError("factored_conditional requires a factorization");
    const double log_c1 =
        nested_log_constant(model, theta2, model.factorization->inner_level);
    if (!std::isfinite(log_c1)) {
        throw NumericalError("nested constant is not finite or not positive");
    }
    return std::exp(model.factorization->log_g1(theta1, theta2) - log_c1);
}

enum class WeightStrategy {
    PerPoint, // rebuild the Gaussian weight at every theta1 evaluation point
    Shared,   // build one weight at the first point and reuse it
};

// Direct sparse marginalization: for each theta1 point, integrate the joint
// over the remaining coordinates against a Gaussian weight.  The returned
// curve is normalized to unit mass over the eval grid.
inline DensityCurve direct_marginal(
    const std::function<double(double theta1, const Eigen::VectorXd& nu2)>& joint_log_density,
    WeightStrategy strategy, int dim2, int level, RuleFamily family,
    const std::vector<double>& eval_points, const Eigen::VectorXd& weight_init) {
    if (eval_points.size() < 2) throw ConfigError("direct_marginal needs at least two eval points");
    const SparseGrid grid = sparse_grid(dim2, level, family);

    DensityCurve curve;
    curve.points = eval_points;
    curve.values.resize(eval_points.size());

    std::optional<GaussianWeight> shared;
    std::vector<double> log_vals(eval_points.size());
    for (std::size_t i = 0; i < eval_points.size(); ++i) {
        const double t = eval_points[i];
        LogDensity slice = [&](const Eigen::VectorXd& nu2) { return joint_log_density(t, nu2); };
        const GaussianWeight* gw = nullptr;
        GaussianWeight local;
        if (strategy == WeightStrategy::PerPoint) {
            local = build_weight(slice, weight_init);
            gw = &local;
        } else {
            if (!shared) shared = build_weight(slice, weight_init);
            gw = &*shared;
        }
        const auto mapped = map_nodes(*gw, grid);
        // signed accumulation at a common scale
        double max_log = -std::numeric_limits<double>::infinity();
        std::vector<double> lr(mapped.size());
        for (std::size_t l = 0; l < mapped.size(); ++l) {
            lr[l] = slice(mapped[l].nu) - gw->log_density(mapped[l].nu);
            if (std::isnan(lr[l])) throw NumericalError("joint log-density NaN in direct_marginal");
            if (mapped[l].weight != 0.0 && std::isfinite(lr[l])) {
                max_log = std::max(max_log, lr[l] + std::log(std::abs(mapped[l].weight)));
            }
        }
        double s = 0.0;
        if (std::isfinite(max_log)) {
            for (std::size_t l = 0; l < mapped.size(); ++l) {
                if (mapped[l].weight == 0.0 || !std::isfinite(lr[l])) continue;
                s += (mapped[l].weight > 0 ? 1.0 : -1.0) *
                     std::exp(lr[l] + std::log(std::abs(mapped[l].weight)) - max_log);
            }
        }
        log_vals[i] = std::isfinite(max_log) && s > 0.0
                          ? max_log + std::log(s)
                          : -std::numeric_limits<double>::infinity();
        if (s < 0.0) ++curve.clipped;
    }
    // normalize to unit trapezoid mass over the eval grid
    double max_lv = -std::numeric_limits<double>::infinity();
    for (double lv : log_vals) max_lv = std::max(max_lv, lv);
    if (!std::isfinite(max_lv)) throw NumericalError("direct_marginal: density vanished everywhere");
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < eval_points.size(); ++i) {
        const double a = std::exp(log_vals[i] - max_lv);
        const double b = std::exp(log_vals[i + 1] - max_lv);
        mass += 0.5 * (a + b) * (eval_points[i + 1] - eval_points[i]);
    }
    for (std::size_t i = 0; i < eval_points.size(); ++i) {
        curve.values[i] = std::exp(log_vals[i] - max_lv) / mass;
    }
    return curve;
}

struct ConvergeResult {
    std::vector<double> values; // final quantity (scalar or curve)
    int level = 0;
    bool converged = false;
    std::vector<double> changes; // per-escalation change metric
    long long eval_count = 0;    // total evaluator calls when a counter is supplied
};

// Escalate the quadrature level until consecutive results agree.  Scalars use
// a mixed absolute/relative tolerance; curves use the sup-norm.
inline ConvergeResult converge(const std::function<std::vector<double>(int level)>& job,
                               int q_start, int q_max, double tol,
                               const std::function<long long()>& call_counter = {}) {
    if (q_max < q_start) throw ConfigError("converge requires q_max >= q_start");
    ConvergeResult res;
    std::vector<double> prev = job(q_start);
    res.level = q_start;
    for (int q = q_start + 1; q <= q_max; ++q) {
        std::vector<double> cur = job(q);
        if (cur.size() != prev.size()) throw ConfigError("converge: result size changed with level");
        double change = 0.0;
        for (std::size_t i = 0; i < cur.size(); ++i) {
            change = std::max(change, std::abs(cur[i] - prev[i]));
        }
        // mixed absolute/relative tolerance for scalars, sup-norm for curves
        const double threshold = cur.size() == 1 ? tol * (1.0 + std::abs(cur[0])) : tol;
        res.changes.push_back(change);
        prev = std::move(cur);
        res.level = q;
        if (change < threshold) {
            res.converged = true;
            break;
        }
    }
    res.values = std::move(prev);
    if (call_counter) res.eval_count = call_counter();
    return res;
}

} // namespace bisque
