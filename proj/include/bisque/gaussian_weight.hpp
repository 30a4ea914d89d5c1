#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bisque/error.hpp"
#include "bisque/sparse_grid.hpp"

namespace bisque {

using LogDensity = std::function<double(const Eigen::VectorXd&)>;

struct ModeOptions {
    int max_iterations = 2000;
    double f_tol = 1e-8;          // simplex stopping tolerance on log-density change
    double gradient_tol = 1e-6;   // scaled gradient norm target
};

namespace detail {

inline double fd_step(double coordinate) { return 1e-4 * (1.0 + std::abs(coordinate)); }

inline double checked_eval(const LogDensity& f, const Eigen::VectorXd& x) {
    const double v = f(x);
    if (std::isnan(v)) {
        std::ostringstream os;
        os << "log-density evaluated to NaN at (" << x.transpose() << ")";
        throw NumericalError(os.str());
    }
    return v;
}

inline Eigen::VectorXd gradient_fd(const LogDensity& f, const Eigen::VectorXd& x) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd xp = x, xm = x;
    for (int j = 0; j < x.size(); ++j) {
        const double h = fd_step(x[j]);
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        g[j] = (checked_eval(f, xp) - checked_eval(f, xm)) / (2.0 * h);
        xp[j] = xm[j] = x[j];
    }
    return g;
}

// Nelder-Mead on the negated log-density.
inline Eigen::VectorXd simplex_search(const LogDensity& f, const Eigen::VectorXd& init,
                                      const ModeOptions& opt) {
    const int n = static_cast<int>(init.size());
    std::vector<Eigen::VectorXd> pts;
    std::vector<double> vals;
    pts.push_back(init);
    vals.push_back(-checked_eval(f, init));
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd p = init;
        p[j] += 0.1 * (1.0 + std::abs(init[j]));
        pts.push_back(p);
        vals.push_back(-checked_eval(f, p));
    }
    auto order = [&]() {
        std::vector<int> idx(pts.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return vals[a] < vals[b]; });
        std::vector<Eigen::VectorXd> p2;
        std::vector<double> v2;
        for (int i : idx) {
            p2.push_back(pts[i]);
            v2.push_back(vals[i]);
        }
        pts = std::move(p2);
        vals = std::move(v2);
    };
    order();
    for (int it = 0; it < opt.max_iterations; ++it) {
        if (std::abs(vals.back() - vals.front()) < opt.f_tol * (1.0 + std::abs(vals.front()))) break;
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < n; ++i) centroid += pts[i];
        centroid /= n;
        const Eigen::VectorXd worst = pts.back();
        Eigen::VectorXd refl = centroid + (centroid - worst);
        double frefl = -checked_eval(f, refl);
        if (frefl < vals.front()) {
            Eigen::VectorXd exp_pt = centroid + 2.0 * (centroid - worst);
            double fexp = -checked_eval(f, exp_pt);
            if (fexp < frefl) {
                pts.back() = exp_pt;
                vals.back() = fexp;
            } else {
                pts.back() = refl;
                vals.back() = frefl;
            }
        } else if (frefl < vals[vals.size() - 2]) {
            pts.back() = refl;
            vals.back() = frefl;
        } else {
            Eigen::VectorXd contr = centroid + 0.5 * (worst - centroid);
            double fcontr = -checked_eval(f, contr);
            if (fcontr < vals.back()) {
                pts.back() = contr;
                vals.back() = fcontr;
            } else {
                for (std::size_t i = 1; i < pts.size(); ++i) {
                    pts[i] = pts.front() + 0.5 * (pts[i] - pts.front());
                    vals[i] = -checked_eval(f, pts[i]);
                }
            }
        }
        order();
    }
    return pts.front();
}

} // namespace detail

// Central-difference Hessian, symmetrized.
inline Eigen::MatrixXd hessian_fd(const LogDensity& f, const Eigen::VectorXd& point) {
    const int n = static_cast<int>(point.size());
    Eigen::MatrixXd h_mat(n, n);
    const double f0 = detail::checked_eval(f, point);
    Eigen::VectorXd x = point;
    for (int i = 0; i < n; ++i) {
        const double hi = detail::fd_step(point[i]);
        x[i] = point[i] + hi;
        const double fp = detail::checked_eval(f, x);
        x[i] = point[i] - hi;
        const double fm = detail::checked_eval(f, x);
        x[i] = point[i];
        h_mat(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
        for (int j = i + 1; j < n; ++j) {
            const double hj = detail::fd_step(point[j]);
            x[i] = point[i] + hi;
            x[j] = point[j] + hj;
            const double fpp = detail::checked_eval(f, x);
            x[j] = point[j] - hj;
            const double fpm = detail::checked_eval(f, x);
            x[i] = point[i] - hi;
            const double fmm = detail::checked_eval(f, x);
            x[j] = point[j] + hj;
            const double fmp = detail::checked_eval(f, x);
            x[i] = point[i];
            x[j] = point[j];
            h_mat(i, j) = h_mat(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
        }
    }
    return 0.5 * (h_mat + h_mat.transpose());
}

// Derivative-free simplex search followed by a Newton polish on
// finite-difference derivatives.  Deterministic given init.
inline Eigen::VectorXd find_mode(const LogDensity& log_density, const Eigen::VectorXd& init,
                                 const ModeOptions& opt = {}) {
    if (!std::isfinite(detail::checked_eval(log_density, init))) {
        std::ostringstream os;
        os << "log-density not finite at initial point (" << init.transpose() << ")";
        throw NumericalError(os.str());
    }
    Eigen::VectorXd x = detail::simplex_search(log_density, init, opt);

    double best_norm = 1e300;
    Eigen::VectorXd best = x;
    for (int it = 0; it < 60; ++it) {
        const Eigen::VectorXd g = detail::gradient_fd(log_density, x);
        const double scaled = g.norm() / (1.0 + x.norm());
        if (scaled < best_norm) {
            best_norm = scaled;
            best = x;
        }
        if (scaled < opt.gradient_tol) return x;
        Eigen::MatrixXd h_mat = hessian_fd(log_density, x);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(-h_mat);
        Eigen::VectorXd step;
        if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
            step = ldlt.solve(g);
        } else {
            step = g; // fall back to steepest ascent
        }
        // backtracking on the log-density
        const double f0 = detail::checked_eval(log_density, x);
        double alpha = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 40; ++ls) {
            Eigen::VectorXd cand = x + alpha * step;
            const double fc = log_density(cand);
            if (std::isfinite(fc) && fc > f0) {
                x = cand;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!moved) break;
    }
    // The FD gradient carries noise proportional to the log-density magnitude,
    // so the fallback acceptance threshold scales with |f| at the best point;
    // the hard cap keeps divergent searches (|f| unbounded) failing.
    const double f_best = detail::checked_eval(log_density, best);
    const double fallback_tol =
        std::min(opt.gradient_tol * (1.0 + std::abs(f_best)), 1000.0 * opt.gradient_tol);
    if (best_norm < fallback_tol) return best;
    std::ostringstream os;
    os << "mode search did not converge: best scaled gradient norm " << best_norm << " at ("
       << best.transpose() << ")";
    throw NumericalError(os.str());
}

// Gaussian approximation to a transformed posterior at its mode:
// w(nu) = N(mode, L L^T).
struct GaussianWeight {
    Eigen::VectorXd mode;
    Eigen::MatrixXd cov_factor;  // lower triangular, L L^T = covariance
    double log_norm_const = 0.0; // log density at the mode

    int dim() const { return static_cast<int>(mode.size()); }

    double log_density(const Eigen::VectorXd& nu) const {
        const Eigen::VectorXd z =
            cov_factor.triangularView<Eigen::Lower>().solve(nu - mode);
        return log_norm_const - 0.5 * z.squaredNorm();
    }
};

inline GaussianWeight build_weight(const LogDensity& log_density, const Eigen::VectorXd& init,
                                   const ModeOptions& opt = {}) {
    GaussianWeight gw;
    gw.mode = find_mode(log_density, init, opt);
    const Eigen::MatrixXd neg_hess = -hessian_fd(log_density, gw.mode);

    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
    bool ok = false;
    for (double eps : {0.0, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2}) {
        Eigen::MatrixXd a = neg_hess;
        a.diagonal().array() += eps;
        llt.compute(a);
        if (llt.info() == Eigen::Success) {
            jitter = eps;
            ok = true;
            break;
        }
    }
    if (!ok) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(neg_hess);
        std::ostringstream os;
        os << "weight construction failed: negative Hessian not positive definite after jitter;"
           << " eigenvalues (" << es.eigenvalues().transpose() << ")";
        throw NumericalError(os.str());
    }
    (void)jitter;
    const int p = gw.dim();
    const Eigen::MatrixXd cov =
        llt.solve(Eigen::MatrixXd::Identity(p, p));
    Eigen::LLT<Eigen::MatrixXd> cov_llt(0.5 * (cov + cov.transpose()));
    if (cov_llt.info() != Eigen::Success) {
        throw NumericalError("weight construction failed: covariance factorization broke down");
    }
    gw.cov_factor = cov_llt.matrixL();
    double logdet_l = 0.0;
    for (int j = 0; j < p; ++j) logdet_l += std::log(gw.cov_factor(j, j));
    gw.log_norm_const = -0.5 * p * std::log(2.0 * M_PI) - logdet_l;
    return gw;
}

struct MappedNode {
    Eigen::VectorXd nu;
    double weight = 0.0;
};

// Affine image of a standard-normal grid: nu = mode + L z.  Weights pass
// through unchanged so the mapped rule integrates against w(nu, X).
inline std::vector<MappedNode> map_nodes(const GaussianWeight& gw, const SparseGrid& grid) {
    if (grid.dim != gw.dim()) {
        throw ConfigError("map_nodes dimension mismatch: grid dim " + std::to_string(grid.dim) +
                          ", weight dim " + std::to_string(gw.dim()));
    }
    std::vector<MappedNode> out(grid.size());
    Eigen::VectorXd z(grid.dim);
    for (std::size_t l = 0; l < grid.size(); ++l) {
        for (int j = 0; j < grid.dim; ++j) z[j] = grid.nodes[l][j];
        out[l].nu = gw.mode + gw.cov_factor * z;
        out[l].weight = grid.weights[l];
    }
    return out;
}

} // namespace bisque
