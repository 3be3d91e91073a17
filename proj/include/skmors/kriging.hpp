#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "skmors/core.hpp"
#include "skmors/rng.hpp"

namespace skmors {

/// Squared-exponential kernel hyperparameters: process variance and one
/// length-scale per input dimension.
struct KernelParams {
    double process_var = 1.0;
    std::vector<double> length_scales;

    bool valid() const {
        if (!(process_var > 0.0) || !std::isfinite(process_var)) return false;
        for (double l : length_scales)
            if (!(l > 0.0) || !std::isfinite(l)) return false;
        return !length_scales.empty();
    }
};

/// Model fitting failed for every hyperparameter candidate; carries the last
/// parameter set whose covariance could not be factorized.
class model_fit_error : public std::runtime_error {
public:
    model_fit_error(const std::string& msg, KernelParams params)
        : std::runtime_error(msg), offending_params(std::move(params)) {}
    KernelParams offending_params;
};

/// Squared-exponential covariance: v^2 * exp(-sum_q ((x_q - y_q)/l_q)^2).
inline double kernel_cov(const std::vector<double>& xi, const std::vector<double>& xh,
                         const KernelParams& p) {
    if (xi.size() != xh.size() || xi.size() != p.length_scales.size())
        throw std::invalid_argument("kernel_cov: dimension mismatch");
    if (!p.valid()) throw std::invalid_argument("kernel_cov: invalid hyperparameters");
    double s = 0.0;
    for (std::size_t q = 0; q < xi.size(); ++q) {
        const double t = (xi[q] - xh[q]) / p.length_scales[q];
        s += t * t;
    }
    return p.process_var * std::exp(-s);
}

/// Diagonal of the intrinsic covariance matrix: s^2_ij / r_i per design.
/// Requires at least two replications everywhere.
inline Eigen::VectorXd intrinsic_cov(const SampleStore& store, std::size_t objective) {
    const std::size_t n = store.n_designs();
    Eigen::VectorXd diag(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (store.count(i) < 2)
            throw std::invalid_argument("intrinsic_cov: design " + std::to_string(i) +
                                        " has fewer than two replications");
        diag[static_cast<Eigen::Index>(i)] =
            store.variance(i, objective) / static_cast<double>(store.count(i));
    }
    return diag;
}

struct FitOptions {
    int restarts = 8;                        // Latin-hypercube starts in log-space
    std::optional<KernelParams> warm_start;  // original units
    double jitter_floor = 1e-12;             // relative to the mean covariance diagonal
    double jitter_cap = 1e-4;
    std::uint64_t seed = 0x5eedULL;
    int max_evals_per_start = 0;             // 0 = automatic
};

namespace detail {

struct NmResult {
    Eigen::VectorXd x;
    double fx = std::numeric_limits<double>::infinity();
};

// Nelder-Mead simplex minimization (reflection/expansion/contraction/shrink).
inline NmResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x0, double step, int max_evals, double ftol) {
    const Eigen::Index dim = x0.size();
    std::vector<Eigen::VectorXd> xs;
    std::vector<double> fs;
    xs.push_back(x0);
    fs.push_back(f(x0));
    int evals = 1;
    for (Eigen::Index i = 0; i < dim; ++i) {
        Eigen::VectorXd xi = x0;
        xi[i] += step;
        xs.push_back(xi);
        fs.push_back(f(xi));
        ++evals;
    }
    auto order = [&]() {
        std::vector<std::size_t> idx(xs.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
        std::vector<Eigen::VectorXd> nxs(xs.size());
        std::vector<double> nfs(xs.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            nxs[i] = xs[idx[i]];
            nfs[i] = fs[idx[i]];
        }
        xs.swap(nxs);
        fs.swap(nfs);
    };
    order();
    while (evals < max_evals) {
        if (std::fabs(fs.back() - fs.front()) <= ftol * (std::fabs(fs.front()) + 1e-12)) break;
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) centroid += xs[i];
        centroid /= static_cast<double>(dim);

        const Eigen::VectorXd xr = centroid + (centroid - xs.back());
        const double fr = f(xr);
        ++evals;
        if (fr < fs.front()) {
            const Eigen::VectorXd xe = centroid + 2.0 * (centroid - xs.back());
            const double fe = f(xe);
            ++evals;
            if (fe < fr) {
                xs.back() = xe;
                fs.back() = fe;
            } else {
                xs.back() = xr;
                fs.back() = fr;
            }
        } else if (fr < fs[xs.size() - 2]) {
            xs.back() = xr;
            fs.back() = fr;
        } else {
            const Eigen::VectorXd xc = centroid + 0.5 * (xs.back() - centroid);
            const double fc = f(xc);
            ++evals;
            if (fc < fs.back()) {
                xs.back() = xc;
                fs.back() = fc;
            } else {
                for (std::size_t i = 1; i < xs.size(); ++i) {
                    xs[i] = xs.front() + 0.5 * (xs[i] - xs.front());
                    fs[i] = f(xs[i]);
                    ++evals;
                }
            }
        }
        order();
    }
    return NmResult{xs.front(), fs.front()};
}

// Data standardized for fitting: inputs to [0,1]^d, outputs centered and scaled
// to unit variance; intrinsic variances carried in output scale.
struct Standardized {
    Eigen::MatrixXd x;        // n x d in [0,1]
    Eigen::VectorXd f;        // scaled sample means
    Eigen::VectorXd noise;    // scaled intrinsic variances s^2/r
    Eigen::VectorXd in_lo, in_range;
    double out_mean = 0.0, out_sd = 1.0;
    std::vector<Eigen::MatrixXd> sqdist; // per-dimension squared input differences
};

inline Standardized standardize(const Eigen::MatrixXd& designs, const SampleStore& store,
                                std::size_t objective) {
    const Eigen::Index n = designs.rows();
    const Eigen::Index d = designs.cols();
    Standardized s;
    s.in_lo = designs.colwise().minCoeff();
    s.in_range = (designs.colwise().maxCoeff() - designs.colwise().minCoeff()).cwiseMax(0.0);
    for (Eigen::Index q = 0; q < d; ++q)
        if (s.in_range[q] <= 0.0) s.in_range[q] = 1.0;
    s.x.resize(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        s.x.row(i) = (designs.row(i) - s.in_lo.transpose()).cwiseQuotient(s.in_range.transpose());

    Eigen::VectorXd f(n);
    for (Eigen::Index i = 0; i < n; ++i) f[i] = store.mean(static_cast<std::size_t>(i), objective);
    s.out_mean = f.mean();
    if (n > 1) {
        const double var = (f.array() - s.out_mean).square().sum() / static_cast<double>(n - 1);
        s.out_sd = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    s.f = (f.array() - s.out_mean) / s.out_sd;

    const Eigen::VectorXd raw_noise = intrinsic_cov(store, objective);
    s.noise = raw_noise / (s.out_sd * s.out_sd);

    s.sqdist.resize(static_cast<std::size_t>(d));
    for (Eigen::Index q = 0; q < d; ++q) {
        Eigen::MatrixXd dq(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index h = 0; h < n; ++h) {
                const double t = s.x(i, q) - s.x(h, q);
                dq(i, h) = t * t;
            }
        s.sqdist[static_cast<std::size_t>(q)] = dq;
    }
    return s;
}

// Hyperparameter search box in standardized space.
struct ParamBox {
    double v2_lo = 1e-6, v2_hi = 1e3;
    double l_lo = 1e-3, l_hi = 1e3;
};

inline Eigen::MatrixXd correlation_matrix(const Standardized& s, const Eigen::VectorXd& ls) {
    const Eigen::Index n = s.x.rows();
    Eigen::MatrixXd expo = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t q = 0; q < s.sqdist.size(); ++q)
        expo -= s.sqdist[q] / (ls[static_cast<Eigen::Index>(q)] * ls[static_cast<Eigen::Index>(q)]);
    return expo.array().exp().matrix();
}

struct Factorized {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
    bool ok = false;
};

// Cholesky with escalating diagonal jitter, relative to the mean diagonal of C.
// A raw factorization is attempted first; jitter starts from the floor only when
// the matrix is numerically indefinite, and grows tenfold up to the cap.
inline Factorized factorize(const Eigen::MatrixXd& cov, double floor_rel, double cap_rel) {
    Factorized out;
    const double scale = cov.diagonal().mean();
    const double cap = cap_rel * scale;
    double jit = 0.0;
    Eigen::MatrixXd c = cov;
    while (true) {
        out.llt.compute(c);
        if (out.llt.info() == Eigen::Success) {
            out.jitter = jit;
            out.ok = true;
            return out;
        }
        const double next = jit > 0.0 ? jit * 10.0 : floor_rel * scale;
        if (next > cap) return out;
        c.diagonal().array() += (next - jit);
        jit = next;
    }
}

struct LikelihoodPieces {
    double nll = std::numeric_limits<double>::infinity();
    double beta0 = 0.0;
    double jitter = 0.0;
};

// Negative log-likelihood with the constant trend profiled out by generalized
// least squares at the given kernel parameters (standardized space).
inline LikelihoodPieces profile_nll(const Standardized& s, double v2, const Eigen::VectorXd& ls,
                                    double floor_rel, double cap_rel) {
    LikelihoodPieces out;
    const Eigen::Index n = s.x.rows();
    Eigen::MatrixXd cov = v2 * correlation_matrix(s, ls);
    cov.diagonal() += s.noise;
    const Factorized fac = factorize(cov, floor_rel, cap_rel);
    if (!fac.ok) return out;
    out.jitter = fac.jitter;

    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd ci_f = fac.llt.solve(s.f);
    const Eigen::VectorXd ci_1 = fac.llt.solve(ones);
    const double denom = ones.dot(ci_1);
    if (!(denom > 0.0) || !std::isfinite(denom)) return out;
    out.beta0 = ones.dot(ci_f) / denom;

    const Eigen::VectorXd resid = s.f - out.beta0 * ones;
    const double quad = resid.dot(fac.llt.solve(resid));
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) logdet += 2.0 * std::log(fac.llt.matrixL()(i, i));
    out.nll = 0.5 * (quad + logdet + static_cast<double>(n) * std::log(2.0 * M_PI));
    if (!std::isfinite(out.nll)) out.nll = std::numeric_limits<double>::infinity();
    return out;
}

} // namespace detail

/// One fitted stochastic-kriging metamodel for a single objective. Immutable once
/// built; predictions separate extrinsic spatial uncertainty from replication noise.
class SKModel {
public:
    struct Prediction {
        double mean = 0.0;
        double variance = 0.0;
    };

    /// Prediction and its variance at an arbitrary point (original units), including
    /// the trend-estimation uncertainty term. Small negative variances from round-off
    /// are clamped to zero.
    Prediction predict(const std::vector<double>& x) const {
        if (x.size() != static_cast<std::size_t>(dim())) throw std::invalid_argument("predict: dimension mismatch");
        detail::require_finite(x, "predict");
        Eigen::VectorXd xs(dim());
        for (Eigen::Index q = 0; q < dim(); ++q)
            xs[q] = (x[static_cast<std::size_t>(q)] - std_.in_lo[q]) / std_.in_range[q];
        Eigen::VectorXd k(n());
        for (Eigen::Index i = 0; i < n(); ++i) {
            double e = 0.0;
            for (Eigen::Index q = 0; q < dim(); ++q) {
                const double t = (xs[q] - std_.x(i, q)) / ls_[q];
                e += t * t;
            }
            k[i] = v2_ * std::exp(-e);
        }
        return finish_prediction(k, v2_);
    }

    /// Predictions and variances at all training points in one pass.
    std::pair<ObjVec, ObjVec> predict_training() const {
        const Eigen::MatrixXd sol = llt_.solve(kernel_);     // C^-1 K
        const Eigen::VectorXd mu = Eigen::VectorXd::Constant(n(), beta0_) + kernel_ * alpha_;
        ObjVec means(static_cast<std::size_t>(n()));
        ObjVec vars(static_cast<std::size_t>(n()));
        for (Eigen::Index i = 0; i < n(); ++i) {
            const double kck = kernel_.col(i).dot(sol.col(i));
            const double gamma = 1.0 - ci1_.dot(kernel_.col(i));
            const double var_s = std::max(0.0, v2_ - kck + gamma * gamma / denom_);
            means[static_cast<std::size_t>(i)] = std_.out_mean + std_.out_sd * mu[i];
            vars[static_cast<std::size_t>(i)] = std_.out_sd * std_.out_sd * var_s;
        }
        return {means, vars};
    }

    /// Fitted trend constant in original output units.
    double beta0() const { return std_.out_mean + std_.out_sd * beta0_; }

    /// Kernel hyperparameters converted back to original input/output units.
    KernelParams kernel_original_units() const {
        KernelParams p;
        p.process_var = v2_ * std_.out_sd * std_.out_sd;
        p.length_scales.resize(static_cast<std::size_t>(dim()));
        for (Eigen::Index q = 0; q < dim(); ++q)
            p.length_scales[static_cast<std::size_t>(q)] = ls_[q] * std_.in_range[q];
        return p;
    }

    double log_likelihood() const { return loglik_; }
    double jitter() const { return jitter_; }
    Eigen::Index n() const { return std_.x.rows(); }
    Eigen::Index dim() const { return std_.x.cols(); }

private:
    friend SKModel make_model(const Eigen::MatrixXd&, const SampleStore&, std::size_t,
                              const KernelParams&, const FitOptions&);

    SKModel::Prediction finish_prediction(const Eigen::VectorXd& k, double prior_var) const {
        const double mean_s = beta0_ + k.dot(alpha_);
        const Eigen::VectorXd sol = llt_.solve(k);
        const double gamma = 1.0 - ci1_.dot(k);
        const double var_s = std::max(0.0, prior_var - k.dot(sol) + gamma * gamma / denom_);
        return Prediction{std_.out_mean + std_.out_sd * mean_s, std_.out_sd * std_.out_sd * var_s};
    }

    detail::Standardized std_;
    double v2_ = 1.0;
    Eigen::VectorXd ls_;       // standardized-space length-scales
    double beta0_ = 0.0;       // standardized-space trend
    Eigen::MatrixXd kernel_;   // extrinsic covariance at training points
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd alpha_;    // C^-1 (f - beta0 1)
    Eigen::VectorXd ci1_;      // C^-1 1
    double denom_ = 1.0;       // 1' C^-1 1
    double jitter_ = 0.0;
    double loglik_ = 0.0;
};

/// Build a model at explicitly given kernel hyperparameters (original units); the
/// trend constant is set to its generalized-least-squares optimum.
inline SKModel make_model(const Eigen::MatrixXd& designs, const SampleStore& store,
                          std::size_t objective, const KernelParams& params,
                          const FitOptions& opts = {}) {
    if (designs.rows() < 1) throw std::invalid_argument("make_model: empty design matrix");
    if (!params.valid() || params.length_scales.size() != static_cast<std::size_t>(designs.cols()))
        throw std::invalid_argument("make_model: invalid kernel parameters");
    SKModel model;
    model.std_ = detail::standardize(designs, store, objective);

    model.v2_ = params.process_var / (model.std_.out_sd * model.std_.out_sd);
    model.ls_.resize(designs.cols());
    for (Eigen::Index q = 0; q < designs.cols(); ++q)
        model.ls_[q] = params.length_scales[static_cast<std::size_t>(q)] / model.std_.in_range[q];

    model.kernel_ = model.v2_ * detail::correlation_matrix(model.std_, model.ls_);
    Eigen::MatrixXd cov = model.kernel_;
    cov.diagonal() += model.std_.noise;
    const detail::Factorized fac = detail::factorize(cov, opts.jitter_floor, opts.jitter_cap);
    if (!fac.ok)
        throw model_fit_error("make_model: covariance not positive definite at maximum jitter", params);
    model.llt_ = fac.llt;
    model.jitter_ = fac.jitter;

    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(designs.rows());
    model.ci1_ = model.llt_.solve(ones);
    model.denom_ = ones.dot(model.ci1_);
    const Eigen::VectorXd ci_f = model.llt_.solve(model.std_.f);
    model.beta0_ = ones.dot(ci_f) / model.denom_;
    model.alpha_ = model.llt_.solve(model.std_.f - model.beta0_ * ones);

    const Eigen::VectorXd resid = model.std_.f - model.beta0_ * ones;
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < designs.rows(); ++i) logdet += 2.0 * std::log(model.llt_.matrixL()(i, i));
    model.loglik_ = -0.5 * (resid.dot(model.llt_.solve(resid)) + logdet +
                            static_cast<double>(designs.rows()) * std::log(2.0 * M_PI));
    return model;
}

/// Profile log-likelihood (trend optimized out) of the data under the given kernel
/// parameters in original units. Shares the standardization path with fit().
inline double profile_log_likelihood(const Eigen::MatrixXd& designs, const SampleStore& store,
                                     std::size_t objective, const KernelParams& params,
                                     const FitOptions& opts = {}) {
    const detail::Standardized s = detail::standardize(designs, store, objective);
    const double v2 = params.process_var / (s.out_sd * s.out_sd);
    Eigen::VectorXd ls(designs.cols());
    for (Eigen::Index q = 0; q < designs.cols(); ++q)
        ls[q] = params.length_scales[static_cast<std::size_t>(q)] / s.in_range[q];
    const detail::LikelihoodPieces p = detail::profile_nll(s, v2, ls, opts.jitter_floor, opts.jitter_cap);
    return -p.nll;
}

/// Fit a stochastic-kriging model by maximum likelihood: multi-start Nelder-Mead
/// over log hyperparameters (Latin-hypercube starts across the search box, plus an
/// optional warm start), with the trend constant profiled out.
inline SKModel fit(const Eigen::MatrixXd& designs, const SampleStore& store, std::size_t objective,
                   const FitOptions& opts = {}) {
    const Eigen::Index n = designs.rows();
    const Eigen::Index d = designs.cols();
    if (n < 2) throw std::invalid_argument("fit: at least two design points required");
    bool any_distinct = false;
    for (Eigen::Index i = 1; i < n && !any_distinct; ++i)
        any_distinct = (designs.row(i) - designs.row(0)).cwiseAbs().maxCoeff() > 0.0;
    if (!any_distinct) throw std::invalid_argument("fit: design points must not all coincide");

    const detail::Standardized s = detail::standardize(designs, store, objective);
    const detail::ParamBox box;
    const Eigen::Index dim = d + 1; // log v^2 and log l_q

    auto clamp_point = [&](const Eigen::VectorXd& u) {
        Eigen::VectorXd v = u;
        v[0] = std::clamp(v[0], std::log(box.v2_lo), std::log(box.v2_hi));
        for (Eigen::Index q = 1; q < dim; ++q)
            v[q] = std::clamp(v[q], std::log(box.l_lo), std::log(box.l_hi));
        return v;
    };
    auto objective_fn = [&](const Eigen::VectorXd& u) {
        const Eigen::VectorXd v = clamp_point(u);
        const double v2 = std::exp(v[0]);
        Eigen::VectorXd ls(d);
        for (Eigen::Index q = 0; q < d; ++q) ls[q] = std::exp(v[q + 1]);
        return detail::profile_nll(s, v2, ls, opts.jitter_floor, opts.jitter_cap).nll;
    };

    // Latin-hypercube starts over the log-space box.
    std::mt19937_64 eng = make_stream(opts.seed, 0x4c48u, static_cast<std::uint64_t>(objective));
    std::vector<Eigen::VectorXd> starts;
    const int n_lhs = std::max(0, opts.restarts);
    if (n_lhs > 0) {
        std::vector<std::vector<int>> perms(static_cast<std::size_t>(dim));
        for (auto& perm : perms) {
            perm.resize(static_cast<std::size_t>(n_lhs));
            for (int i = 0; i < n_lhs; ++i) perm[static_cast<std::size_t>(i)] = i;
            std::shuffle(perm.begin(), perm.end(), eng);
        }
        for (int i = 0; i < n_lhs; ++i) {
            Eigen::VectorXd u(dim);
            for (Eigen::Index q = 0; q < dim; ++q) {
                const double lo = q == 0 ? std::log(box.v2_lo) : std::log(box.l_lo);
                const double hi = q == 0 ? std::log(box.v2_hi) : std::log(box.l_hi);
                const double cell = (perms[static_cast<std::size_t>(q)][static_cast<std::size_t>(i)] +
                                     uniform01(eng)) /
                                    static_cast<double>(n_lhs);
                u[q] = lo + cell * (hi - lo);
            }
            starts.push_back(u);
        }
    }
    { // deterministic mid-range start
        Eigen::VectorXd u(dim);
        u[0] = 0.0; // v^2 = 1 in scaled space
        for (Eigen::Index q = 1; q < dim; ++q) u[q] = std::log(0.5);
        starts.push_back(u);
    }
    if (opts.warm_start && opts.warm_start->valid() &&
        opts.warm_start->length_scales.size() == static_cast<std::size_t>(d)) {
        Eigen::VectorXd u(dim);
        u[0] = std::log(opts.warm_start->process_var / (s.out_sd * s.out_sd));
        for (Eigen::Index q = 0; q < d; ++q)
            u[q + 1] = std::log(opts.warm_start->length_scales[static_cast<std::size_t>(q)] /
                               s.in_range[q]);
        starts.push_back(clamp_point(u));
    }

    const int max_evals = opts.max_evals_per_start > 0 ? opts.max_evals_per_start
                                                       : 60 * static_cast<int>(dim) + 60;
    detail::NmResult best;
    for (const Eigen::VectorXd& u0 : starts) {
        const detail::NmResult r = detail::nelder_mead(objective_fn, u0, 0.5, max_evals, 1e-7);
        if (r.fx < best.fx) best = r;
    }
    if (!std::isfinite(best.fx)) {
        KernelParams last;
        last.process_var = std::exp(starts.back()[0]) * s.out_sd * s.out_sd;
        for (Eigen::Index q = 0; q < d; ++q)
            last.length_scales.push_back(std::exp(starts.back()[q + 1]) * s.in_range[q]);
        throw model_fit_error("fit: likelihood not evaluable anywhere in the search box", last);
    }

    const Eigen::VectorXd v = clamp_point(best.x);
    KernelParams fitted;
    fitted.process_var = std::exp(v[0]) * s.out_sd * s.out_sd;
    fitted.length_scales.resize(static_cast<std::size_t>(d));
    for (Eigen::Index q = 0; q < d; ++q)
        fitted.length_scales[static_cast<std::size_t>(q)] = std::exp(v[q + 1]) * s.in_range[q];
    return make_model(designs, store, objective, fitted, opts);
}

} // namespace skmors
