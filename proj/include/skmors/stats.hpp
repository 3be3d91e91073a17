#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace skmors {

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("mean_of: empty sample");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Unbiased sample variance (denominator n-1); requires n >= 2.
inline double sample_variance(const std::vector<double>& v) {
    if (v.size() < 2) throw std::invalid_argument("sample_variance: need at least two values");
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return ss / static_cast<double>(v.size() - 1);
}

namespace detail {

// Regularized incomplete beta I_x(a,b) by Lentz continued fraction.
inline double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kFpMin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

inline double inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

} // namespace detail

/// CDF of Student's t with nu degrees of freedom.
inline double student_t_cdf(double t, double nu) {
    if (nu <= 0.0) throw std::invalid_argument("student_t_cdf: dof must be positive");
    const double x = nu / (nu + t * t);
    const double p = 0.5 * detail::inc_beta(0.5 * nu, 0.5, x);
    return t >= 0.0 ? 1.0 - p : p;
}

/// Quantile of Student's t (inverse CDF), bisection on the CDF.
inline double student_t_quantile(double p, double nu) {
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("student_t_quantile: p in (0,1) required");
    if (p == 0.5) return 0.0;
    double lo = -1.0, hi = 1.0;
    while (student_t_cdf(lo, nu) > p) lo *= 2.0;
    while (student_t_cdf(hi, nu) < p) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (student_t_cdf(mid, nu) < p)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-12 * std::max(1.0, std::fabs(hi))) break;
    }
    return 0.5 * (lo + hi);
}

/// Result of a one-sided paired Wilcoxon signed-rank test.
struct WilcoxonResult {
    std::size_t n_pairs = 0;   // non-zero differences used
    double w_plus = 0.0;       // rank sum of positive differences
    double p_value = 1.0;      // P(W+ >= observed) under H0
};

/// Exact one-sided paired Wilcoxon signed-rank test for median(a - b) > 0.
/// Zero differences are dropped; ties in |d| get average ranks; the null
/// distribution is the sign-flip permutation distribution of the realized ranks.
inline WilcoxonResult wilcoxon_signed_rank_greater(const std::vector<double>& a,
                                                   const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("wilcoxon: unequal sample sizes");
    std::vector<double> d;
    d.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double di = a[i] - b[i];
        if (di != 0.0) d.push_back(di);
    }
    WilcoxonResult res;
    res.n_pairs = d.size();
    if (d.empty()) return res; // no evidence either way

    const std::size_t n = d.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t k) { return std::fabs(d[i]) < std::fabs(d[k]); });

    // Average ranks doubled so they stay integral under ties.
    std::vector<long long> rank2(n, 0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t k = i;
        while (k + 1 < n && std::fabs(d[order[k + 1]]) == std::fabs(d[order[i]])) ++k;
        const long long sum2 = static_cast<long long>(i + 1 + k + 1); // doubled average of ranks i+1..k+1
        for (std::size_t t = i; t <= k; ++t) rank2[order[t]] = sum2;
        i = k + 1;
    }

    long long w2_obs = 0, total2 = 0;
    for (std::size_t t = 0; t < n; ++t) {
        total2 += rank2[t];
        if (d[t] > 0.0) w2_obs += rank2[t];
    }
    res.w_plus = 0.5 * static_cast<double>(w2_obs);

    // P(W+ >= w_obs): dynamic program over achievable doubled rank sums.
    std::vector<double> prob(static_cast<std::size_t>(total2) + 1, 0.0);
    prob[0] = 1.0;
    for (std::size_t t = 0; t < n; ++t) {
        const auto r = static_cast<std::size_t>(rank2[t]);
        for (std::size_t s = prob.size(); s-- > r;) prob[s] = 0.5 * (prob[s] + prob[s - r]);
        for (std::size_t s = 0; s < r; ++s) prob[s] *= 0.5;
    }
    double tail = 0.0;
    for (std::size_t s = static_cast<std::size_t>(w2_obs); s < prob.size(); ++s) tail += prob[s];
    res.p_value = std::min(1.0, tail);
    return res;
}

} // namespace skmors
