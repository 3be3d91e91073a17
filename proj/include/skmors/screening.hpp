#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "skmors/core.hpp"

namespace skmors {

/// Per-design confidence intervals on the mean performance, from sample statistics
/// (lcb/ucb, half-width omega * s/sqrt(r)) and from metamodel predictions
/// (lcb_hat/ucb_hat, half-width omega * prediction sd).
struct ConfidenceBounds {
    double omega = 3.0;
    ObjMatrix lcb, ucb;         // n x m, sample side
    ObjMatrix lcb_hat, ucb_hat; // n x m, prediction side
};

/// Retained / temporarily removed split of the candidate set for one iteration.
struct ScreeningResult {
    std::vector<std::size_t> retained;
    std::vector<std::size_t> screened;
};

/// Bounds from means +- omega * sd. `mean_sd` is the standard deviation of the mean
/// estimate (s/sqrt(r)); `pred_sd` the prediction standard deviation.
inline ConfidenceBounds confidence_bounds(const ObjMatrix& means, const ObjMatrix& mean_sd,
                                          const ObjMatrix& predictions, const ObjMatrix& pred_sd,
                                          double omega) {
    if (omega <= 0.0) throw std::invalid_argument("confidence_bounds: omega must be positive");
    const std::size_t n = means.size();
    ConfidenceBounds b;
    b.omega = omega;
    b.lcb.resize(n);
    b.ucb.resize(n);
    b.lcb_hat.resize(n);
    b.ucb_hat.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t m = means[i].size();
        b.lcb[i].resize(m);
        b.ucb[i].resize(m);
        b.lcb_hat[i].resize(m);
        b.ucb_hat[i].resize(m);
        for (std::size_t j = 0; j < m; ++j) {
            b.lcb[i][j] = means[i][j] - omega * mean_sd[i][j];
            b.ucb[i][j] = means[i][j] + omega * mean_sd[i][j];
            b.lcb_hat[i][j] = predictions[i][j] - omega * pred_sd[i][j];
            b.ucb_hat[i][j] = predictions[i][j] + omega * pred_sd[i][j];
        }
    }
    return b;
}

namespace detail {

// Designs dominated under both the sample means and the predictions; front
// members are never candidates for screening.
inline std::vector<std::size_t> non_front_designs(std::size_t n, const ParetoState& state) {
    std::vector<std::size_t> np;
    for (std::size_t i = 0; i < n; ++i)
        if (!contains(state.observed_front, i) && !contains(state.predicted_front, i)) np.push_back(i);
    return np;
}

inline ScreeningResult split(std::size_t n, const std::vector<char>& is_screened) {
    ScreeningResult r;
    for (std::size_t i = 0; i < n; ++i)
        (is_screened[i] ? r.screened : r.retained).push_back(i);
    return r;
}

inline double sq_distance(const ObjVec& a, const ObjVec& b) {
    double ss = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) ss += (a[j] - b[j]) * (a[j] - b[j]);
    return ss;
}

} // namespace detail

/// Box screening: a dominated design is removed when, on some objective, its sample
/// lower bound exceeds the worst sample upper bound over the observed front AND its
/// predicted lower bound exceeds the worst predicted upper bound over the predicted front.
inline ScreeningResult screen_box(const ConfidenceBounds& bounds, const ParetoState& state) {
    const std::size_t n = bounds.lcb.size();
    if (n == 0) throw std::invalid_argument("screen_box: empty bounds");
    const std::size_t m = bounds.lcb[0].size();

    ObjVec worst_ucb(m, -std::numeric_limits<double>::infinity());
    ObjVec worst_ucb_hat(m, -std::numeric_limits<double>::infinity());
    for (std::size_t k : state.observed_front)
        for (std::size_t j = 0; j < m; ++j) worst_ucb[j] = std::max(worst_ucb[j], bounds.ucb[k][j]);
    for (std::size_t k : state.predicted_front)
        for (std::size_t j = 0; j < m; ++j) worst_ucb_hat[j] = std::max(worst_ucb_hat[j], bounds.ucb_hat[k][j]);

    std::vector<char> screened(n, 0);
    for (std::size_t i : detail::non_front_designs(n, state)) {
        for (std::size_t j = 0; j < m; ++j) {
            if (bounds.lcb[i][j] > worst_ucb[j] && bounds.lcb_hat[i][j] > worst_ucb_hat[j]) {
                screened[i] = 1;
                break;
            }
        }
    }
    return detail::split(n, screened);
}

/// Band screening: as screen_box, but each dominated design is compared against its
/// nearest front member (Euclidean distance between its lower bounds and the front
/// member's upper bounds) on each side instead of the front-wide worst bounds.
inline ScreeningResult screen_band(const ConfidenceBounds& bounds, const ParetoState& state) {
    const std::size_t n = bounds.lcb.size();
    if (n == 0) throw std::invalid_argument("screen_band: empty bounds");
    const std::size_t m = bounds.lcb[0].size();

    auto nearest = [&](const ObjVec& from, const std::vector<std::size_t>& front,
                       const ObjMatrix& ucb_side) {
        std::size_t best = front.front();
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t k : front) {
            const double dk = detail::sq_distance(from, ucb_side[k]);
            if (dk < best_d) { // ties keep the lowest id (fronts are ascending)
                best_d = dk;
                best = k;
            }
        }
        return best;
    };

    std::vector<char> screened(n, 0);
    for (std::size_t i : detail::non_front_designs(n, state)) {
        const std::size_t u = nearest(bounds.lcb[i], state.observed_front, bounds.ucb);
        const std::size_t v = nearest(bounds.lcb_hat[i], state.predicted_front, bounds.ucb_hat);
        for (std::size_t j = 0; j < m; ++j) {
            if (bounds.lcb[i][j] > bounds.ucb[u][j] && bounds.lcb_hat[i][j] > bounds.ucb_hat[v][j]) {
                screened[i] = 1;
                break;
            }
        }
    }
    return detail::split(n, screened);
}

} // namespace skmors
