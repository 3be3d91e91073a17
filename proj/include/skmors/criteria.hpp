#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "skmors/core.hpp"

namespace skmors {

/// Uncertainty-inflated Euclidean distance between a design's sample-mean vector
/// and its predicted vector: sqrt(sum_j (|mean_j - pred_j| + pred_sd_j)^2).
inline double posterior_distance(const ObjVec& mean, const ObjVec& prediction, const ObjVec& prediction_sd) {
    if (mean.size() != prediction.size() || mean.size() != prediction_sd.size())
        throw std::invalid_argument("posterior_distance: length mismatch");
    double ss = 0.0;
    for (std::size_t j = 0; j < mean.size(); ++j) {
        const double t = std::fabs(mean[j] - prediction[j]) + prediction_sd[j];
        ss += t * t;
    }
    return std::sqrt(ss);
}

/// Min-max scaling to [0,1]; a constant column maps to all zeros.
inline std::vector<double> normalize(const std::vector<double>& values) {
    if (values.empty()) return {};
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, range = *hi_it - *lo_it;
    std::vector<double> out(values.size(), 0.0);
    if (range <= 0.0) return out;
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - lo) / range;
    return out;
}

/// Per-retained-design sampling criteria. Normalized columns are for reporting
/// only; front extraction works on the raw scores.
struct CriteriaScores {
    std::vector<std::size_t> design_ids;
    std::vector<double> ehvd;
    std::vector<double> pd;
    std::vector<double> ehvd_norm;
    std::vector<double> pd_norm;

    std::size_t size() const { return design_ids.size(); }

    void finalize_normalized() {
        ehvd_norm = normalize(ehvd);
        pd_norm = normalize(pd);
    }
};

/// Non-dominated designs under joint maximization of (ehvd, pd), ordered by
/// descending ehvd, ties by descending pd, then ascending id.
inline std::vector<std::size_t> criteria_front(const CriteriaScores& scores) {
    const std::size_t n = scores.size();
    if (n == 0) throw std::invalid_argument("criteria_front: empty retained set");
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < n; ++i) {
        bool dominated = false;
        for (std::size_t k = 0; k < n && !dominated; ++k) {
            if (k == i) continue;
            dominated = scores.ehvd[k] >= scores.ehvd[i] && scores.pd[k] >= scores.pd[i] &&
                        (scores.ehvd[k] > scores.ehvd[i] || scores.pd[k] > scores.pd[i]);
        }
        if (!dominated) keep.push_back(i);
    }
    std::sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) {
        if (scores.ehvd[a] != scores.ehvd[b]) return scores.ehvd[a] > scores.ehvd[b];
        if (scores.pd[a] != scores.pd[b]) return scores.pd[a] > scores.pd[b];
        return scores.design_ids[a] < scores.design_ids[b];
    });
    std::vector<std::size_t> ids(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) ids[i] = scores.design_ids[keep[i]];
    return ids;
}

/// Designs attaining the maximum of a single criterion column, ascending id order.
/// Used by the single-criterion allocation variants in place of the bi-criteria front.
inline std::vector<std::size_t> argmax_designs(const CriteriaScores& scores, const std::vector<double>& column) {
    if (scores.size() == 0) throw std::invalid_argument("argmax_designs: empty retained set");
    const double best = *std::max_element(column.begin(), column.end());
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < column.size(); ++i)
        if (column[i] == best) ids.push_back(scores.design_ids[i]);
    std::sort(ids.begin(), ids.end());
    return ids;
}

} // namespace skmors
