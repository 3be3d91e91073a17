#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "skmors/core.hpp"

namespace skmors {

/// HV change cases for a sample-mean / prediction substitution against the observed front.
/// Cases 1 and 3 shrink the dominated region, 2 and 4 grow it, 5 leaves it unchanged.
enum class EhvdCase { Case1, Case2, Case3, Case4, Case5 };

namespace detail {

inline void check_biobjective(const ObjVec& v, const char* where) {
    if (v.size() != 2) throw std::invalid_argument(std::string(where) + ": exactly two objectives supported");
    require_finite(v, where);
}

// Non-dominated subset of bi-objective points, sorted ascending in the first
// objective (hence strictly descending in the second). Duplicates collapse.
inline std::vector<ObjVec> staircase(std::vector<ObjVec> pts) {
    std::sort(pts.begin(), pts.end(), [](const ObjVec& a, const ObjVec& b) {
        return a[0] != b[0] ? a[0] < b[0] : a[1] < b[1];
    });
    std::vector<ObjVec> keep;
    for (const ObjVec& p : pts) {
        if (!keep.empty() && p[1] >= keep.back()[1]) continue; // dominated or duplicate
        keep.push_back(p);
    }
    return keep;
}

} // namespace detail

/// Exact area of the region dominated by a bi-objective front and bounded by the
/// reference point (minimization). Every input point must strictly dominate ref.
inline double hv2d(const std::vector<ObjVec>& front, const ObjVec& ref) {
    detail::check_biobjective(ref, "hv2d");
    for (const ObjVec& p : front) {
        detail::check_biobjective(p, "hv2d");
        if (!(p[0] < ref[0] && p[1] < ref[1]))
            throw std::invalid_argument("hv2d: point does not strictly dominate the reference");
    }
    const std::vector<ObjVec> stair = detail::staircase(front);
    double area = 0.0;
    for (std::size_t i = 0; i < stair.size(); ++i) {
        const double next_x = i + 1 < stair.size() ? stair[i + 1][0] : ref[0];
        area += (next_x - stair[i][0]) * (ref[1] - stair[i][1]);
    }
    return area;
}

/// Symmetric-difference area between the regions dominated by fronts A and B:
/// HV(A) + HV(B) - 2 * area(A-region intersect B-region).
inline double ehvc(const std::vector<ObjVec>& a, const std::vector<ObjVec>& b, const ObjVec& ref) {
    const double hv_a = hv2d(a, ref);
    const double hv_b = hv2d(b, ref);
    if (a.empty() || b.empty()) return hv_a + hv_b;
    // The intersection of two staircase regions is the region dominated by the
    // componentwise maxima of all cross pairs.
    std::vector<ObjVec> corners;
    corners.reserve(a.size() * b.size());
    for (const ObjVec& p : a)
        for (const ObjVec& q : b)
            corners.push_back(ObjVec{std::max(p[0], q[0]), std::max(p[1], q[1])});
    const double inter = hv2d(corners, ref);
    return hv_a + hv_b - 2.0 * inter;
}

/// Reference point strictly worse than every sample mean and prediction, padded by
/// `margin` of the per-objective observed range.
inline ObjVec reference_point(const ObjMatrix& means, const ObjMatrix& predictions, double margin = 0.1) {
    if (means.empty()) throw std::invalid_argument("reference_point: empty candidate set");
    const std::size_t m = means[0].size();
    ObjVec lo(m, std::numeric_limits<double>::infinity());
    ObjVec hi(m, -std::numeric_limits<double>::infinity());
    auto fold = [&](const ObjMatrix& mat) {
        for (const ObjVec& v : mat)
            for (std::size_t j = 0; j < m; ++j) {
                lo[j] = std::min(lo[j], v[j]);
                hi[j] = std::max(hi[j], v[j]);
            }
    };
    fold(means);
    fold(predictions);
    ObjVec ref(m);
    for (std::size_t j = 0; j < m; ++j) {
        double pad = margin * (hi[j] - lo[j]);
        if (!(pad > 0.0)) pad = 1.0;
        ref[j] = hi[j] + pad;
    }
    return ref;
}

namespace detail {

// Observed front point set, and the same set with design i's sample mean
// replaced by its prediction (union only, when i is not on the observed front).
struct EhvdFronts {
    std::vector<ObjVec> before;
    std::vector<ObjVec> after;
};

inline EhvdFronts ehvd_fronts(std::size_t i, const ParetoState& state, const ObjMatrix& means,
                              const ObjMatrix& predictions) {
    EhvdFronts f;
    for (std::size_t k : state.observed_front) {
        f.before.push_back(means[k]);
        if (k != i) f.after.push_back(means[k]);
    }
    f.after.push_back(predictions[i]);
    return f;
}

} // namespace detail

/// Absolute hypervolume change when design i's sample-mean vector is swapped for
/// its predicted vector in the observed front (the substituted set is re-filtered
/// for dominance inside hv2d).
inline double ehvd(std::size_t i, const ParetoState& state, const ObjMatrix& means,
                   const ObjMatrix& predictions, const ObjVec& ref) {
    const auto fronts = detail::ehvd_fronts(i, state, means, predictions);
    return std::fabs(hv2d(fronts.after, ref) - hv2d(fronts.before, ref));
}

/// Classify the substitution of design i into the five HV-change cases. The case is
/// consistent with the sign of the change: 1/3 decrease, 2/4 increase, 5 unchanged.
/// Incomparable mean/prediction pairs are classified by the sign alone.
inline EhvdCase classify_case(std::size_t i, const ParetoState& state, const ObjMatrix& means,
                              const ObjMatrix& predictions, const ObjVec& ref) {
    const auto fronts = detail::ehvd_fronts(i, state, means, predictions);
    const double delta = hv2d(fronts.after, ref) - hv2d(fronts.before, ref);
    if (delta == 0.0) return EhvdCase::Case5;

    const DomRelation rel = dominates(means[i], predictions[i]);
    if (is_dominating(rel)) {
        // Observed dominates predicted: the region shrinks. Case 1 when the
        // prediction itself stays non-dominated, case 3 when it is covered.
        const std::vector<ObjVec> stair = detail::staircase(fronts.after);
        const bool pred_on_front = std::any_of(stair.begin(), stair.end(), [&](const ObjVec& p) {
            return p == predictions[i];
        });
        return pred_on_front ? EhvdCase::Case1 : EhvdCase::Case3;
    }
    if (rel == DomRelation::DominatedBy || rel == DomRelation::DominatedStrictlyBy) {
        // Predicted dominates observed: the region grows. Case 2 when the sample
        // mean sat on the observed front, case 4 when it was already dominated.
        return contains(state.observed_front, i) ? EhvdCase::Case2 : EhvdCase::Case4;
    }
    return delta < 0.0 ? EhvdCase::Case3 : EhvdCase::Case4;
}

} // namespace skmors
