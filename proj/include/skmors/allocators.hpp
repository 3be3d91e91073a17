#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "skmors/core.hpp"
#include "skmors/criteria.hpp"
#include "skmors/hypervolume.hpp"
#include "skmors/screening.hpp"

namespace skmors {

/// Additional replications per design for one iteration; entries sum to the budget.
using AllocationPlan = std::vector<int>;

inline long long plan_total(const AllocationPlan& plan) {
    return std::accumulate(plan.begin(), plan.end(), 0LL);
}

/// Uniform split: floor(B/n) each, remainder one-per-design in ascending id order.
inline AllocationPlan allocate_equal(std::size_t n_designs, int budget) {
    if (n_designs == 0) throw std::invalid_argument("allocate_equal: empty candidate set");
    if (budget < 0) throw std::invalid_argument("allocate_equal: negative budget");
    AllocationPlan plan(n_designs, budget / static_cast<int>(n_designs));
    const int rem = budget % static_cast<int>(n_designs);
    for (int i = 0; i < rem; ++i) plan[static_cast<std::size_t>(i)] += 1;
    return plan;
}

namespace detail {

// Largest-remainder apportionment of `budget` proportional to nonnegative weights.
inline AllocationPlan largest_remainder(const std::vector<double>& weights, int budget) {
    const std::size_t n = weights.size();
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    AllocationPlan plan(n, 0);
    if (budget <= 0 || !(total > 0.0)) return plan;
    std::vector<double> frac(n, 0.0);
    long long assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double share = static_cast<double>(budget) * weights[i] / total;
        plan[i] = static_cast<int>(std::floor(share));
        frac[i] = share - std::floor(share);
        assigned += plan[i];
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return frac[a] != frac[b] ? frac[a] > frac[b] : a < b;
    });
    for (std::size_t k = 0; assigned < budget; ++k, ++assigned) plan[order[k % n]] += 1;
    return plan;
}

} // namespace detail

/// Pairwise-dominance classification and raw allocation ratios of the simplified
/// MOCBA rules: each design's strongest dominator, the weakest objective of that
/// domination, the dominated/non-dominated split, and the un-normalized alphas.
struct MocbaState {
    std::vector<std::size_t> strongest_dominator;       // p_i
    std::vector<std::size_t> critical_objective;        // j of p_i vs i with weakest domination
    std::vector<char> in_dominated_class;               // S_A membership
    std::vector<std::vector<std::size_t>> dominates_of; // D_h = { i : p_i = h }
    std::vector<double> raw_alpha;                      // before normalization to the budget
};

namespace detail {

struct MocbaWork {
    // Signed domination statistic per ordered pair at its critical objective, and
    // that objective's index: z = delta * |delta| / (tau2_i + tau2_p).
    std::vector<std::vector<double>> z_crit;
    std::vector<std::vector<std::size_t>> j_crit;
};

inline MocbaWork mocba_pairwise(const ObjMatrix& means, const ObjMatrix& tau2) {
    const std::size_t n = means.size();
    const std::size_t m = means.empty() ? 0 : means[0].size();
    MocbaWork w;
    w.z_crit.assign(n, std::vector<double>(n, 0.0));
    w.j_crit.assign(n, std::vector<std::size_t>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < n; ++p) {
            if (p == i) continue;
            double zmin = std::numeric_limits<double>::infinity();
            std::size_t jmin = 0;
            for (std::size_t j = 0; j < m; ++j) {
                const double delta = means[i][j] - means[p][j];
                double denom = tau2[i][j] + tau2[p][j];
                if (!(denom > 0.0)) denom = 1e-300;
                const double z = delta * std::fabs(delta) / denom;
                if (z < zmin) {
                    zmin = z;
                    jmin = j;
                }
            }
            w.z_crit[i][p] = zmin;
            w.j_crit[i][p] = jmin;
        }
    }
    return w;
}

} // namespace detail

/// Classify designs into the dominated class S_A and its complement, and compute the
/// raw allocation ratios. tau2 holds the per-design, per-objective variances of the
/// mean estimators (or metamodel prediction variances for the SK-fed variant).
inline MocbaState mocba_classify(const ObjMatrix& means, const ObjMatrix& tau2) {
    const std::size_t n = means.size();
    if (n < 2) throw std::invalid_argument("mocba_classify: need at least two designs");
    const std::size_t m = means[0].size();
    const detail::MocbaWork w = detail::mocba_pairwise(means, tau2);

    MocbaState st;
    st.strongest_dominator.resize(n);
    st.critical_objective.resize(n);
    st.in_dominated_class.assign(n, 0);
    st.dominates_of.assign(n, {});
    st.raw_alpha.assign(n, 0.0);

    // p_i maximizes the weakest-objective domination statistic over candidates.
    for (std::size_t i = 0; i < n; ++i) {
        double zbest = -std::numeric_limits<double>::infinity();
        std::size_t pbest = i == 0 ? 1 : 0;
        for (std::size_t p = 0; p < n; ++p) {
            if (p == i) continue;
            if (w.z_crit[i][p] > zbest) {
                zbest = w.z_crit[i][p];
                pbest = p;
            }
        }
        st.strongest_dominator[i] = pbest;
        st.critical_objective[i] = w.j_crit[i][pbest];
    }
    for (std::size_t i = 0; i < n; ++i) st.dominates_of[st.strongest_dominator[i]].push_back(i);

    // S_A: the design's own domination signal is weaker than every signal it
    // provides as a strongest dominator (empty minimum counts as +inf).
    auto zsq = [&](std::size_t i, std::size_t p) {
        const double z = w.z_crit[i][p];
        return std::fabs(z); // |delta|^2 / (tau2_i + tau2_p)
    };
    for (std::size_t h = 0; h < n; ++h) {
        double incoming = std::numeric_limits<double>::infinity();
        for (std::size_t i : st.dominates_of[h]) incoming = std::min(incoming, zsq(i, h));
        st.in_dominated_class[h] = zsq(h, st.strongest_dominator[h]) < incoming ? 1 : 0;
    }

    // Per-objective mean ranges, for the degenerate zero-delta clamp.
    ObjVec range(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        double lo = means[0][j], hi = means[0][j];
        for (std::size_t i = 1; i < n; ++i) {
            lo = std::min(lo, means[i][j]);
            hi = std::max(hi, means[i][j]);
        }
        range[j] = hi - lo;
    }
    auto clamped_delta = [&](std::size_t i, std::size_t p, std::size_t j) {
        const double delta = means[i][j] - means[p][j];
        const double eps = 1e-12 * (range[j] > 0.0 ? range[j] : 1.0);
        if (std::fabs(delta) < eps) return delta < 0.0 ? -eps : eps;
        return delta;
    };
    constexpr double kRatioCap = 1e300;

    // Raw ratios for the dominated class: (tau^2 / delta)^2 at the critical
    // objective, anchored so the largest ratio maps to one.
    std::vector<double> ratio(n, 0.0);
    double ratio_max = 0.0;
    bool any_a = false;
    for (std::size_t h = 0; h < n; ++h) {
        if (!st.in_dominated_class[h]) continue;
        any_a = true;
        const std::size_t p = st.strongest_dominator[h];
        const std::size_t jc = st.critical_objective[h];
        const double r = std::min(kRatioCap, std::pow(tau2[h][jc] / clamped_delta(h, p, jc), 2.0));
        ratio[h] = r;
        ratio_max = std::max(ratio_max, r);
    }
    if (!any_a) return st; // caller falls back to uniform allocation

    for (std::size_t h = 0; h < n; ++h)
        if (st.in_dominated_class[h]) st.raw_alpha[h] = ratio_max > 0.0 ? ratio[h] / ratio_max : 1.0;

    // Non-dominated class: sqrt of the variance-weighted sum of the squared alphas
    // of the dominated designs anchored on this design.
    double filled_sum = 0.0;
    std::size_t filled_count = 0;
    for (std::size_t dsg = 0; dsg < n; ++dsg) {
        if (st.in_dominated_class[dsg]) continue;
        double acc = 0.0;
        bool has_any = false;
        for (std::size_t h : st.dominates_of[dsg]) {
            if (!st.in_dominated_class[h]) continue;
            has_any = true;
            const std::size_t jc = w.j_crit[h][dsg];
            double denom = tau2[h][jc];
            if (!(denom > 0.0)) denom = 1e-300;
            const double vr = std::min(kRatioCap, tau2[dsg][jc] / denom);
            acc += vr * st.raw_alpha[h] * st.raw_alpha[h];
        }
        if (has_any) {
            st.raw_alpha[dsg] = std::sqrt(acc);
            filled_sum += st.raw_alpha[dsg];
            ++filled_count;
        } else {
            st.raw_alpha[dsg] = std::numeric_limits<double>::quiet_NaN(); // resolved below
        }
    }
    const double fallback = filled_count > 0 ? filled_sum / static_cast<double>(filled_count) : 1.0;
    for (std::size_t dsg = 0; dsg < n; ++dsg)
        if (!st.in_dominated_class[dsg] && std::isnan(st.raw_alpha[dsg])) st.raw_alpha[dsg] = fallback;
    return st;
}

/// MOCBA plan: raw ratios normalized to the budget with largest-remainder rounding.
/// Falls back to the uniform split when no design lands in the dominated class.
inline AllocationPlan allocate_mocba(const ObjMatrix& means, const ObjMatrix& tau2, int budget) {
    const MocbaState st = mocba_classify(means, tau2);
    const bool any_a = std::any_of(st.in_dominated_class.begin(), st.in_dominated_class.end(),
                                   [](char c) { return c != 0; });
    const double total = std::accumulate(st.raw_alpha.begin(), st.raw_alpha.end(), 0.0);
    if (!any_a || !(total > 0.0) || !std::isfinite(total))
        return allocate_equal(means.size(), budget);
    return detail::largest_remainder(st.raw_alpha, budget);
}

enum class ScreeningMode { None, Box, Band };
enum class CriteriaMode { Both, PdOnly, HvOnly };

struct SkmorsDiagnostics {
    std::vector<std::size_t> retained;
    std::vector<std::size_t> criteria_front; // in allocation order
    CriteriaScores scores;                   // over the retained designs
    ObjVec reference;
};

struct SkmorsStepResult {
    AllocationPlan plan;
    SkmorsDiagnostics diag;
};

/// One SK-MORS allocation step: confidence bounds, optional screening, EHVD and
/// posterior-distance scores over the retained designs, the bi-criteria front, and
/// round-robin assignment of one replication per front member until the budget is spent.
inline SkmorsStepResult skmors_iterate(const ObjMatrix& means, const ObjMatrix& mean_sd,
                                       const ObjMatrix& predictions, const ObjMatrix& pred_sd,
                                       int budget, ScreeningMode screening, CriteriaMode criteria,
                                       double omega) {
    if (budget < 0) throw std::invalid_argument("skmors_iterate: negative budget");
    const std::size_t n = means.size();
    const ParetoState state = make_pareto_state(means, predictions);

    SkmorsStepResult out;
    out.plan.assign(n, 0);

    if (screening == ScreeningMode::None) {
        out.diag.retained.resize(n);
        std::iota(out.diag.retained.begin(), out.diag.retained.end(), 0);
    } else {
        const ConfidenceBounds bounds = confidence_bounds(means, mean_sd, predictions, pred_sd, omega);
        const ScreeningResult res =
            screening == ScreeningMode::Box ? screen_box(bounds, state) : screen_band(bounds, state);
        out.diag.retained = res.retained;
    }
    if (out.diag.retained.empty()) throw std::logic_error("skmors_iterate: empty retained set");

    out.diag.reference = reference_point(means, predictions);
    CriteriaScores& scores = out.diag.scores;
    scores.design_ids = out.diag.retained;
    scores.ehvd.reserve(scores.design_ids.size());
    scores.pd.reserve(scores.design_ids.size());
    for (std::size_t i : scores.design_ids) {
        scores.ehvd.push_back(ehvd(i, state, means, predictions, out.diag.reference));
        scores.pd.push_back(posterior_distance(means[i], predictions[i], pred_sd[i]));
    }
    scores.finalize_normalized();

    switch (criteria) {
    case CriteriaMode::Both: out.diag.criteria_front = criteria_front(scores); break;
    case CriteriaMode::PdOnly: out.diag.criteria_front = argmax_designs(scores, scores.pd); break;
    case CriteriaMode::HvOnly: out.diag.criteria_front = argmax_designs(scores, scores.ehvd); break;
    }
    if (out.diag.criteria_front.empty())
        throw std::logic_error("skmors_iterate: empty criteria front with positive budget");

    int remaining = budget;
    while (remaining > 0) {
        for (std::size_t i : out.diag.criteria_front) {
            if (remaining == 0) break;
            out.plan[i] += 1;
            --remaining;
        }
    }
    return out;
}

/// Snapshot of the statistics an allocator may draw on for one iteration.
/// Prediction matrices are null for variants that run on sample statistics alone.
struct IterationState {
    const ObjMatrix* means = nullptr;
    const ObjMatrix* mean_var = nullptr; // s^2 / r
    const ObjMatrix* predictions = nullptr;
    const ObjMatrix* prediction_var = nullptr;
    double omega = 3.0;
};

struct AllocationOutcome {
    AllocationPlan plan;
    std::size_t retained_count = 0;
    std::size_t criteria_front_size = 0;
};

class Allocator {
public:
    virtual ~Allocator() = default;
    virtual std::string name() const = 0;
    /// Whether metamodels must be fitted before allocate() is called.
    virtual bool needs_models() const = 0;
    /// Whether the identified Pareto set comes from predictions rather than sample means.
    virtual bool identifies_with_predictions() const = 0;
    virtual AllocationOutcome allocate(const IterationState& state, int budget) const = 0;
};

namespace detail {

inline ObjMatrix elementwise_sqrt(const ObjMatrix& a) {
    ObjMatrix out = a;
    for (auto& row : out)
        for (double& v : row) v = std::sqrt(std::max(0.0, v));
    return out;
}

class EqualAllocator final : public Allocator {
public:
    explicit EqualAllocator(bool sk_identification) : ski_(sk_identification) {}
    std::string name() const override { return ski_ ? "EQUAL_SKi" : "EQUAL"; }
    bool needs_models() const override { return ski_; }
    bool identifies_with_predictions() const override { return ski_; }
    AllocationOutcome allocate(const IterationState& state, int budget) const override {
        AllocationOutcome out;
        out.plan = allocate_equal(state.means->size(), budget);
        out.retained_count = state.means->size();
        return out;
    }

private:
    bool ski_;
};

class MocbaAllocator final : public Allocator {
public:
    enum class Feed { Sample, SkIdentifyOnly, SkBoth };
    explicit MocbaAllocator(Feed feed) : feed_(feed) {}
    std::string name() const override {
        switch (feed_) {
        case Feed::Sample: return "MOCBA";
        case Feed::SkIdentifyOnly: return "MOCBA_SKi";
        default: return "MOCBA_SK";
        }
    }
    bool needs_models() const override { return feed_ != Feed::Sample; }
    bool identifies_with_predictions() const override { return feed_ != Feed::Sample; }
    AllocationOutcome allocate(const IterationState& state, int budget) const override {
        AllocationOutcome out;
        if (feed_ == Feed::SkBoth)
            out.plan = allocate_mocba(*state.predictions, *state.prediction_var, budget);
        else
            out.plan = allocate_mocba(*state.means, *state.mean_var, budget);
        out.retained_count = state.means->size();
        return out;
    }

private:
    Feed feed_;
};

class SkmorsAllocator final : public Allocator {
public:
    SkmorsAllocator(ScreeningMode screening, CriteriaMode criteria)
        : screening_(screening), criteria_(criteria) {}
    std::string name() const override {
        if (criteria_ == CriteriaMode::PdOnly) return "SKMORS_PD";
        if (criteria_ == CriteriaMode::HvOnly) return "SKMORS_HV";
        switch (screening_) {
        case ScreeningMode::None: return "SKMORS_none";
        case ScreeningMode::Box: return "SKMORS_box";
        default: return "SKMORS_band";
        }
    }
    bool needs_models() const override { return true; }
    bool identifies_with_predictions() const override { return true; }
    AllocationOutcome allocate(const IterationState& state, int budget) const override {
        const SkmorsStepResult step =
            skmors_iterate(*state.means, elementwise_sqrt(*state.mean_var), *state.predictions,
                           elementwise_sqrt(*state.prediction_var), budget, screening_, criteria_,
                           state.omega);
        AllocationOutcome out;
        out.plan = step.plan;
        out.retained_count = step.diag.retained.size();
        out.criteria_front_size = step.diag.criteria_front.size();
        return out;
    }

private:
    ScreeningMode screening_;
    CriteriaMode criteria_;
};

} // namespace detail

inline const std::vector<std::string>& allocator_names() {
    static const std::vector<std::string> names = {
        "SKMORS_none", "SKMORS_box", "SKMORS_band", "SKMORS_PD", "SKMORS_HV",
        "EQUAL",       "EQUAL_SKi",  "MOCBA",       "MOCBA_SK",  "MOCBA_SKi",
    };
    return names;
}

/// Factory over the benchmarked allocation variants.
inline std::unique_ptr<Allocator> make_allocator(const std::string& variant) {
    using detail::EqualAllocator;
    using detail::MocbaAllocator;
    using detail::SkmorsAllocator;
    if (variant == "SKMORS_none")
        return std::make_unique<SkmorsAllocator>(ScreeningMode::None, CriteriaMode::Both);
    if (variant == "SKMORS_box")
        return std::make_unique<SkmorsAllocator>(ScreeningMode::Box, CriteriaMode::Both);
    if (variant == "SKMORS_band")
        return std::make_unique<SkmorsAllocator>(ScreeningMode::Band, CriteriaMode::Both);
    if (variant == "SKMORS_PD")
        return std::make_unique<SkmorsAllocator>(ScreeningMode::Box, CriteriaMode::PdOnly);
    if (variant == "SKMORS_HV")
        return std::make_unique<SkmorsAllocator>(ScreeningMode::Box, CriteriaMode::HvOnly);
    if (variant == "EQUAL") return std::make_unique<EqualAllocator>(false);
    if (variant == "EQUAL_SKi") return std::make_unique<EqualAllocator>(true);
    if (variant == "MOCBA") return std::make_unique<MocbaAllocator>(MocbaAllocator::Feed::Sample);
    if (variant == "MOCBA_SK") return std::make_unique<MocbaAllocator>(MocbaAllocator::Feed::SkBoth);
    if (variant == "MOCBA_SKi")
        return std::make_unique<MocbaAllocator>(MocbaAllocator::Feed::SkIdentifyOnly);
    throw std::invalid_argument("make_allocator: unknown variant '" + variant + "'");
}

} // namespace skmors
