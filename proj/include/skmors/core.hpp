#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace skmors {

/// Objective vector (length m) and row-major collection of them.
using ObjVec = std::vector<double>;
using ObjMatrix = std::vector<ObjVec>;

/// A candidate design: integer id plus decision vector.
struct Design {
    int id = 0;
    std::vector<double> x;
};

/// Pairwise dominance relation between two objective vectors, minimization sense.
enum class DomRelation {
    DominatesStrictly,
    Dominates,
    DominatedBy,
    DominatedStrictlyBy,
    Incomparable,
    Equal,
};

namespace detail {

inline void require_finite(const ObjVec& v, const char* where) {
    for (double e : v) {
        if (!std::isfinite(e))
            throw std::invalid_argument(std::string(where) + ": non-finite objective value");
    }
}

} // namespace detail

/// Dominance of a over b. Requires equal lengths m >= 2 and finite entries.
inline DomRelation dominates(const ObjVec& a, const ObjVec& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("dominates: objective vectors differ in length");
    if (a.size() < 2)
        throw std::invalid_argument("dominates: at least two objectives required");
    detail::require_finite(a, "dominates");
    detail::require_finite(b, "dominates");

    std::size_t a_below = 0; // #{j : a[j] < b[j]}
    std::size_t b_below = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (a[j] < b[j]) ++a_below;
        if (b[j] < a[j]) ++b_below;
    }
    const std::size_t m = a.size();
    if (a_below == 0 && b_below == 0) return DomRelation::Equal;
    if (b_below == 0) return a_below == m ? DomRelation::DominatesStrictly : DomRelation::Dominates;
    if (a_below == 0) return b_below == m ? DomRelation::DominatedStrictlyBy : DomRelation::DominatedBy;
    return DomRelation::Incomparable;
}

/// True if rel means "first argument dominates second" (weakly or strictly).
inline bool is_dominating(DomRelation rel) {
    return rel == DomRelation::Dominates || rel == DomRelation::DominatesStrictly;
}

/// Indices of the non-dominated points, ascending. Duplicated front points are all kept.
inline std::vector<std::size_t> pareto_front(const ObjMatrix& points) {
    if (points.empty())
        throw std::invalid_argument("pareto_front: empty point list");
    // Incremental archive: a new point is checked against the current front only;
    // dominated front members are evicted on insertion.
    std::vector<std::size_t> front;
    for (std::size_t i = 0; i < points.size(); ++i) {
        bool dominated = false;
        for (std::size_t k = 0; k < front.size() && !dominated; ++k)
            dominated = is_dominating(dominates(points[front[k]], points[i]));
        if (dominated) continue;
        std::erase_if(front, [&](std::size_t k) { return is_dominating(dominates(points[i], points[k])); });
        front.push_back(i);
    }
    std::sort(front.begin(), front.end());
    return front;
}

/// Membership test in a sorted index list.
inline bool contains(const std::vector<std::size_t>& sorted_ids, std::size_t i) {
    return std::binary_search(sorted_ids.begin(), sorted_ids.end(), i);
}

/// Running per-design, per-objective replication statistics (count, mean, sample variance).
class SampleStore {
public:
    SampleStore(std::size_t n_designs, std::size_t n_objectives)
        : n_(n_designs), m_(n_objectives), count_(n_designs, 0), stats_(n_designs * n_objectives) {}

    std::size_t n_designs() const { return n_; }
    std::size_t n_objectives() const { return m_; }

    /// Fold a batch of replications of design i into the running moments (Welford update).
    void record_replications(std::size_t i, std::span<const ObjVec> observations) {
        check_design(i);
        for (const ObjVec& obs : observations) {
            if (obs.size() != m_)
                throw std::invalid_argument("record_replications: observation length mismatch");
            detail::require_finite(obs, "record_replications");
            const double c = static_cast<double>(++count_[i]);
            for (std::size_t j = 0; j < m_; ++j) {
                Moments& s = stats_[i * m_ + j];
                const double delta = obs[j] - s.mean;
                s.mean += delta / c;
                s.m2 += delta * (obs[j] - s.mean);
            }
        }
    }

    long long count(std::size_t i) const {
        check_design(i);
        return count_[i];
    }

    double mean(std::size_t i, std::size_t j) const {
        check_cell(i, j);
        if (count_[i] < 1) throw std::logic_error("SampleStore::mean: no replications recorded");
        return stats_[i * m_ + j].mean;
    }

    /// Unbiased sample variance of the replications; requires count >= 2.
    double variance(std::size_t i, std::size_t j) const {
        check_cell(i, j);
        if (count_[i] < 2) throw std::logic_error("SampleStore::variance: fewer than two replications");
        return std::max(0.0, stats_[i * m_ + j].m2 / static_cast<double>(count_[i] - 1));
    }

    ObjVec mean_vector(std::size_t i) const {
        ObjVec v(m_);
        for (std::size_t j = 0; j < m_; ++j) v[j] = mean(i, j);
        return v;
    }

    ObjMatrix means() const {
        ObjMatrix out(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = mean_vector(i);
        return out;
    }

    /// Variance of the mean estimator, s^2_ij / r_i, as an n x m matrix.
    ObjMatrix mean_variances() const {
        ObjMatrix out(n_, ObjVec(m_));
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < m_; ++j)
                out[i][j] = variance(i, j) / static_cast<double>(count_[i]);
        return out;
    }

private:
    struct Moments {
        double mean = 0.0;
        double m2 = 0.0;
    };

    void check_design(std::size_t i) const {
        if (i >= n_) throw std::out_of_range("SampleStore: design index out of range");
    }
    void check_cell(std::size_t i, std::size_t j) const {
        check_design(i);
        if (j >= m_) throw std::out_of_range("SampleStore: objective index out of range");
    }

    std::size_t n_, m_;
    std::vector<long long> count_;
    std::vector<Moments> stats_;
};

/// Observed (sample-mean) and predicted (metamodel) Pareto memberships over a candidate set.
struct ParetoState {
    std::vector<std::size_t> observed_front;
    std::vector<std::size_t> predicted_front;
};

inline ParetoState make_pareto_state(const ObjMatrix& means, const ObjMatrix& predictions) {
    return ParetoState{pareto_front(means), pareto_front(predictions)};
}

} // namespace skmors
