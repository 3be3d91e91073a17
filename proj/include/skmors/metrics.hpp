#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace skmors {

/// Confusion counts for Pareto-membership classification. fp is the number of
/// misclassifications by inclusion (MCI), fn by exclusion (MCE).
struct ErrorCounts {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
};

inline ErrorCounts classify_errors(std::vector<std::size_t> identified, std::vector<std::size_t> truth) {
    std::sort(identified.begin(), identified.end());
    std::sort(truth.begin(), truth.end());
    std::vector<std::size_t> inter;
    std::set_intersection(identified.begin(), identified.end(), truth.begin(), truth.end(),
                          std::back_inserter(inter));
    ErrorCounts c;
    c.tp = static_cast<long long>(inter.size());
    c.fp = static_cast<long long>(identified.size() - inter.size());
    c.fn = static_cast<long long>(truth.size() - inter.size());
    return c;
}

inline double precision(const ErrorCounts& c) {
    return c.tp + c.fp == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

inline double recall(const ErrorCounts& c) {
    return c.tp + c.fn == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

/// Harmonic mean of precision and recall; 0 when tp == 0.
inline double f1(const ErrorCounts& c) {
    if (c.tp == 0) return 0.0;
    const double p = precision(c);
    const double r = recall(c);
    return 2.0 * p * r / (p + r);
}

} // namespace skmors
