#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "skmors/criteria.hpp"
#include "skmors/rng.hpp"

using namespace skmors;

TEST_CASE("posterior_distance: direct evaluations") {
    CHECK(posterior_distance({1, 1}, {1, 1}, {0, 0}) == Catch::Approx(0.0));
    CHECK(posterior_distance({1, 1}, {2, 2}, {0, 0}) == Catch::Approx(std::sqrt(2.0)));
    CHECK(posterior_distance({1, 1}, {2, 2}, {1, 1}) == Catch::Approx(std::sqrt(8.0)));
    CHECK_THROWS_AS(posterior_distance({1, 1}, {1}, {0, 0}), std::invalid_argument);
}

TEST_CASE("posterior_distance: non-decreasing in each prediction sd") {
    std::mt19937_64 eng(41);
    for (int rep = 0; rep < 100; ++rep) {
        const ObjVec mean = {uniform01(eng), uniform01(eng)};
        const ObjVec pred = {uniform01(eng), uniform01(eng)};
        ObjVec sd = {uniform01(eng), uniform01(eng)};
        const double base = posterior_distance(mean, pred, sd);
        sd[eng() % 2] += uniform01(eng);
        CHECK(posterior_distance(mean, pred, sd) >= base);
    }
}

TEST_CASE("normalize: min-max scaling") {
    CHECK(normalize({0, 5, 10}) == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(normalize({3, 3, 3}) == std::vector<double>{0.0, 0.0, 0.0});

    // order isomorphism against a rank oracle
    std::mt19937_64 eng(43);
    std::vector<double> vals;
    for (int i = 0; i < 50; ++i) vals.push_back(uniform01(eng) * 100.0 - 50.0);
    const auto out = normalize(vals);
    for (std::size_t i = 0; i < vals.size(); ++i)
        for (std::size_t k = 0; k < vals.size(); ++k)
            CHECK((vals[i] < vals[k]) == (out[i] < out[k]));
}

namespace {

CriteriaScores make_scores(std::vector<double> ehvd, std::vector<double> pd) {
    CriteriaScores s;
    s.design_ids.resize(ehvd.size());
    std::iota(s.design_ids.begin(), s.design_ids.end(), 0);
    s.ehvd = std::move(ehvd);
    s.pd = std::move(pd);
    s.finalize_normalized();
    return s;
}

} // namespace

TEST_CASE("criteria_front: examples") {
    // identical scores: everything is mutually incomparable
    const auto tied = make_scores({1, 1, 1}, {2, 2, 2});
    CHECK(criteria_front(tied) == std::vector<std::size_t>{0, 1, 2});

    // strict domination under maximization
    const auto two = make_scores({1.0, 0.5}, {0.5, 0.2});
    CHECK(criteria_front(two) == std::vector<std::size_t>{0});

    CHECK_THROWS_AS(criteria_front(CriteriaScores{}), std::invalid_argument);
}

TEST_CASE("criteria_front: matches brute-force maximization oracle") {
    std::mt19937_64 eng(47);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> e, p;
        for (int i = 0; i < 20; ++i) {
            e.push_back(std::floor(uniform01(eng) * 6.0));
            p.push_back(std::floor(uniform01(eng) * 6.0));
        }
        const auto scores = make_scores(e, p);
        auto front = criteria_front(scores);
        CHECK_FALSE(front.empty());

        std::vector<std::size_t> expect;
        for (std::size_t i = 0; i < e.size(); ++i) {
            bool dominated = false;
            for (std::size_t k = 0; k < e.size() && !dominated; ++k)
                dominated = k != i && e[k] >= e[i] && p[k] >= p[i] && (e[k] > e[i] || p[k] > p[i]);
            if (!dominated) expect.push_back(i);
        }
        auto sorted = front;
        std::sort(sorted.begin(), sorted.end());
        CHECK(sorted == expect);

        // ordering: descending ehvd, ties by descending pd, then ascending id
        for (std::size_t k = 1; k < front.size(); ++k) {
            const std::size_t a = front[k - 1], b = front[k];
            const bool ordered = e[a] > e[b] || (e[a] == e[b] && p[a] > p[b]) ||
                                 (e[a] == e[b] && p[a] == p[b] && a < b);
            CHECK(ordered);
        }
    }
}

TEST_CASE("criteria_front: invariant under monotone transform of one column") {
    std::mt19937_64 eng(53);
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<double> e, p;
        for (int i = 0; i < 15; ++i) {
            e.push_back(uniform01(eng));
            p.push_back(uniform01(eng));
        }
        const auto base = criteria_front(make_scores(e, p));
        std::vector<double> e3 = e;
        for (double& v : e3) v = std::exp(3.0 * v); // strictly increasing
        CHECK(criteria_front(make_scores(e3, p)) == base);
    }
}

TEST_CASE("argmax_designs: maximal-criterion selection with id ties") {
    const auto s = make_scores({1, 3, 3, 2}, {0, 0, 0, 0});
    CHECK(argmax_designs(s, s.ehvd) == std::vector<std::size_t>{1, 2});
}
