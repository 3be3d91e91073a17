#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "skmors/core.hpp"
#include "skmors/rng.hpp"

using namespace skmors;

namespace {

// Exhaustive pairwise oracle, written directly against the componentwise definition.
std::vector<std::size_t> brute_force_front(const ObjMatrix& pts) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        bool dominated = false;
        for (std::size_t h = 0; h < pts.size() && !dominated; ++h) {
            if (h == i) continue;
            bool all_le = true, any_lt = false;
            for (std::size_t j = 0; j < pts[i].size(); ++j) {
                if (pts[h][j] > pts[i][j]) all_le = false;
                if (pts[h][j] < pts[i][j]) any_lt = true;
            }
            dominated = all_le && any_lt;
        }
        if (!dominated) out.push_back(i);
    }
    return out;
}

ObjVec random_point(std::mt19937_64& eng, std::size_t m) {
    ObjVec v(m);
    for (double& e : v) e = uniform01(eng);
    return v;
}

} // namespace

TEST_CASE("dominates: componentwise relations") {
    CHECK(dominates({1, 2}, {2, 3}) == DomRelation::DominatesStrictly);
    CHECK(dominates({1, 2}, {1, 2}) == DomRelation::Equal);
    CHECK(dominates({1, 3}, {3, 1}) == DomRelation::Incomparable);
    CHECK(dominates({1, 2}, {1, 3}) == DomRelation::Dominates);
    CHECK(dominates({2, 3}, {1, 2}) == DomRelation::DominatedStrictlyBy);
    CHECK(dominates({1, 3}, {1, 2}) == DomRelation::DominatedBy);
}

TEST_CASE("dominates: input validation") {
    CHECK_THROWS_AS(dominates({1, 2}, {1, 2, 3}), std::invalid_argument);
    CHECK_THROWS_AS(dominates({1}, {2}), std::invalid_argument);
    CHECK_THROWS_AS(dominates({1, std::nan("")}, {1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(dominates({1, 2}, {1, std::numeric_limits<double>::infinity()}),
                    std::invalid_argument);
}

TEST_CASE("dominates: antisymmetry and strict transitivity on random vectors") {
    std::mt19937_64 eng(7);
    auto mirror = [](DomRelation r) {
        switch (r) {
        case DomRelation::Dominates: return DomRelation::DominatedBy;
        case DomRelation::DominatesStrictly: return DomRelation::DominatedStrictlyBy;
        case DomRelation::DominatedBy: return DomRelation::Dominates;
        case DomRelation::DominatedStrictlyBy: return DomRelation::DominatesStrictly;
        default: return r;
        }
    };
    for (int rep = 0; rep < 500; ++rep) {
        // coarse grid values so ties and dominations actually occur
        auto draw = [&](std::size_t m) {
            ObjVec v(m);
            for (double& e : v) e = std::floor(uniform01(eng) * 4.0);
            return v;
        };
        const ObjVec a = draw(3), b = draw(3), c = draw(3);
        CHECK(dominates(b, a) == mirror(dominates(a, b)));
        if (is_dominating(dominates(a, b)) && is_dominating(dominates(b, c)))
            CHECK(is_dominating(dominates(a, c)));
    }
}

TEST_CASE("pareto_front: examples") {
    CHECK(pareto_front({{1, 3}, {2, 2}, {3, 1}}) == std::vector<std::size_t>{0, 1, 2});
    CHECK(pareto_front({{1, 1}, {2, 2}}) == std::vector<std::size_t>{0});
    CHECK_THROWS_AS(pareto_front({}), std::invalid_argument);
    // duplicates of a front point all stay
    CHECK(pareto_front({{1, 2}, {1, 2}, {3, 3}}) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("pareto_front: matches exhaustive pairwise oracle") {
    std::mt19937_64 eng(11);
    for (int rep = 0; rep < 40; ++rep) {
        ObjMatrix pts;
        for (int i = 0; i < 50; ++i) pts.push_back(random_point(eng, 2));
        CHECK(pareto_front(pts) == brute_force_front(pts));
    }
    for (int rep = 0; rep < 20; ++rep) { // and a 3-objective batch
        ObjMatrix pts;
        for (int i = 0; i < 30; ++i) pts.push_back(random_point(eng, 3));
        CHECK(pareto_front(pts) == brute_force_front(pts));
    }
}

TEST_CASE("pareto_front: idempotence and positive-scaling invariance") {
    std::mt19937_64 eng(13);
    for (int rep = 0; rep < 25; ++rep) {
        ObjMatrix pts;
        for (int i = 0; i < 30; ++i) pts.push_back(random_point(eng, 2));
        const auto front = pareto_front(pts);

        ObjMatrix front_pts;
        for (std::size_t k : front) front_pts.push_back(pts[k]);
        std::vector<std::size_t> all(front_pts.size());
        std::iota(all.begin(), all.end(), 0);
        CHECK(pareto_front(front_pts) == all);

        const double scale = 0.1 + 5.0 * uniform01(eng);
        ObjMatrix scaled = pts;
        for (auto& p : scaled)
            for (double& e : p) e *= scale;
        CHECK(pareto_front(scaled) == front);
    }
}

TEST_CASE("SampleStore: batch mean update") {
    SampleStore store(1, 2);
    store.record_replications(0, std::vector<ObjVec>{{1.0, 1.0}, {1.0, 1.0}});
    CHECK(store.mean(0, 0) == Catch::Approx(1.0));
    store.record_replications(0, std::vector<ObjVec>{{2.0, 2.0}, {2.0, 2.0}});
    CHECK(store.count(0) == 4);
    CHECK(store.mean(0, 0) == Catch::Approx(1.5));
    CHECK(store.mean(0, 1) == Catch::Approx(1.5));

    // empty batch leaves the store unchanged
    store.record_replications(0, std::vector<ObjVec>{});
    CHECK(store.count(0) == 4);
    CHECK(store.mean(0, 0) == Catch::Approx(1.5));
}

TEST_CASE("SampleStore: streaming equals from-scratch recomputation for any batch split") {
    std::mt19937_64 eng(17);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<ObjVec> all_obs;
        for (int k = 0; k < 100; ++k)
            all_obs.push_back({100.0 + 5.0 * normal01(eng), -3.0 + 0.5 * normal01(eng)});

        SampleStore store(1, 2);
        std::size_t pos = 0;
        while (pos < all_obs.size()) {
            const std::size_t len = std::min<std::size_t>(1 + eng() % 7, all_obs.size() - pos);
            store.record_replications(
                0, std::vector<ObjVec>(all_obs.begin() + pos, all_obs.begin() + pos + len));
            pos += len;
        }

        for (std::size_t j = 0; j < 2; ++j) {
            double mean = 0.0;
            for (const auto& o : all_obs) mean += o[j];
            mean /= static_cast<double>(all_obs.size());
            double ss = 0.0;
            for (const auto& o : all_obs) ss += (o[j] - mean) * (o[j] - mean);
            const double var = ss / static_cast<double>(all_obs.size() - 1);
            CHECK(store.mean(0, j) == Catch::Approx(mean).epsilon(1e-10));
            CHECK(store.variance(0, j) == Catch::Approx(var).epsilon(1e-10));
        }
    }
}

TEST_CASE("SampleStore: variance needs two replications") {
    SampleStore store(2, 2);
    store.record_replications(0, std::vector<ObjVec>{{1.0, 2.0}});
    CHECK_THROWS_AS(store.variance(0, 0), std::logic_error);
    CHECK_THROWS_AS(store.mean(1, 0), std::logic_error);
    CHECK_THROWS_AS(store.record_replications(0, std::vector<ObjVec>{{1.0}}), std::invalid_argument);
}
