#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "skmors/metrics.hpp"

using namespace skmors;

TEST_CASE("classify_errors: set algebra") {
    const std::vector<std::size_t> truth = {0, 1, 2, 3};
    const ErrorCounts perfect = classify_errors(truth, truth);
    CHECK(perfect.tp == 4);
    CHECK(perfect.fp == 0);
    CHECK(perfect.fn == 0);

    const ErrorCounts empty = classify_errors({}, std::vector<std::size_t>(20, 0));
    // identified empty: everything missed
    const std::vector<std::size_t> truth20 = [] {
        std::vector<std::size_t> v(20);
        for (std::size_t i = 0; i < 20; ++i) v[i] = i;
        return v;
    }();
    const ErrorCounts missed = classify_errors({}, truth20);
    CHECK(missed.tp == 0);
    CHECK(missed.fn == 20);
    CHECK(missed.fp == 0);
    (void)empty;

    // 20 truth, 20 identified, 18 overlap
    std::vector<std::size_t> identified;
    for (std::size_t i = 0; i < 18; ++i) identified.push_back(i);
    identified.push_back(50);
    identified.push_back(51);
    const ErrorCounts c = classify_errors(identified, truth20);
    CHECK(c.tp == 18);
    CHECK(c.fp == 2);
    CHECK(c.fn == 2);
}

TEST_CASE("f1: formula and conventions") {
    CHECK(f1({18, 2, 2}) == Catch::Approx(0.9));
    CHECK(precision({18, 2, 2}) == Catch::Approx(0.9));
    CHECK(recall({18, 2, 2}) == Catch::Approx(0.9));
    CHECK(f1({4, 0, 0}) == Catch::Approx(1.0));
    CHECK(f1({0, 3, 5}) == 0.0); // tp = 0 convention
    CHECK(f1({0, 0, 20}) == 0.0);
}

TEST_CASE("f1: harmonic mean properties") {
    for (long long tp = 1; tp <= 10; ++tp)
        for (long long fp = 0; fp <= 5; ++fp)
            for (long long fn = 0; fn <= 5; ++fn) {
                const ErrorCounts c{tp, fp, fn};
                const double v = f1(c);
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
                CHECK(v <= 0.5 * (precision(c) + recall(c)) + 1e-12);
                if (fp == fn) CHECK(v == Catch::Approx(precision(c)));
                CHECK((v == 1.0) == (fp == 0 && fn == 0));
            }
}

TEST_CASE("classify_errors: invariant to id relabeling of correct designs") {
    const ErrorCounts a = classify_errors({3, 7, 9}, {3, 7, 11});
    const ErrorCounts b = classify_errors({7, 3, 9}, {7, 3, 11}); // swapped ids
    CHECK(a.tp == b.tp);
    CHECK(a.fp == b.fp);
    CHECK(a.fn == b.fn);
}
