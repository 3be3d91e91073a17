#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <vector>

#include "skmors/core.hpp"
#include "skmors/problems.hpp"
#include "skmors/rng.hpp"

using namespace skmors;

namespace {

// Independent transcription of the benchmark definitions used as a cross-check.
double ref_s_linear(double y, double a) { return std::fabs(y - a) / std::fabs(std::floor(a - y) + a); }

ObjVec ref_wfg3(const std::vector<double>& z, int k) {
    const int n = static_cast<int>(z.size());
    std::vector<double> y(z.size());
    for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(i)] / (2.0 * (i + 1));
    for (int i = k; i < n; ++i) y[static_cast<std::size_t>(i)] = ref_s_linear(y[static_cast<std::size_t>(i)], 0.35);
    std::vector<double> t2(y.begin(), y.begin() + k);
    for (int i = 0; i < (n - k) / 2; ++i) {
        const double u = y[static_cast<std::size_t>(k + 2 * i)];
        const double v = y[static_cast<std::size_t>(k + 2 * i + 1)];
        t2.push_back((u + v + 2.0 * std::fabs(u - v)) / 3.0); // r_nonsep with A = 2
    }
    double pos = 0.0;
    for (int i = 0; i < k; ++i) pos += t2[static_cast<std::size_t>(i)];
    pos /= k;
    double dist = 0.0;
    for (std::size_t i = static_cast<std::size_t>(k); i < t2.size(); ++i) dist += t2[i];
    dist /= static_cast<double>(t2.size() - static_cast<std::size_t>(k));
    return {dist + 2.0 * pos, dist + 4.0 * (1.0 - pos)};
}

ObjVec ref_dtlz7(const std::vector<double>& x) {
    const std::size_t d = x.size();
    double g = 0.0;
    for (std::size_t q = 1; q < d; ++q) g += x[q];
    g = 1.0 + 9.0 * g / static_cast<double>(d - 1);
    const double f1 = x[0];
    const double f2 = (1.0 + g) * (2.0 - f1 / (1.0 + g) * (1.0 + std::sin(3.0 * M_PI * f1)));
    return {f1, f2};
}

} // namespace

TEST_CASE("dtlz7: worked evaluation") {
    const Problem p = Problem::dtlz7();
    const ObjVec f0 = p.eval_true({0.0, 0.0});
    CHECK(f0[0] == Catch::Approx(0.0));
    CHECK(f0[1] == Catch::Approx(4.0));

    std::mt19937_64 eng(131);
    for (int rep = 0; rep < 100; ++rep) {
        const std::vector<double> x = {uniform01(eng), uniform01(eng)};
        const ObjVec got = p.eval_true(x);
        const ObjVec want = ref_dtlz7(x);
        CHECK(got[0] == Catch::Approx(want[0]).margin(1e-9));
        CHECK(got[1] == Catch::Approx(want[1]).margin(1e-9));
    }
}

TEST_CASE("wfg3: matches the transcription and has a linear optimal front") {
    const Problem p = Problem::wfg3();
    std::mt19937_64 eng(137);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> z(5);
        for (int q = 0; q < 5; ++q) z[static_cast<std::size_t>(q)] = uniform_in(eng, 0.0, 2.0 * (q + 1));
        const ObjVec got = p.eval_true(z);
        const ObjVec want = ref_wfg3(z, p.wfg_position_params());
        CHECK(got[0] == Catch::Approx(want[0]).margin(1e-9));
        CHECK(got[1] == Catch::Approx(want[1]).margin(1e-9));
    }
    // optimal parameterization: f2 = 4 - 2 f1 with f1 in [0, 2]
    for (int rep = 0; rep < 50; ++rep) {
        const std::vector<double> x = p.pareto_sample(eng);
        const ObjVec f = p.eval_true(x);
        CHECK(f[1] == Catch::Approx(4.0 - 2.0 * f[0]).margin(1e-9));
        CHECK(f[0] >= -1e-12);
        CHECK(f[0] <= 2.0 + 1e-12);
    }
}

TEST_CASE("wfg4: optimal designs sit on the concave ellipse quadrant") {
    const Problem p = Problem::wfg4();
    std::mt19937_64 eng(139);
    for (int rep = 0; rep < 50; ++rep) {
        const std::vector<double> x = p.pareto_sample(eng);
        const ObjVec f = p.eval_true(x);
        const double radius = std::pow(f[0] / 2.0, 2) + std::pow(f[1] / 4.0, 2);
        CHECK(radius == Catch::Approx(1.0).margin(1e-9));
    }
    // determinism
    const std::vector<double> x = p.pareto_sample(eng);
    CHECK(p.eval_true(x) == p.eval_true(x));
}

TEST_CASE("problems: domain validation and configuration errors") {
    const Problem p = Problem::dtlz7();
    CHECK_THROWS_AS(p.eval_true({0.5, 1.5}), std::invalid_argument);
    CHECK_THROWS_AS(p.eval_true({0.5}), std::invalid_argument);
    CHECK_THROWS_AS(Problem::by_name("ZDT1"), std::invalid_argument);
    CHECK_THROWS_AS(Problem::wfg3(5, 2), std::invalid_argument); // odd distance block
    CHECK_NOTHROW(Problem::wfg3(5, 3));
}

TEST_CASE("noise_sd: linear interpolation between the level bounds") {
    CandidateSet set;
    set.true_objectives = {{0.0, 0.0}, {5.0, 0.0}, {10.0, 0.0}};
    set.refresh_ranges();
    REQUIRE(set.objective_range[0] == Catch::Approx(10.0));

    const NoiseSpec high{NoiseLevel::High};
    CHECK(noise_sd(set, high, 0, 0) == Catch::Approx(1.0 * 10.0));  // at the minimum
    CHECK(noise_sd(set, high, 2, 0) == Catch::Approx(2.0 * 10.0));  // at the maximum
    CHECK(noise_sd(set, high, 1, 0) == Catch::Approx(1.5 * 10.0));  // midpoint

    const NoiseSpec low{NoiseLevel::Low};
    CHECK(noise_sd(set, low, 0, 0) == Catch::Approx(0.001 * 10.0));
    CHECK(noise_sd(set, low, 2, 0) == Catch::Approx(0.5 * 10.0));
    const NoiseSpec off{NoiseLevel::Off};
    CHECK(noise_sd(set, off, 1, 0) == 0.0);
}

TEST_CASE("sample_observation: unbiased with the requested spread") {
    const Problem p = Problem::wfg4();
    CandidateSet set = generate_candidates(p, 10, 3, 42);
    const NoiseSpec spec{NoiseLevel::Medium};

    // zero noise reproduces the true values exactly
    std::mt19937_64 eng0 = make_stream(1, 2);
    CHECK(sample_observation(set, NoiseSpec{NoiseLevel::Off}, 4, eng0) == set.true_objectives[4]);

    // identical streams give identical replications
    std::mt19937_64 a = make_stream(7, 1), b = make_stream(7, 1);
    for (int k = 0; k < 10; ++k) CHECK(sample_observation(set, spec, 2, a) == sample_observation(set, spec, 2, b));

    // law of large numbers at one design
    const std::size_t i = 5, j = 0;
    const double tau = noise_sd(set, spec, i, j);
    std::mt19937_64 eng = make_stream(11, 3);
    const int n = 100000;
    double sum = 0.0, ss = 0.0;
    for (int k = 0; k < n; ++k) {
        const double v = sample_observation(set, spec, i, eng)[j];
        sum += v;
        ss += v * v;
    }
    const double mean = sum / n;
    const double sd = std::sqrt((ss - n * mean * mean) / (n - 1));
    CHECK(std::fabs(mean - set.true_objectives[i][j]) <= 4.0 * tau / std::sqrt(static_cast<double>(n)));
    CHECK(sd == Catch::Approx(tau).epsilon(0.02));
}

TEST_CASE("generate_candidates: scenario sizes and label invariant") {
    struct Scenario {
        Problem problem;
        std::size_t size, pareto;
    };
    const std::vector<Scenario> scenarios = {
        {Problem::wfg3(), 100, 20},
        {Problem::wfg4(), 100, 20},
        {Problem::dtlz7(), 100, 50},
        {Problem::wfg4(), 50, 10},
    };
    for (const auto& sc : scenarios) {
        const CandidateSet set = generate_candidates(sc.problem, sc.size, sc.pareto, 7);
        CHECK(set.size() == sc.size);
        CHECK(set.true_front.size() == sc.pareto);
        std::vector<std::size_t> expect(sc.pareto);
        std::iota(expect.begin(), expect.end(), 0);
        CHECK(set.true_front == expect);
        CHECK(pareto_front(set.true_objectives) == set.true_front);
        for (const Design& dsg : set.designs) CHECK_NOTHROW(sc.problem.eval_true(dsg.x));
    }
    CHECK_THROWS_AS(generate_candidates(Problem::wfg4(), 10, 11, 1), std::invalid_argument);
}

TEST_CASE("generate_candidates: deterministic in the seed") {
    const Problem p = Problem::dtlz7();
    const CandidateSet a = generate_candidates(p, 40, 20, 99);
    const CandidateSet b = generate_candidates(p, 40, 20, 99);
    const CandidateSet c = generate_candidates(p, 40, 20, 100);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.designs[i].x == b.designs[i].x);
    bool all_same = true;
    for (std::size_t i = 0; i < a.size(); ++i) all_same &= a.designs[i].x == c.designs[i].x;
    CHECK_FALSE(all_same);
}

TEST_CASE("candidate set: JSON round trip is bit exact") {
    const CandidateSet set = generate_candidates(Problem::wfg4(), 30, 8, 654);
    const std::string path = "candidates_roundtrip_test.json";
    save_candidates(set, path);
    const CandidateSet loaded = load_candidates(path);
    std::remove(path.c_str());

    CHECK(loaded.problem_name == set.problem_name);
    CHECK(loaded.seed == set.seed);
    CHECK(loaded.true_front == set.true_front);
    REQUIRE(loaded.size() == set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        CHECK(loaded.designs[i].x == set.designs[i].x);           // bitwise
        CHECK(loaded.true_objectives[i] == set.true_objectives[i]);
    }
    CHECK(loaded.objective_range == set.objective_range);
}
