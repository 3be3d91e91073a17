#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <vector>

#include "skmors/harness.hpp"

using namespace skmors;

namespace {

ExperimentConfig small_config(const std::string& variant) {
    ExperimentConfig cfg;
    cfg.problem = "WFG4";
    cfg.noise = NoiseLevel::Medium;
    cfg.set_size = 12;
    cfg.n_pareto = 4;
    cfg.generation_seed = 5;
    cfg.variant = variant;
    cfg.budget = 24;
    cfg.iterations = 2;
    cfg.macroreps = 2;
    cfg.initial_reps = 4;
    cfg.seed = 17;
    cfg.fit_restarts = 3;
    cfg.refit_restarts = 2;
    return cfg;
}

} // namespace

TEST_CASE("run_experiment: replication accounting and record layout") {
    const ExperimentConfig cfg = small_config("EQUAL");
    const CandidateSet set = generate_candidates(Problem::by_name(cfg.problem), cfg.set_size,
                                                 cfg.n_pareto, cfg.generation_seed);
    const ExperimentResult res = run_experiment(cfg, set);
    REQUIRE(res.macroreps.size() == 2);
    for (const MacrorepOutcome& mo : res.macroreps) {
        CHECK_FALSE(mo.aborted);
        CHECK(mo.simulator_calls ==
              static_cast<long long>(cfg.initial_reps) * static_cast<long long>(cfg.set_size) +
                  static_cast<long long>(cfg.iterations) * cfg.budget);
        REQUIRE(mo.records.size() == static_cast<std::size_t>(cfg.iterations) + 1);
        for (int t = 0; t <= cfg.iterations; ++t) {
            const IterationRecord& r = mo.records[static_cast<std::size_t>(t)];
            CHECK(r.iteration == t);
            CHECK(r.cum_reps == static_cast<long long>(cfg.initial_reps * cfg.set_size + t * cfg.budget));
            CHECK(r.f1 >= 0.0);
            CHECK(r.f1 <= 1.0);
        }
    }
}

TEST_CASE("run_experiment: zero iterations leaves only the initialization snapshot") {
    ExperimentConfig cfg = small_config("MOCBA");
    cfg.iterations = 0;
    const CandidateSet set = generate_candidates(Problem::by_name(cfg.problem), cfg.set_size,
                                                 cfg.n_pareto, cfg.generation_seed);
    const ExperimentResult res = run_experiment(cfg, set);
    for (const MacrorepOutcome& mo : res.macroreps) {
        CHECK(mo.records.size() == 1);
        CHECK(mo.records[0].iteration == 0);
        CHECK(mo.records[0].cum_reps == cfg.initial_reps * static_cast<long long>(cfg.set_size));
    }
}

TEST_CASE("run_experiment: identical seeds give identical records at any thread count") {
    for (const std::string variant : {"EQUAL", "SKMORS_box"}) {
        ExperimentConfig cfg = small_config(variant);
        const CandidateSet set = generate_candidates(Problem::by_name(cfg.problem), cfg.set_size,
                                                     cfg.n_pareto, cfg.generation_seed);
        const ExperimentResult serial = run_experiment(cfg, set);
        cfg.threads = 2;
        const ExperimentResult threaded = run_experiment(cfg, set);
        CHECK(records_digest(serial.records) == records_digest(threaded.records));

        const ExperimentResult repeat = run_experiment(cfg, set);
        CHECK(records_digest(threaded.records) == records_digest(repeat.records));

        ExperimentConfig other = cfg;
        other.seed = cfg.seed + 1;
        const ExperimentResult different = run_experiment(other, set);
        CHECK(records_digest(different.records) != records_digest(serial.records));
    }
}

TEST_CASE("run_experiment: zero noise identifies the true front from iteration one") {
    for (const std::string variant : {"EQUAL", "MOCBA", "SKMORS_box"}) {
        ExperimentConfig cfg = small_config(variant);
        cfg.noise = NoiseLevel::Off;
        const CandidateSet set = generate_candidates(Problem::by_name(cfg.problem), cfg.set_size,
                                                     cfg.n_pareto, cfg.generation_seed);
        const ExperimentResult res = run_experiment(cfg, set);
        for (const MacrorepOutcome& mo : res.macroreps) {
            REQUIRE_FALSE(mo.aborted);
            for (const IterationRecord& r : mo.records)
                if (r.iteration >= 1) CHECK(r.f1 == 1.0);
        }
    }
}

TEST_CASE("aggregate: t-interval on two macroreplications") {
    std::vector<IterationRecord> records(2);
    records[0].macrorep = 0;
    records[0].f1 = 0.8;
    records[1].macrorep = 1;
    records[1].f1 = 1.0;
    const auto rows = aggregate(records);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].mean_f1 == Catch::Approx(0.9));
    CHECK(rows[0].ci_defined);
    // t(0.975, 1) * sd / sqrt(2) with sd = sqrt(0.02)
    CHECK(rows[0].ci95_f1 == Catch::Approx(12.7062047362 * 0.1).epsilon(1e-6));

    // single macroreplication: mean only
    const auto single = aggregate({records[0]});
    CHECK_FALSE(single[0].ci_defined);
    CHECK(single[0].mean_f1 == Catch::Approx(0.8));

    // identical macroreplications collapse the interval
    records[1].f1 = 0.8;
    CHECK(aggregate(records)[0].ci95_f1 == Catch::Approx(0.0).margin(1e-12));

    // ordering of the rows must not matter
    std::vector<IterationRecord> shuffled = {records[1], records[0]};
    CHECK(aggregate(shuffled)[0].mean_f1 == aggregate(records)[0].mean_f1);
}

TEST_CASE("compare_f1: pairing and direction") {
    auto rec = [](int macrorep, int iteration, double f1v) {
        IterationRecord r;
        r.macrorep = macrorep;
        r.iteration = iteration;
        r.f1 = f1v;
        return r;
    };
    std::vector<IterationRecord> a, b;
    for (int k = 0; k < 8; ++k) {
        a.push_back(rec(k, 3, 0.9 + 0.01 * k));
        b.push_back(rec(k, 3, 0.5 + 0.01 * k));
    }
    const ComparisonResult ab = compare_f1(a, b, 3);
    CHECK(ab.n_pairs == 8);
    CHECK(ab.p_value < 0.01);
    const ComparisonResult aa = compare_f1(a, a, 3);
    CHECK(aa.p_value >= 0.5);

    std::vector<IterationRecord> short_b(b.begin(), b.end() - 1);
    CHECK_THROWS_AS(compare_f1(a, short_b, 3), std::invalid_argument);
    CHECK_THROWS_AS(compare_f1(a, b, 4), std::invalid_argument);
}

TEST_CASE("records CSV: round trip and header") {
    ExperimentConfig cfg = small_config("EQUAL");
    const CandidateSet set = generate_candidates(Problem::by_name(cfg.problem), cfg.set_size,
                                                 cfg.n_pareto, cfg.generation_seed);
    const ExperimentResult res = run_experiment(cfg, set);
    const std::string path = "records_roundtrip_test.csv";
    write_records_csv(path, res.records);
    const auto loaded = read_records_csv(path);
    std::remove(path.c_str());
    CHECK(records_digest(loaded) == records_digest(res.records));
}

TEST_CASE("config validation and JSON round trip") {
    ExperimentConfig cfg = small_config("EQUAL");
    CHECK_NOTHROW(cfg.validate());
    cfg.variant = "BOGUS";
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.variant = "EQUAL";
    cfg.initial_reps = 1; // variances would be undefined
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    const ExperimentConfig original = small_config("MOCBA_SKi");
    const nlohmann::json j = original;
    const ExperimentConfig back = j.get<ExperimentConfig>();
    CHECK(back.variant == original.variant);
    CHECK(back.budget == original.budget);
    CHECK(back.noise == original.noise);
    CHECK(back.seed == original.seed);
}

TEST_CASE("resolve_output_path: env-var default directory") {
    unsetenv("SKMORS_OUTPUT_DIR");
    CHECK(resolve_output_path("x.csv") == "x.csv");
    setenv("SKMORS_OUTPUT_DIR", "/tmp/skmors_out", 1);
    CHECK(resolve_output_path("x.csv") == "/tmp/skmors_out/x.csv");
    CHECK(resolve_output_path("sub/x.csv") == "sub/x.csv"); // explicit paths stay put
    unsetenv("SKMORS_OUTPUT_DIR");
}
