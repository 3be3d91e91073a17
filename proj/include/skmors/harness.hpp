#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <future>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "skmors/allocators.hpp"
#include "skmors/core.hpp"
#include "skmors/kriging.hpp"
#include "skmors/metrics.hpp"
#include "skmors/problems.hpp"
#include "skmors/rng.hpp"
#include "skmors/stats.hpp"

namespace skmors {

/// Everything a run needs: problem instance, allocation variant, budgets, seeds.
struct ExperimentConfig {
    std::string problem = "WFG4";
    NoiseLevel noise = NoiseLevel::Medium;

    // Candidate set: loaded from file when set, generated otherwise.
    std::string candidates_file;
    std::size_t set_size = 100;
    std::size_t n_pareto = 20;
    std::uint64_t generation_seed = 1;
    bool proximity = true;

    std::string variant = "SKMORS_box";
    int budget = 500;      // replications allocated per iteration
    int iterations = 30;
    int macroreps = 30;
    int initial_reps = 5;  // replications per design before any allocation
    double omega = 3.0;
    std::uint64_t seed = 1;
    int threads = 1;
    int fit_restarts = 8;   // Latin-hypercube starts for the first fit
    int refit_restarts = 3; // fresh starts on refits, on top of the warm start
    std::string output;

    void validate() const {
        make_allocator(variant); // throws on unknown names
        if (budget < 0) throw std::invalid_argument("config: budget must be >= 0");
        if (iterations < 0) throw std::invalid_argument("config: iterations must be >= 0");
        if (macroreps < 1) throw std::invalid_argument("config: macroreps must be >= 1");
        if (initial_reps < 3) throw std::invalid_argument("config: initial replications must be >= 3");
        if (!(omega > 0.0)) throw std::invalid_argument("config: omega must be positive");
        if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
        if (candidates_file.empty()) {
            Problem::by_name(problem);
            if (n_pareto == 0 || n_pareto > set_size)
                throw std::invalid_argument("config: need 0 < n_pareto <= set_size");
        }
    }
};

inline void to_json(nlohmann::json& j, const ExperimentConfig& c) {
    j = nlohmann::json{{"problem", c.problem},
                       {"noise", noise_level_name(c.noise)},
                       {"candidates_file", c.candidates_file},
                       {"set_size", c.set_size},
                       {"n_pareto", c.n_pareto},
                       {"generation_seed", c.generation_seed},
                       {"proximity", c.proximity},
                       {"variant", c.variant},
                       {"budget", c.budget},
                       {"iterations", c.iterations},
                       {"macroreps", c.macroreps},
                       {"initial_reps", c.initial_reps},
                       {"omega", c.omega},
                       {"seed", c.seed},
                       {"threads", c.threads},
                       {"fit_restarts", c.fit_restarts},
                       {"refit_restarts", c.refit_restarts},
                       {"output", c.output}};
}

inline void from_json(const nlohmann::json& j, ExperimentConfig& c) {
    const ExperimentConfig defaults;
    c.problem = j.value("problem", defaults.problem);
    c.noise = parse_noise_level(j.value("noise", noise_level_name(defaults.noise)));
    c.candidates_file = j.value("candidates_file", defaults.candidates_file);
    c.set_size = j.value("set_size", defaults.set_size);
    c.n_pareto = j.value("n_pareto", defaults.n_pareto);
    c.generation_seed = j.value("generation_seed", defaults.generation_seed);
    c.proximity = j.value("proximity", defaults.proximity);
    c.variant = j.value("variant", defaults.variant);
    c.budget = j.value("budget", defaults.budget);
    c.iterations = j.value("iterations", defaults.iterations);
    c.macroreps = j.value("macroreps", defaults.macroreps);
    c.initial_reps = j.value("initial_reps", defaults.initial_reps);
    c.omega = j.value("omega", defaults.omega);
    c.seed = j.value("seed", defaults.seed);
    c.threads = j.value("threads", defaults.threads);
    c.fit_restarts = j.value("fit_restarts", defaults.fit_restarts);
    c.refit_restarts = j.value("refit_restarts", defaults.refit_restarts);
    c.output = j.value("output", defaults.output);
}

/// One per-iteration diagnostic row; iteration 0 is the post-initialization snapshot.
struct IterationRecord {
    int macrorep = 0;
    int iteration = 0;
    long long cum_reps = 0;
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    long long mce = 0;
    long long mci = 0;
    std::size_t retained = 0;
    std::size_t front_size = 0;
    long long wall_ms = 0;
};

struct MacrorepOutcome {
    int macrorep = 0;
    std::vector<IterationRecord> records;
    long long simulator_calls = 0;
    bool aborted = false;
    std::string abort_reason;
};

struct ExperimentResult {
    std::vector<IterationRecord> records;
    std::vector<MacrorepOutcome> macroreps;
};

namespace detail {

struct FittedModels {
    std::vector<SKModel> per_objective;
    ObjMatrix predictions;    // n x m
    ObjMatrix prediction_var; // n x m
};

inline FittedModels fit_all(const Eigen::MatrixXd& x, const SampleStore& store,
                            const std::vector<std::optional<KernelParams>>& warm, int restarts,
                            std::uint64_t fit_seed, double jitter_cap) {
    const std::size_t m = store.n_objectives();
    FittedModels out;
    out.predictions.assign(store.n_designs(), ObjVec(m, 0.0));
    out.prediction_var.assign(store.n_designs(), ObjVec(m, 0.0));
    for (std::size_t j = 0; j < m; ++j) {
        FitOptions opts;
        opts.restarts = restarts;
        opts.warm_start = warm[j];
        opts.seed = substream_seed(fit_seed, j);
        opts.jitter_cap = jitter_cap;
        out.per_objective.push_back(fit(x, store, j, opts));
        const auto [means, vars] = out.per_objective.back().predict_training();
        for (std::size_t i = 0; i < store.n_designs(); ++i) {
            out.predictions[i][j] = means[i];
            out.prediction_var[i][j] = vars[i];
        }
    }
    return out;
}

inline MacrorepOutcome run_macrorep(const ExperimentConfig& cfg, const CandidateSet& set,
                                    int macrorep) {
    const std::size_t n = set.size();
    const std::size_t m = static_cast<std::size_t>(set.n_objectives);
    const NoiseSpec noise{cfg.noise};
    const std::unique_ptr<Allocator> allocator = make_allocator(cfg.variant);
    const std::uint64_t root = substream_seed(cfg.seed, 0x6d616372ULL, static_cast<std::uint64_t>(macrorep));

    Eigen::MatrixXd x(n, set.dimension);
    for (std::size_t i = 0; i < n; ++i)
        for (int q = 0; q < set.dimension; ++q) x(static_cast<Eigen::Index>(i), q) = set.designs[i].x[static_cast<std::size_t>(q)];

    // One replication stream per design, so draws do not depend on sampling order.
    std::vector<std::mt19937_64> streams;
    streams.reserve(n);
    for (std::size_t i = 0; i < n; ++i) streams.push_back(make_stream(root, 0x726570ULL, i));

    MacrorepOutcome out;
    out.macrorep = macrorep;

    SampleStore store(n, m);
    auto draw = [&](std::size_t i, int count) {
        std::vector<ObjVec> obs;
        obs.reserve(static_cast<std::size_t>(count));
        for (int k = 0; k < count; ++k) obs.push_back(sample_observation(set, noise, i, streams[i]));
        store.record_replications(i, obs);
        out.simulator_calls += count;
    };

    using Clock = std::chrono::steady_clock;
    auto t0 = Clock::now();
    for (std::size_t i = 0; i < n; ++i) draw(i, cfg.initial_reps);

    const bool with_models = allocator->needs_models();
    FittedModels models;
    std::vector<std::optional<KernelParams>> warm(m);
    auto refit = [&](int iteration, int restarts) {
        const std::uint64_t fit_seed = substream_seed(root, 0xf17ULL, static_cast<std::uint64_t>(iteration));
        try {
            models = fit_all(x, store, warm, restarts, fit_seed, 1e-4);
        } catch (const model_fit_error&) {
            // one retry with a higher jitter ceiling before giving up on the macroreplication
            models = fit_all(x, store, warm, restarts, substream_seed(fit_seed, 1), 1e-2);
        }
        for (std::size_t j = 0; j < m; ++j) warm[j] = models.per_objective[j].kernel_original_units();
    };

    auto identify = [&]() {
        return allocator->identifies_with_predictions() ? pareto_front(models.predictions)
                                                        : pareto_front(store.means());
    };
    auto record = [&](int iteration, std::size_t retained, std::size_t front_size) {
        const std::vector<std::size_t> identified = identify();
        const ErrorCounts counts = classify_errors(identified, set.true_front);
        IterationRecord rec;
        rec.macrorep = macrorep;
        rec.iteration = iteration;
        rec.cum_reps = out.simulator_calls;
        rec.f1 = f1(counts);
        rec.precision = precision(counts);
        rec.recall = recall(counts);
        rec.mce = counts.fn;
        rec.mci = counts.fp;
        rec.retained = retained;
        rec.front_size = front_size > 0 ? front_size : identified.size();
        rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
        out.records.push_back(rec);
        t0 = Clock::now();
    };

    try {
        if (with_models) refit(0, cfg.fit_restarts);
        record(0, n, 0);

        for (int t = 1; t <= cfg.iterations; ++t) {
            IterationState state;
            const ObjMatrix means = store.means();
            const ObjMatrix mean_var = store.mean_variances();
            state.means = &means;
            state.mean_var = &mean_var;
            state.predictions = with_models ? &models.predictions : nullptr;
            state.prediction_var = with_models ? &models.prediction_var : nullptr;
            state.omega = cfg.omega;

            const AllocationOutcome alloc = allocator->allocate(state, cfg.budget);
            if (plan_total(alloc.plan) != cfg.budget)
                throw std::logic_error("allocation plan does not sum to the budget");
            for (std::size_t i = 0; i < n; ++i)
                if (alloc.plan[i] > 0) draw(i, alloc.plan[i]);

            if (with_models) refit(t, cfg.refit_restarts);
            record(t, alloc.retained_count, alloc.criteria_front_size);
        }
    } catch (const std::exception& err) {
        out.aborted = true;
        out.abort_reason = err.what();
    }
    return out;
}

inline std::string format_double(double v) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

} // namespace detail

/// Run all macroreplications (possibly concurrently); `on_macrorep` is invoked in
/// macroreplication order as results become available, so output files can be
/// appended to deterministically while the run progresses.
inline ExperimentResult
run_experiment(const ExperimentConfig& cfg, const CandidateSet& set,
               const std::function<void(const MacrorepOutcome&)>& on_macrorep = nullptr) {
    cfg.validate();
    ExperimentResult result;
    result.macroreps.resize(static_cast<std::size_t>(cfg.macroreps));

    const int workers = std::max(1, std::min(cfg.threads, cfg.macroreps));
    if (workers == 1) {
        for (int k = 0; k < cfg.macroreps; ++k) {
            result.macroreps[static_cast<std::size_t>(k)] = detail::run_macrorep(cfg, set, k);
            if (on_macrorep) on_macrorep(result.macroreps[static_cast<std::size_t>(k)]);
        }
    } else {
        std::vector<std::future<MacrorepOutcome>> futures(static_cast<std::size_t>(cfg.macroreps));
        int next = 0;
        auto launch_until = [&](int cap) {
            while (next < cfg.macroreps && next < cap) {
                futures[static_cast<std::size_t>(next)] = std::async(
                    std::launch::async, [&cfg, &set, k = next] { return detail::run_macrorep(cfg, set, k); });
                ++next;
            }
        };
        launch_until(workers);
        for (int k = 0; k < cfg.macroreps; ++k) {
            result.macroreps[static_cast<std::size_t>(k)] = futures[static_cast<std::size_t>(k)].get();
            launch_until(k + 1 + workers);
            if (on_macrorep) on_macrorep(result.macroreps[static_cast<std::size_t>(k)]);
        }
    }
    for (const MacrorepOutcome& mo : result.macroreps)
        result.records.insert(result.records.end(), mo.records.begin(), mo.records.end());
    return result;
}

inline const char* records_csv_header() {
    return "macrorep,iteration,cum_reps,f1,precision,recall,mce,mci,retained,front_size,wall_ms";
}

inline std::string record_csv_row(const IterationRecord& r) {
    std::ostringstream os;
    os << r.macrorep << ',' << r.iteration << ',' << r.cum_reps << ',' << detail::format_double(r.f1)
       << ',' << detail::format_double(r.precision) << ',' << detail::format_double(r.recall) << ','
       << r.mce << ',' << r.mci << ',' << r.retained << ',' << r.front_size << ',' << r.wall_ms;
    return os.str();
}

inline void write_records_csv(const std::string& path, const std::vector<IterationRecord>& records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_records_csv: cannot open '" + path + "'");
    out << records_csv_header() << "\n";
    for (const IterationRecord& r : records) out << record_csv_row(r) << "\n";
}

inline std::vector<IterationRecord> read_records_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_records_csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_records_csv: empty file");
    if (line != records_csv_header())
        throw std::runtime_error("read_records_csv: unexpected header in '" + path + "'");
    std::vector<IterationRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        std::vector<std::string> toks;
        while (std::getline(ss, tok, ',')) toks.push_back(tok);
        if (toks.size() != 11) throw std::runtime_error("read_records_csv: malformed row");
        IterationRecord r;
        r.macrorep = std::stoi(toks[0]);
        r.iteration = std::stoi(toks[1]);
        r.cum_reps = std::stoll(toks[2]);
        r.f1 = std::stod(toks[3]);
        r.precision = std::stod(toks[4]);
        r.recall = std::stod(toks[5]);
        r.mce = std::stoll(toks[6]);
        r.mci = std::stoll(toks[7]);
        r.retained = static_cast<std::size_t>(std::stoull(toks[8]));
        r.front_size = static_cast<std::size_t>(std::stoull(toks[9]));
        r.wall_ms = std::stoll(toks[10]);
        records.push_back(r);
    }
    return records;
}

/// Canonical serialization of every record field except wall time; two runs with the
/// same config and seed must produce identical digests.
inline std::string records_digest(const std::vector<IterationRecord>& records) {
    std::ostringstream os;
    for (const IterationRecord& r : records) {
        os << r.macrorep << '|' << r.iteration << '|' << r.cum_reps << '|'
           << detail::format_double(r.f1) << '|' << detail::format_double(r.precision) << '|'
           << detail::format_double(r.recall) << '|' << r.mce << '|' << r.mci << '|' << r.retained
           << '|' << r.front_size << '\n';
    }
    return os.str();
}

/// Per-iteration mean and 95% t-interval half-width across macroreplications.
struct AggregateRow {
    int iteration = 0;
    int n_macroreps = 0;
    double mean_f1 = 0.0;
    double ci95_f1 = 0.0;
    bool ci_defined = false;
    double mean_precision = 0.0;
    double mean_recall = 0.0;
    double mean_mce = 0.0;
    double mean_mci = 0.0;
    double mean_retained = 0.0;
    double mean_front_size = 0.0;
};

inline std::vector<AggregateRow> aggregate(const std::vector<IterationRecord>& records) {
    std::vector<int> iterations;
    for (const IterationRecord& r : records) iterations.push_back(r.iteration);
    std::sort(iterations.begin(), iterations.end());
    iterations.erase(std::unique(iterations.begin(), iterations.end()), iterations.end());

    std::vector<AggregateRow> rows;
    for (int it : iterations) {
        std::vector<double> f1s, precs, recs, mces, mcis, rets, fronts;
        for (const IterationRecord& r : records) {
            if (r.iteration != it) continue;
            f1s.push_back(r.f1);
            precs.push_back(r.precision);
            recs.push_back(r.recall);
            mces.push_back(static_cast<double>(r.mce));
            mcis.push_back(static_cast<double>(r.mci));
            rets.push_back(static_cast<double>(r.retained));
            fronts.push_back(static_cast<double>(r.front_size));
        }
        AggregateRow row;
        row.iteration = it;
        row.n_macroreps = static_cast<int>(f1s.size());
        row.mean_f1 = mean_of(f1s);
        row.mean_precision = mean_of(precs);
        row.mean_recall = mean_of(recs);
        row.mean_mce = mean_of(mces);
        row.mean_mci = mean_of(mcis);
        row.mean_retained = mean_of(rets);
        row.mean_front_size = mean_of(fronts);
        if (f1s.size() >= 2) {
            row.ci_defined = true;
            const double sd = std::sqrt(sample_variance(f1s));
            const double tq = student_t_quantile(0.975, static_cast<double>(f1s.size() - 1));
            row.ci95_f1 = tq * sd / std::sqrt(static_cast<double>(f1s.size()));
        }
        rows.push_back(row);
    }
    return rows;
}

inline void write_aggregate_csv(const std::string& path, const std::vector<AggregateRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_aggregate_csv: cannot open '" + path + "'");
    out << "iteration,n_macroreps,mean_f1,ci95_f1,ci_defined,mean_precision,mean_recall,"
           "mean_mce,mean_mci,mean_retained,mean_front_size\n";
    for (const AggregateRow& r : rows) {
        out << r.iteration << ',' << r.n_macroreps << ',' << detail::format_double(r.mean_f1) << ','
            << (r.ci_defined ? detail::format_double(r.ci95_f1) : std::string("nan")) << ','
            << (r.ci_defined ? 1 : 0) << ',' << detail::format_double(r.mean_precision) << ','
            << detail::format_double(r.mean_recall) << ',' << detail::format_double(r.mean_mce) << ','
            << detail::format_double(r.mean_mci) << ',' << detail::format_double(r.mean_retained)
            << ',' << detail::format_double(r.mean_front_size) << "\n";
    }
}

/// Paired one-sided comparison of F1 at one iteration: p-value for "A beats B".
struct ComparisonResult {
    std::size_t n_pairs = 0;
    double mean_a = 0.0;
    double mean_b = 0.0;
    double w_plus = 0.0;
    double p_value = 1.0;
};

inline ComparisonResult compare_f1(const std::vector<IterationRecord>& a,
                                   const std::vector<IterationRecord>& b, int iteration) {
    auto collect = [iteration](const std::vector<IterationRecord>& records) {
        std::vector<std::pair<int, double>> vals;
        for (const IterationRecord& r : records)
            if (r.iteration == iteration) vals.emplace_back(r.macrorep, r.f1);
        std::sort(vals.begin(), vals.end());
        return vals;
    };
    const auto va = collect(a);
    const auto vb = collect(b);
    if (va.empty() || va.size() != vb.size())
        throw std::invalid_argument("compare_f1: runs have different macroreplications at this iteration");
    for (std::size_t i = 0; i < va.size(); ++i)
        if (va[i].first != vb[i].first)
            throw std::invalid_argument("compare_f1: macroreplication ids do not pair up");

    std::vector<double> fa, fb;
    for (std::size_t i = 0; i < va.size(); ++i) {
        fa.push_back(va[i].second);
        fb.push_back(vb[i].second);
    }
    const WilcoxonResult w = wilcoxon_signed_rank_greater(fa, fb);
    ComparisonResult out;
    out.n_pairs = w.n_pairs;
    out.mean_a = mean_of(fa);
    out.mean_b = mean_of(fb);
    out.w_plus = w.w_plus;
    out.p_value = w.p_value;
    return out;
}

/// Prefix bare output filenames with $SKMORS_OUTPUT_DIR when it is set.
inline std::string resolve_output_path(const std::string& name) {
    if (name.empty() || name.find('/') != std::string::npos) return name;
    const char* dir = std::getenv("SKMORS_OUTPUT_DIR");
    if (dir == nullptr || *dir == '\0') return name;
    std::string out(dir);
    if (out.back() != '/') out += '/';
    return out + name;
}

} // namespace skmors
