// Command-line harness: candidate-set generation, experiment runs, aggregation,
// and paired comparisons between record files.

#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "skmors/harness.hpp"
#include "skmors/problems.hpp"

namespace {

skmors::CandidateSet obtain_candidates(const skmors::ExperimentConfig& cfg) {
    if (!cfg.candidates_file.empty()) return skmors::load_candidates(cfg.candidates_file);
    const skmors::Problem problem = skmors::Problem::by_name(cfg.problem);
    return skmors::generate_candidates(problem, cfg.set_size, cfg.n_pareto, cfg.generation_seed,
                                       cfg.proximity);
}

void write_sidecar(const std::string& records_path, const skmors::ExperimentConfig& cfg,
                   const skmors::CandidateSet& set, const skmors::ExperimentResult& result) {
    nlohmann::json j;
    j["config"] = cfg;
    j["candidates"] = {{"problem", set.problem_name},
                       {"size", set.size()},
                       {"n_pareto", set.true_front.size()},
                       {"seed", set.seed},
                       {"file", cfg.candidates_file}};
    nlohmann::json reps = nlohmann::json::array();
    for (const skmors::MacrorepOutcome& mo : result.macroreps) {
        nlohmann::json entry = {{"macrorep", mo.macrorep}, {"simulator_calls", mo.simulator_calls}};
        if (mo.aborted) entry["aborted"] = mo.abort_reason;
        reps.push_back(entry);
    }
    j["macroreps"] = reps;
    std::ofstream out(records_path + ".json");
    if (!out) throw std::runtime_error("cannot write sidecar next to '" + records_path + "'");
    out << j.dump(2) << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic-kriging multiobjective ranking and selection harness"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Generate a candidate set and write it as JSON");
    std::string gen_problem = "WFG4";
    std::size_t gen_size = 100, gen_pareto = 20;
    std::uint64_t gen_seed = 1;
    bool gen_no_proximity = false;
    std::string gen_out = "candidates.json";
    gen->add_option("--problem", gen_problem, "WFG3|WFG4|DTLZ7")->capture_default_str();
    gen->add_option("--size", gen_size, "number of designs")->capture_default_str();
    gen->add_option("--pareto", gen_pareto, "number of truly Pareto-optimal designs")->capture_default_str();
    gen->add_option("--seed", gen_seed, "generation seed")->capture_default_str();
    gen->add_flag("--uniform", gen_no_proximity, "sample dominated designs uniformly instead of near the front");
    gen->add_option("-o,--out", gen_out, "output file")->capture_default_str();

    // run
    auto* run = app.add_subcommand("run", "Run an experiment and write records CSV plus a JSON sidecar");
    skmors::ExperimentConfig cfg;
    std::string cfg_file;
    std::string noise_name = "medium";
    run->add_option("--config", cfg_file, "JSON config file (flags override its fields)");
    run->add_option("--problem", cfg.problem, "WFG3|WFG4|DTLZ7");
    run->add_option("--noise", noise_name, "off|low|medium|high");
    run->add_option("--candidates", cfg.candidates_file, "candidate-set JSON (skips generation)");
    run->add_option("--size", cfg.set_size, "generated set size");
    run->add_option("--pareto", cfg.n_pareto, "generated true-Pareto count");
    run->add_option("--gen-seed", cfg.generation_seed, "candidate generation seed");
    run->add_option("--variant", cfg.variant, "allocation variant");
    run->add_option("--budget", cfg.budget, "replications per iteration");
    run->add_option("--iterations", cfg.iterations, "iteration count");
    run->add_option("--macroreps", cfg.macroreps, "macroreplication count");
    run->add_option("--r0", cfg.initial_reps, "initial replications per design");
    run->add_option("--omega", cfg.omega, "confidence-bound width");
    run->add_option("--seed", cfg.seed, "root seed");
    run->add_option("--threads", cfg.threads, "concurrent macroreplications");
    run->add_option("-o,--out", cfg.output, "records CSV path");

    // report
    auto* rep = app.add_subcommand("report", "Aggregate records into per-iteration means and CIs");
    std::string rep_in, rep_out = "aggregate.csv";
    rep->add_option("--records", rep_in, "records CSV")->required();
    rep->add_option("-o,--out", rep_out, "aggregate CSV path")->capture_default_str();

    // compare
    auto* cmp = app.add_subcommand("compare", "Paired one-sided Wilcoxon test on F1 at an iteration");
    std::string cmp_a, cmp_b;
    int cmp_iter = 0;
    cmp->add_option("--a", cmp_a, "records CSV of the candidate winner")->required();
    cmp->add_option("--b", cmp_b, "records CSV of the baseline")->required();
    cmp->add_option("--iteration", cmp_iter, "iteration to compare at")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) {
            const skmors::Problem problem = skmors::Problem::by_name(gen_problem);
            const skmors::CandidateSet set =
                skmors::generate_candidates(problem, gen_size, gen_pareto, gen_seed, !gen_no_proximity);
            const std::string path = skmors::resolve_output_path(gen_out);
            skmors::save_candidates(set, path);
            std::cout << "wrote " << path << " (" << set.size() << " designs, " << set.true_front.size()
                      << " on the true front)\n";
            return 0;
        }
        if (run->parsed()) {
            if (!cfg_file.empty()) {
                std::ifstream in(cfg_file);
                if (!in) throw std::invalid_argument("cannot open config '" + cfg_file + "'");
                nlohmann::json j;
                in >> j;
                skmors::ExperimentConfig from_file = j.get<skmors::ExperimentConfig>();
                // flags given on the command line win over config-file values
                skmors::ExperimentConfig flags = cfg;
                cfg = from_file;
                for (const CLI::Option* opt : run->get_options()) {
                    if (opt->count() == 0) continue;
                    const std::string name = opt->get_name();
                    if (name == "--problem") cfg.problem = flags.problem;
                    else if (name == "--candidates") cfg.candidates_file = flags.candidates_file;
                    else if (name == "--size") cfg.set_size = flags.set_size;
                    else if (name == "--pareto") cfg.n_pareto = flags.n_pareto;
                    else if (name == "--gen-seed") cfg.generation_seed = flags.generation_seed;
                    else if (name == "--variant") cfg.variant = flags.variant;
                    else if (name == "--budget") cfg.budget = flags.budget;
                    else if (name == "--iterations") cfg.iterations = flags.iterations;
                    else if (name == "--macroreps") cfg.macroreps = flags.macroreps;
                    else if (name == "--r0") cfg.initial_reps = flags.initial_reps;
                    else if (name == "--omega") cfg.omega = flags.omega;
                    else if (name == "--seed") cfg.seed = flags.seed;
                    else if (name == "--threads") cfg.threads = flags.threads;
                    else if (name == "-o,--out") cfg.output = flags.output;
                }
            }
            if (run->count("--noise") > 0 || cfg_file.empty()) cfg.noise = skmors::parse_noise_level(noise_name);
            if (cfg.output.empty()) cfg.output = "records.csv";
            cfg.validate();

            const skmors::CandidateSet set = obtain_candidates(cfg);
            const std::string path = skmors::resolve_output_path(cfg.output);
            std::ofstream out(path);
            if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
            out << skmors::records_csv_header() << "\n";

            const skmors::ExperimentResult result =
                skmors::run_experiment(cfg, set, [&](const skmors::MacrorepOutcome& mo) {
                    for (const skmors::IterationRecord& r : mo.records)
                        out << skmors::record_csv_row(r) << "\n";
                    out.flush();
                    std::cout << "macrorep " << mo.macrorep << (mo.aborted ? " ABORTED: " + mo.abort_reason : " done")
                              << "\n";
                });
            write_sidecar(path, cfg, set, result);
            std::cout << "wrote " << path << " and " << path << ".json\n";
            for (const skmors::MacrorepOutcome& mo : result.macroreps)
                if (mo.aborted) return 2;
            return 0;
        }
        if (rep->parsed()) {
            const auto records = skmors::read_records_csv(rep_in);
            const std::string path = skmors::resolve_output_path(rep_out);
            skmors::write_aggregate_csv(path, skmors::aggregate(records));
            std::cout << "wrote " << path << "\n";
            return 0;
        }
        if (cmp->parsed()) {
            const auto ra = skmors::read_records_csv(cmp_a);
            const auto rb = skmors::read_records_csv(cmp_b);
            const skmors::ComparisonResult res = skmors::compare_f1(ra, rb, cmp_iter);
            std::cout << "pairs=" << res.n_pairs << " mean_a=" << res.mean_a << " mean_b=" << res.mean_b
                      << " w_plus=" << res.w_plus << " p_one_sided=" << res.p_value << "\n";
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
