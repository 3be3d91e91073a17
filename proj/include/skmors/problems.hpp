#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "skmors/core.hpp"
#include "skmors/rng.hpp"

namespace skmors {

enum class NoiseLevel { Off, Low, Medium, High };

/// Heteroscedastic Gaussian noise specification. The noise standard deviation grows
/// linearly with the objective value between lo*RF_j and hi*RF_j, so it is smallest
/// at the per-objective minimum over the candidate set.
struct NoiseSpec {
    NoiseLevel level = NoiseLevel::Medium;

    double lo_multiplier() const {
        switch (level) {
        case NoiseLevel::Off: return 0.0;
        case NoiseLevel::Low: return 0.001;
        case NoiseLevel::Medium: return 0.01;
        default: return 1.0;
        }
    }
    double hi_multiplier() const {
        switch (level) {
        case NoiseLevel::Off: return 0.0;
        case NoiseLevel::Low: return 0.5;
        case NoiseLevel::Medium: return 1.0;
        default: return 2.0;
        }
    }
};

inline NoiseLevel parse_noise_level(const std::string& s) {
    if (s == "off") return NoiseLevel::Off;
    if (s == "low") return NoiseLevel::Low;
    if (s == "medium") return NoiseLevel::Medium;
    if (s == "high") return NoiseLevel::High;
    throw std::invalid_argument("unknown noise level '" + s + "' (off|low|medium|high)");
}

inline std::string noise_level_name(NoiseLevel level) {
    switch (level) {
    case NoiseLevel::Off: return "off";
    case NoiseLevel::Low: return "low";
    case NoiseLevel::Medium: return "medium";
    default: return "high";
    }
}

namespace wfg {

// Transformation and shape functions of the WFG toolkit (Huband et al. 2006),
// restricted to what WFG3 and WFG4 need.
inline double s_linear(double y, double a) {
    return std::fabs(y - a) / std::fabs(std::floor(a - y) + a);
}

inline double s_multi(double y, int a, double b, double c) {
    const double tmp1 = std::fabs(y - c) / (2.0 * (std::floor(c - y) + c));
    const double tmp2 = (4.0 * a + 2.0) * M_PI * (0.5 - tmp1);
    return (1.0 + std::cos(tmp2) + 4.0 * b * tmp1 * tmp1) / (b + 2.0);
}

inline double r_sum(const std::vector<double>& y) {
    return std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
}

inline double r_nonsep(const std::vector<double>& y, int a) {
    const std::size_t len = y.size();
    double numerator = 0.0;
    for (std::size_t j = 0; j < len; ++j) {
        numerator += y[j];
        for (int k = 0; k <= a - 2; ++k)
            numerator += std::fabs(y[j] - y[(1 + j + static_cast<std::size_t>(k)) % len]);
    }
    const double tmp = std::ceil(a / 2.0);
    const double denominator = static_cast<double>(len) * tmp * (1.0 + 2.0 * a - 2.0 * tmp) / a;
    return numerator / denominator;
}

} // namespace wfg

enum class ProblemName { Wfg3, Wfg4, Dtlz7 };

inline std::string problem_name_string(ProblemName p) {
    switch (p) {
    case ProblemName::Wfg3: return "WFG3";
    case ProblemName::Wfg4: return "WFG4";
    default: return "DTLZ7";
    }
}

/// Bi-objective benchmark problem: deterministic true objectives over a box domain,
/// plus samplers for the known Pareto-optimal manifold and for near-front dominated points.
class Problem {
public:
    static Problem wfg3(int d = 5, int position_params = 1) {
        if (position_params < 1 || d - position_params < 2 || (d - position_params) % 2 != 0)
            throw std::invalid_argument("wfg3: needs k >= 1 and an even, positive number of distance parameters");
        return Problem(ProblemName::Wfg3, d, position_params);
    }
    static Problem wfg4(int d = 5, int position_params = 2) {
        if (position_params < 1 || d - position_params < 1)
            throw std::invalid_argument("wfg4: needs k >= 1 and at least one distance parameter");
        return Problem(ProblemName::Wfg4, d, position_params);
    }
    static Problem dtlz7(int d = 2) {
        if (d < 2) throw std::invalid_argument("dtlz7: needs at least two variables");
        return Problem(ProblemName::Dtlz7, d, 0);
    }
    static Problem by_name(const std::string& name) {
        if (name == "WFG3") return wfg3();
        if (name == "WFG4") return wfg4();
        if (name == "DTLZ7") return dtlz7();
        throw std::invalid_argument("unknown problem '" + name + "' (WFG3|WFG4|DTLZ7)");
    }

    ProblemName name() const { return name_; }
    std::string name_string() const { return problem_name_string(name_); }
    int dimension() const { return d_; }
    int n_objectives() const { return 2; }
    int wfg_position_params() const { return k_; }
    const std::vector<double>& lower() const { return lo_; }
    const std::vector<double>& upper() const { return hi_; }

    /// Deterministic true objective values; x must lie inside the domain box.
    ObjVec eval_true(const std::vector<double>& x) const {
        if (x.size() != static_cast<std::size_t>(d_))
            throw std::invalid_argument("eval_true: wrong dimension");
        for (int q = 0; q < d_; ++q) {
            if (!std::isfinite(x[static_cast<std::size_t>(q)]) ||
                x[static_cast<std::size_t>(q)] < lo_[static_cast<std::size_t>(q)] - 1e-12 ||
                x[static_cast<std::size_t>(q)] > hi_[static_cast<std::size_t>(q)] + 1e-12)
                throw std::invalid_argument("eval_true: point outside the domain box");
        }
        switch (name_) {
        case ProblemName::Wfg3: return eval_wfg3(x);
        case ProblemName::Wfg4: return eval_wfg4(x);
        default: return eval_dtlz7(x);
        }
    }

    /// A design on the problem's Pareto-optimal manifold.
    std::vector<double> pareto_sample(std::mt19937_64& eng) const {
        std::vector<double> x(static_cast<std::size_t>(d_));
        if (name_ == ProblemName::Dtlz7) {
            const double u = sample_record_x1(eng);
            x[0] = u;
            for (int q = 1; q < d_; ++q) x[static_cast<std::size_t>(q)] = 0.0;
            return x;
        }
        for (int q = 0; q < k_; ++q)
            x[static_cast<std::size_t>(q)] = uniform_in(eng, 0.0, hi_[static_cast<std::size_t>(q)]);
        for (int q = k_; q < d_; ++q)
            x[static_cast<std::size_t>(q)] = 0.35 * hi_[static_cast<std::size_t>(q)];
        return x;
    }

    /// A candidate dominated design: near the front (optimal parameterization with the
    /// distance variables pushed off their optimum) or uniform over the domain.
    std::vector<double> dominated_sample(std::mt19937_64& eng, bool proximity) const {
        std::vector<double> x(static_cast<std::size_t>(d_));
        if (!proximity) {
            for (int q = 0; q < d_; ++q)
                x[static_cast<std::size_t>(q)] =
                    uniform_in(eng, lo_[static_cast<std::size_t>(q)], hi_[static_cast<std::size_t>(q)]);
            return x;
        }
        if (name_ == ProblemName::Dtlz7) {
            x[0] = uniform01(eng);
            for (int q = 1; q < d_; ++q) x[static_cast<std::size_t>(q)] = uniform_in(eng, 0.01, 0.2);
            return x;
        }
        for (int q = 0; q < k_; ++q)
            x[static_cast<std::size_t>(q)] = uniform_in(eng, 0.0, hi_[static_cast<std::size_t>(q)]);
        for (int q = k_; q < d_; ++q) {
            const double mag = uniform_in(eng, 0.02, 0.25);
            const double sign = uniform01(eng) < 0.5 ? -1.0 : 1.0;
            const double y = std::clamp(0.35 + sign * mag, 0.0, 1.0);
            x[static_cast<std::size_t>(q)] = y * hi_[static_cast<std::size_t>(q)];
        }
        return x;
    }

private:
    Problem(ProblemName name, int d, int k) : name_(name), d_(d), k_(k) {
        lo_.assign(static_cast<std::size_t>(d_), 0.0);
        hi_.assign(static_cast<std::size_t>(d_), 1.0);
        if (name_ != ProblemName::Dtlz7)
            for (int q = 0; q < d_; ++q) hi_[static_cast<std::size_t>(q)] = 2.0 * (q + 1);
        if (name_ == ProblemName::Dtlz7) build_record_intervals();
    }

    ObjVec eval_wfg3(const std::vector<double>& z) const {
        const int n = d_, k = k_;
        std::vector<double> y(static_cast<std::size_t>(n));
        for (int q = 0; q < n; ++q)
            y[static_cast<std::size_t>(q)] = z[static_cast<std::size_t>(q)] / (2.0 * (q + 1));
        for (int q = k; q < n; ++q)
            y[static_cast<std::size_t>(q)] = wfg::s_linear(y[static_cast<std::size_t>(q)], 0.35);
        // pairwise non-separable reduction of the distance block
        std::vector<double> t2(y.begin(), y.begin() + k);
        for (int i = 0; i < (n - k) / 2; ++i) {
            const std::vector<double> pair = {y[static_cast<std::size_t>(k + 2 * i)],
                                              y[static_cast<std::size_t>(k + 2 * i + 1)]};
            t2.push_back(wfg::r_nonsep(pair, 2));
        }
        const double pos = wfg::r_sum(std::vector<double>(t2.begin(), t2.begin() + k));
        const double dist = wfg::r_sum(std::vector<double>(t2.begin() + k, t2.end()));
        // linear shape, degenerate front
        return ObjVec{dist + 2.0 * pos, dist + 4.0 * (1.0 - pos)};
    }

    ObjVec eval_wfg4(const std::vector<double>& z) const {
        const int n = d_, k = k_;
        std::vector<double> y(static_cast<std::size_t>(n));
        for (int q = 0; q < n; ++q)
            y[static_cast<std::size_t>(q)] =
                wfg::s_multi(z[static_cast<std::size_t>(q)] / (2.0 * (q + 1)), 30, 10.0, 0.35);
        const double pos = wfg::r_sum(std::vector<double>(y.begin(), y.begin() + k));
        const double dist = wfg::r_sum(std::vector<double>(y.begin() + k, y.end()));
        // concave shape
        return ObjVec{dist + 2.0 * std::sin(pos * M_PI / 2.0), dist + 4.0 * std::cos(pos * M_PI / 2.0)};
    }

    ObjVec eval_dtlz7(const std::vector<double>& x) const {
        const int tail = d_ - 1; // d - m + 1 distance variables for m = 2
        double g = 0.0;
        for (int q = d_ - tail; q < d_; ++q) g += x[static_cast<std::size_t>(q)];
        g = 1.0 + 9.0 * g / static_cast<double>(tail);
        const double f1 = x[0];
        const double h = 2.0 - f1 / (1.0 + g) * (1.0 + std::sin(3.0 * M_PI * f1));
        return ObjVec{f1, (1.0 + g) * h};
    }

    // Pareto-optimal x1 regions of the disconnected DTLZ7 front: strict running-max
    // records of c(u) = (u/2)(1 + sin(3 pi u)) on a fine grid, trimmed one cell at
    // the right edges so sampled points are records with margin.
    void build_record_intervals() {
        constexpr int kGrid = 100000;
        double run_max = -1.0;
        bool open = false;
        double start = 0.0, prev = 0.0;
        for (int i = 0; i <= kGrid; ++i) {
            const double u = static_cast<double>(i) / kGrid;
            const double c = 0.5 * u * (1.0 + std::sin(3.0 * M_PI * u));
            const bool record = c > run_max;
            if (record) run_max = c;
            if (record && !open) {
                start = u;
                open = true;
            } else if (!record && open) {
                if (prev > start) record_intervals_.push_back({start, prev});
                open = false;
            }
            prev = u;
        }
        if (open) record_intervals_.push_back({start, 1.0});
        total_record_len_ = 0.0;
        for (const auto& iv : record_intervals_) total_record_len_ += iv.second - iv.first;
    }

    double sample_record_x1(std::mt19937_64& eng) const {
        double t = uniform01(eng) * total_record_len_;
        for (const auto& iv : record_intervals_) {
            const double len = iv.second - iv.first;
            if (t <= len) return iv.first + t;
            t -= len;
        }
        return record_intervals_.back().second;
    }

    ProblemName name_;
    int d_, k_;
    std::vector<double> lo_, hi_;
    std::vector<std::pair<double, double>> record_intervals_;
    double total_record_len_ = 0.0;
};

/// A generated candidate set with its true objective values, the indices of the truly
/// Pareto-optimal members, and the per-objective true ranges RF_j.
struct CandidateSet {
    std::string problem_name;
    int dimension = 0;
    int n_objectives = 2;
    int wfg_position_params = 0;
    std::uint64_t seed = 0;
    std::vector<Design> designs;
    ObjMatrix true_objectives;
    std::vector<std::size_t> true_front;
    std::vector<double> objective_range; // RF_j
    std::vector<double> objective_min, objective_max;

    std::size_t size() const { return designs.size(); }

    Problem problem() const {
        if (problem_name == "WFG3") return Problem::wfg3(dimension, wfg_position_params);
        if (problem_name == "WFG4") return Problem::wfg4(dimension, wfg_position_params);
        if (problem_name == "DTLZ7") return Problem::dtlz7(dimension);
        throw std::invalid_argument("CandidateSet: unknown problem '" + problem_name + "'");
    }

    void refresh_ranges() {
        const std::size_t m = true_objectives.empty() ? 0 : true_objectives[0].size();
        objective_min.assign(m, std::numeric_limits<double>::infinity());
        objective_max.assign(m, -std::numeric_limits<double>::infinity());
        for (const ObjVec& f : true_objectives)
            for (std::size_t j = 0; j < m; ++j) {
                objective_min[j] = std::min(objective_min[j], f[j]);
                objective_max[j] = std::max(objective_max[j], f[j]);
            }
        objective_range.resize(m);
        for (std::size_t j = 0; j < m; ++j) objective_range[j] = objective_max[j] - objective_min[j];
    }
};

/// Noise standard deviation for design i, objective j: linear in the true objective
/// value between lo*RF_j (at the set-wide objective minimum) and hi*RF_j.
inline double noise_sd(const CandidateSet& set, const NoiseSpec& spec, std::size_t i, std::size_t j) {
    const double rf = set.objective_range[j];
    const double tau_min = spec.lo_multiplier() * rf;
    const double tau_max = spec.hi_multiplier() * rf;
    const double span = set.objective_max[j] - set.objective_min[j];
    const double frac = span > 0.0 ? (set.true_objectives[i][j] - set.objective_min[j]) / span : 0.0;
    return tau_min + frac * (tau_max - tau_min);
}

/// One noisy observation of design i: true values plus independent Gaussian noise
/// per objective with standard deviation noise_sd.
inline ObjVec sample_observation(const CandidateSet& set, const NoiseSpec& spec, std::size_t i,
                                 std::mt19937_64& eng) {
    ObjVec obs = set.true_objectives[i];
    for (std::size_t j = 0; j < obs.size(); ++j) obs[j] += noise_sd(set, spec, i, j) * normal01(eng);
    return obs;
}

class generation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Generate a candidate set with exactly n_pareto truly non-dominated members:
/// manifold samples first, then near-front (or uniform) dominated fills, with
/// offending draws resampled until the non-dominated sort confirms the labels.
inline CandidateSet generate_candidates(const Problem& problem, std::size_t size, std::size_t n_pareto,
                                        std::uint64_t seed, bool proximity = true) {
    if (n_pareto == 0 || n_pareto > size)
        throw std::invalid_argument("generate_candidates: need 0 < n_pareto <= size");
    std::mt19937_64 eng = make_stream(seed, 0x67656eULL); // generation stream

    CandidateSet set;
    set.problem_name = problem.name_string();
    set.dimension = problem.dimension();
    set.wfg_position_params = problem.wfg_position_params();
    set.seed = seed;
    set.designs.resize(size);
    set.true_objectives.resize(size);
    for (std::size_t i = 0; i < size; ++i) {
        set.designs[i].id = static_cast<int>(i);
        set.designs[i].x = i < n_pareto ? problem.pareto_sample(eng) : problem.dominated_sample(eng, proximity);
        set.true_objectives[i] = problem.eval_true(set.designs[i].x);
    }

    constexpr int kMaxRounds = 500;
    for (int round = 0; round < kMaxRounds; ++round) {
        const std::vector<std::size_t> front = pareto_front(set.true_objectives);
        std::vector<std::size_t> bad;
        for (std::size_t i = 0; i < n_pareto; ++i)
            if (!contains(front, i)) bad.push_back(i);
        for (std::size_t i : front)
            if (i >= n_pareto) bad.push_back(i);
        if (bad.empty()) {
            set.true_front = front;
            set.refresh_ranges();
            return set;
        }
        for (std::size_t i : bad) {
            set.designs[i].x =
                i < n_pareto ? problem.pareto_sample(eng) : problem.dominated_sample(eng, proximity);
            set.true_objectives[i] = problem.eval_true(set.designs[i].x);
        }
    }
    throw generation_error("generate_candidates: could not reach the target front size within the resampling budget");
}

inline void save_candidates(const CandidateSet& set, const std::string& path) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["problem"] = {{"name", set.problem_name},
                    {"d", set.dimension},
                    {"m", set.n_objectives},
                    {"wfg_position_params", set.wfg_position_params}};
    j["seed"] = set.seed;
    nlohmann::json designs = nlohmann::json::array();
    for (const Design& dsg : set.designs) designs.push_back(dsg.x);
    j["designs"] = designs;
    j["true_objectives"] = set.true_objectives;
    j["true_front"] = set.true_front;
    j["objective_range"] = set.objective_range;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_candidates: cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
}

inline CandidateSet load_candidates(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_candidates: cannot open '" + path + "'");
    nlohmann::json j;
    in >> j;
    if (j.value("format_version", 0) != 1)
        throw std::runtime_error("load_candidates: unsupported format version");
    CandidateSet set;
    set.problem_name = j["problem"]["name"].get<std::string>();
    set.dimension = j["problem"]["d"].get<int>();
    set.n_objectives = j["problem"]["m"].get<int>();
    set.wfg_position_params = j["problem"].value("wfg_position_params", 0);
    set.seed = j["seed"].get<std::uint64_t>();
    const auto designs = j["designs"].get<std::vector<std::vector<double>>>();
    set.designs.resize(designs.size());
    for (std::size_t i = 0; i < designs.size(); ++i) {
        set.designs[i].id = static_cast<int>(i);
        set.designs[i].x = designs[i];
    }
    set.true_objectives = j["true_objectives"].get<ObjMatrix>();
    set.true_front = j["true_front"].get<std::vector<std::size_t>>();
    set.refresh_ranges();
    // Stored labels must agree with a fresh non-dominated sort of the stored objectives.
    if (pareto_front(set.true_objectives) != set.true_front)
        throw std::runtime_error("load_candidates: stored front labels are inconsistent");
    return set;
}

} // namespace skmors
