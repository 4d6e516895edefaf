#pragma once

// Synthetic benchmark harness: draw a weighted graph, sample S, build the
// connectivity prior, and solve over a lambda grid for several seeds.

#include "lapmcp/admm.hpp"
#include "lapmcp/dca.hpp"
#include "lapmcp/graph.hpp"
#include "lapmcp/metrics.hpp"
#include "lapmcp/penalty.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace lapmcp {

enum class Ensemble { ErdosRenyi, Grid, Modular };

inline const char* to_string(Ensemble e) {
    switch (e) {
        case Ensemble::ErdosRenyi: return "er";
        case Ensemble::Grid: return "grid";
        case Ensemble::Modular: return "modular";
    }
    return "?";
}

inline Ensemble parse_ensemble(const std::string& s) {
    if (s == "er") return Ensemble::ErdosRenyi;
    if (s == "grid") return Ensemble::Grid;
    if (s == "modular") return Ensemble::Modular;
    throw std::invalid_argument("unknown ensemble '" + s + "' (er, grid, modular)");
}

struct GraphSpec {
    Ensemble ensemble = Ensemble::ErdosRenyi;
    int n = 100;
    double p = 0.1;    // er
    double p1 = 0.05;  // modular, across modules
    double p2 = 0.3;   // modular, within modules
    int modules = 4;
    double weight_lo = 0.1;
    double weight_hi = 3.0;
};

/// Connectivity scenario: "true", "full", "coarse:<factor>", "drop:<percent>".
struct Scenario {
    PriorKind kind = PriorKind::True;
    double parameter = 0.0;

    std::string str() const {
        switch (kind) {
            case PriorKind::True: return "true";
            case PriorKind::Full: return "full";
            case PriorKind::Coarse: return "coarse:" + detail_fmt(parameter);
            case PriorKind::Drop: return "drop:" + detail_fmt(parameter);
        }
        return "?";
    }

private:
    static std::string detail_fmt(double x) {
        std::ostringstream os;
        os << x;
        return os.str();
    }
};

inline Scenario parse_scenario(const std::string& s) {
    const auto colon = s.find(':');
    const std::string head = s.substr(0, colon);
    auto number = [&]() {
        if (colon == std::string::npos) throw std::invalid_argument("scenario '" + s + "' needs a parameter");
        try {
            std::size_t pos = 0;
            const std::string tail = s.substr(colon + 1);
            const double v = std::stod(tail, &pos);
            if (pos != tail.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw std::invalid_argument("scenario '" + s + "': bad parameter");
        }
    };
    if (head == "true" && colon == std::string::npos) return {PriorKind::True, 0.0};
    if (head == "full" && colon == std::string::npos) return {PriorKind::Full, 0.0};
    if (head == "coarse") {
        const double f = colon == std::string::npos ? 1.5 : number();
        if (!(f >= 1.0)) throw std::invalid_argument("scenario coarse: factor must be >= 1");
        return {PriorKind::Coarse, f};
    }
    if (head == "drop") {
        const double d = number();
        if (!(d >= 0.0 && d <= 100.0)) throw std::invalid_argument("scenario drop: percent outside [0, 100]");
        return {PriorKind::Drop, d};
    }
    throw std::invalid_argument("unknown scenario '" + s + "' (true, full, coarse:F, drop:D)");
}

/// "lo:hi:count", log-spaced and inclusive; count 1 gives {lo}.
inline std::vector<double> parse_log_grid(const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ':')) parts.push_back(tok);
    if (parts.size() != 3) throw std::invalid_argument("lambda grid must be lo:hi:count");
    double lo = 0.0, hi = 0.0;
    long count = 0;
    try {
        lo = std::stod(parts[0]);
        hi = std::stod(parts[1]);
        count = std::stol(parts[2]);
    } catch (const std::exception&) {
        throw std::invalid_argument("lambda grid '" + spec + "': bad number");
    }
    if (count < 1) throw std::invalid_argument("lambda grid is empty");
    if (!(lo > 0.0 && hi >= lo)) throw std::invalid_argument("lambda grid needs 0 < lo <= hi");
    std::vector<double> grid(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        grid[static_cast<std::size_t>(i)] = std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
    }
    grid.front() = lo;
    if (count > 1) grid.back() = hi;
    return grid;
}

/// Independent sub-seed for one random stage (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

enum SeedStream : std::uint64_t { kGraphStream = 0, kWeightStream = 1, kSampleStream = 2, kPriorStream = 3 };

/// Weighted ground-truth graph for a seed.
inline EdgeGraph make_graph(const GraphSpec& spec, std::uint64_t seed) {
    EdgeGraph g;
    switch (spec.ensemble) {
        case Ensemble::ErdosRenyi: g = gen_erdos_renyi(spec.n, spec.p, derive_seed(seed, kGraphStream)); break;
        case Ensemble::Grid: g = gen_grid(spec.n); break;
        case Ensemble::Modular:
            g = gen_modular(spec.n, spec.p1, spec.p2, derive_seed(seed, kGraphStream), spec.modules);
            break;
    }
    return sample_weights(g, spec.weight_lo, spec.weight_hi, derive_seed(seed, kWeightStream));
}

inline ConnectivityPrior make_prior(const EdgeGraph& truth, const Scenario& sc, std::uint64_t seed) {
    const ConnectivityPrior t = true_prior(truth);
    switch (sc.kind) {
        case PriorKind::True: return t;
        case PriorKind::Full: return full_prior(truth.n());
        case PriorKind::Coarse:
            return perturb_connectivity(t, PerturbMode::coarse(sc.parameter), derive_seed(seed, kPriorStream));
        case PriorKind::Drop:
            return perturb_connectivity(t, PerturbMode::drop(sc.parameter), derive_seed(seed, kPriorStream));
    }
    throw std::logic_error("make_prior: unknown scenario");
}

struct ExperimentConfig {
    GraphSpec graph;
    Scenario scenario;
    // Samples per node: k = samples_per_node * n.
    long long samples_per_node = 5000;
    std::string model = "cgl-mcp";
    std::vector<double> lambdas;
    double gamma = 1.5;
    double eps = 1e-6;
    double sigma0 = 1.0;
    GramStrategy gram_strategy = GramStrategy::Auto;
    std::vector<std::uint64_t> seeds{1};
    double edge_threshold = kDefaultEdgeThreshold;

    long long samples() const { return samples_per_node * graph.n; }
};

/// Everything a seed fixes: truth, its Laplacian, S and the prior.
struct Instance {
    std::uint64_t seed = 0;
    EdgeGraph truth;
    Matrix laplacian;
    Matrix s;
    ConnectivityPrior prior;
};

inline Instance make_instance(const ExperimentConfig& cfg, std::uint64_t seed) {
    Instance inst;
    inst.seed = seed;
    inst.truth = make_graph(cfg.graph, seed);
    inst.laplacian = laplacian(inst.truth);
    inst.s = sample_covariance(inst.laplacian, cfg.samples(), derive_seed(seed, kSampleStream));
    inst.prior = make_prior(inst.truth, cfg.scenario, seed);
    return inst;
}

struct SweepRecord {
    double lambda = 0.0;
    std::uint64_t seed = 0;
    long long edges = 0;
    double f1 = 0.0;
    double recovery_error = 0.0;
    double objective = 0.0;
    double time_s = 0.0;
    std::string status;
};

inline DcaParams dca_params_for(const ExperimentConfig& cfg) {
    DcaParams p;
    p.eps = cfg.eps;
    p.sigma0 = cfg.sigma0;
    p.warm_start.gram_strategy = cfg.gram_strategy;
    return p;
}

inline SolveReport solve_model(const ProblemData& problem, const ExperimentConfig& cfg,
                               const DcaObserver& observer = {}) {
    if (cfg.model == "cgl-mcp") return dca_solve(problem, dca_params_for(cfg), observer);
    if (cfg.model == "cgl-l1") {
        AdmmOptions o;
        o.eps = cfg.eps;
        o.sigma0 = cfg.sigma0;
        o.gram_strategy = cfg.gram_strategy;
        return solve_cgl_l1(problem, o);
    }
    throw std::invalid_argument("unknown model '" + cfg.model + "' (cgl-mcp, cgl-l1)");
}

inline SweepRecord score(const SolveReport& r, const Instance& inst, double lambda, double threshold) {
    SweepRecord rec;
    rec.lambda = lambda;
    rec.seed = inst.seed;
    const EdgeList est = edge_set(r.w, r.edges, threshold);
    rec.edges = static_cast<long long>(est.size());
    rec.f1 = f1_score(est, inst.truth.edges());
    rec.recovery_error = recovery_error(r.theta, inst.laplacian);
    rec.objective = r.objective;
    rec.time_s = r.wall_time_s;
    rec.status = to_string(r.termination);
    return rec;
}

/// One (lambda, seed) cell. Solver failures become an "error" row.
inline SweepRecord run_cell(const ExperimentConfig& cfg, const Instance& inst, double lambda,
                            const DcaObserver& observer = {}) {
    try {
        const ProblemData problem(inst.s, inst.prior, PenaltyParams{lambda, cfg.gamma});
        return score(solve_model(problem, cfg, observer), inst, lambda, cfg.edge_threshold);
    } catch (const std::exception& ex) {
        SweepRecord rec;
        rec.lambda = lambda;
        rec.seed = inst.seed;
        rec.f1 = rec.recovery_error = rec.objective = std::nan("");
        rec.status = std::string("error: ") + ex.what();
        return rec;
    }
}

/// min(requested or hardware threads, LAPLACE_MCP_THREADS), at least 1.
inline unsigned resolve_threads(unsigned requested = 0) {
    unsigned t = requested > 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("LAPLACE_MCP_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && cap >= 1) t = std::min(t, static_cast<unsigned>(cap));
    }
    return std::max(1u, t);
}

/// Rows ordered seed-major, then by lambda as given. Instances are built
/// once per seed and shared read-only by that seed's cells.
inline std::vector<SweepRecord> run_sweep(const ExperimentConfig& cfg, unsigned threads = 0) {
    if (cfg.lambdas.empty()) throw std::invalid_argument("run_sweep: empty lambda grid");
    if (cfg.seeds.empty()) throw std::invalid_argument("run_sweep: no seeds");
    PenaltyParams{cfg.lambdas.front(), cfg.gamma}.validate();

    std::vector<Instance> instances(cfg.seeds.size());
    std::vector<std::string> instance_error(cfg.seeds.size());
    const std::size_t cells = cfg.seeds.size() * cfg.lambdas.size();
    std::vector<SweepRecord> out(cells);
    std::atomic<std::size_t> next_seed{0};
    std::atomic<std::size_t> next_cell{0};
    const unsigned workers = std::min<std::size_t>(resolve_threads(threads), std::max(cells, std::size_t{1}));

    auto build = [&] {
        for (std::size_t i; (i = next_seed++) < cfg.seeds.size();) {
            try {
                instances[i] = make_instance(cfg, cfg.seeds[i]);
            } catch (const std::exception& ex) {
                instance_error[i] = ex.what();
            }
        }
    };
    auto solve = [&] {
        for (std::size_t c; (c = next_cell++) < cells;) {
            const std::size_t si = c / cfg.lambdas.size();
            const double lambda = cfg.lambdas[c % cfg.lambdas.size()];
            if (!instance_error[si].empty()) {
                SweepRecord rec;
                rec.lambda = lambda;
                rec.seed = cfg.seeds[si];
                rec.f1 = rec.recovery_error = rec.objective = std::nan("");
                rec.status = "error: " + instance_error[si];
                out[c] = rec;
            } else {
                out[c] = run_cell(cfg, instances[si], lambda);
            }
        }
    };
    auto run_pool = [&](auto& job) {
        std::vector<std::thread> pool;
        for (unsigned t = 1; t < workers; ++t) pool.emplace_back(job);
        job();
        for (auto& th : pool) th.join();
    };
    run_pool(build);
    run_pool(solve);
    return out;
}

/// Arithmetic means over seeds, one row per lambda in first-seen order.
/// status: "converged" when every seed converged, else "<converged>/<total>".
inline std::vector<SweepRecord> average_over_seeds(const std::vector<SweepRecord>& rows) {
    std::vector<double> order;
    std::map<double, std::vector<const SweepRecord*>> by_lambda;
    for (const SweepRecord& r : rows) {
        if (!by_lambda.count(r.lambda)) order.push_back(r.lambda);
        by_lambda[r.lambda].push_back(&r);
    }
    std::vector<SweepRecord> out;
    for (double lambda : order) {
        const auto& group = by_lambda[lambda];
        SweepRecord avg;
        avg.lambda = lambda;
        double edges = 0.0;
        int converged = 0;
        for (const SweepRecord* r : group) {
            edges += static_cast<double>(r->edges);
            avg.f1 += r->f1;
            avg.recovery_error += r->recovery_error;
            avg.objective += r->objective;
            avg.time_s += r->time_s;
            if (r->status == "converged") ++converged;
        }
        const auto m = static_cast<double>(group.size());
        avg.edges = std::llround(edges / m);
        avg.f1 /= m;
        avg.recovery_error /= m;
        avg.objective /= m;
        avg.time_s /= m;
        avg.status = converged == static_cast<int>(group.size())
                         ? std::string("converged")
                         : std::to_string(converged) + "/" + std::to_string(group.size());
        out.push_back(avg);
    }
    return out;
}

inline constexpr const char* kSweepHeader = "lambda,edges,f1,recovery_error,objective,time_s,status";

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        if (c != '\n') q += c;
    }
    return q + "\"";
}

inline std::string csv_num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

}  // namespace detail

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& rows) {
    out << kSweepHeader << '\n';
    for (const SweepRecord& r : rows) {
        out << detail::csv_num(r.lambda) << ',' << r.edges << ',' << detail::csv_num(r.f1) << ','
            << detail::csv_num(r.recovery_error) << ',' << detail::csv_num(r.objective) << ','
            << detail::csv_num(r.time_s) << ',' << detail::csv_field(r.status) << '\n';
    }
}

inline void write_sweep_csv(const std::string& path, const std::vector<SweepRecord>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_sweep_csv(out, rows);
}

/// Parses what write_sweep_csv produced (seed is not part of the schema).
inline std::vector<SweepRecord> read_sweep_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kSweepHeader) throw std::runtime_error("sweep CSV: bad header");
    std::vector<SweepRecord> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string cur;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char c = line[i];
            if (quoted) {
                if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else if (c == '"') {
                    quoted = false;
                } else {
                    cur += c;
                }
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                f.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        f.push_back(cur);
        if (f.size() != 7) throw std::runtime_error("sweep CSV: expected 7 columns");
        SweepRecord r;
        r.lambda = std::stod(f[0]);
        r.edges = std::stoll(f[1]);
        r.f1 = std::stod(f[2]);
        r.recovery_error = std::stod(f[3]);
        r.objective = std::stod(f[4]);
        r.time_s = std::stod(f[5]);
        r.status = f[6];
        rows.push_back(r);
    }
    return rows;
}

}  // namespace lapmcp
