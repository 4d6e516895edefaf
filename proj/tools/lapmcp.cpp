// lapmcp: learn sparse graph Laplacians with the MCP-penalized model.
//
//   lapmcp gen    draw a weighted graph (+ covariance, + connectivity prior)
//   lapmcp solve  fit cgl-mcp or cgl-l1 to a covariance / data file
//   lapmcp sweep  lambda x seed benchmark on a synthetic ensemble
//   lapmcp eval   F1 / recovery error of an estimate against a truth graph
//
// Exit codes: 0 success, 2 solver stopped without converging, 1 usage or I/O error.

#include "lapmcp/lapmcp.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using namespace lapmcp;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNotConverged = 2;

GramStrategy parse_gram(const std::string& s) {
    if (s == "auto") return GramStrategy::Auto;
    if (s == "cholesky") return GramStrategy::Cholesky;
    if (s == "smw") return GramStrategy::Smw;
    if (s == "cg") return GramStrategy::Cg;
    throw std::invalid_argument("unknown gram strategy '" + s + "'");
}

void write_json(const Json& j, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
}

struct GraphArgs {
    std::string ensemble = "er";
    GraphSpec spec;

    void attach(CLI::App* app) {
        app->add_option("--ensemble", ensemble, "er | grid | modular")->capture_default_str();
        app->add_option("--nodes", spec.n, "number of nodes")->capture_default_str();
        app->add_option("--prob", spec.p, "er edge probability")->capture_default_str();
        app->add_option("--p1", spec.p1, "modular: across-module probability")->capture_default_str();
        app->add_option("--p2", spec.p2, "modular: within-module probability")->capture_default_str();
        app->add_option("--modules", spec.modules, "modular: module count")->capture_default_str();
        app->add_option("--weight-lo", spec.weight_lo, "lower edge weight")->capture_default_str();
        app->add_option("--weight-hi", spec.weight_hi, "upper edge weight")->capture_default_str();
    }

    GraphSpec resolve() {
        spec.ensemble = parse_ensemble(ensemble);
        return spec;
    }

    static Json to_json(const GraphSpec& s) {
        return {{"ensemble", to_string(s.ensemble)}, {"n", s.n},         {"p", s.p},
                {"p1", s.p1},                        {"p2", s.p2},       {"modules", s.modules},
                {"weight_lo", s.weight_lo},          {"weight_hi", s.weight_hi}};
    }
};

// ---- gen --------------------------------------------------------------------

struct GenArgs {
    GraphArgs graph;
    std::uint64_t seed = 1;
    std::string out = "graph.json";
    std::string cov;
    long long samples = 0;
    std::string prior_scenario;
    std::string prior_out;
};

int cmd_gen(GenArgs& a) {
    const GraphSpec spec = a.graph.resolve();
    const EdgeGraph g = make_graph(spec, a.seed);
    write_graph(a.out, g);
    std::cerr << "wrote " << a.out << ": n=" << g.n() << " edges=" << g.num_edges() << '\n';
    if (!a.cov.empty()) {
        const Matrix l = laplacian(g);
        const Matrix s = a.samples > 0 ? sample_covariance(l, a.samples, derive_seed(a.seed, kSampleStream))
                                       : population_covariance(l);
        write_matrix_market(a.cov, s);
        std::cerr << "wrote " << a.cov << (a.samples > 0 ? " (sampled, k=" + std::to_string(a.samples) + ")"
                                                         : std::string(" (exact pseudo-inverse)"))
                  << '\n';
    }
    if (!a.prior_out.empty()) {
        const Scenario sc = parse_scenario(a.prior_scenario.empty() ? "true" : a.prior_scenario);
        const ConnectivityPrior prior = make_prior(g, sc, a.seed);
        write_graph(a.prior_out, EdgeGraph(prior.n, prior.edges));
        std::cerr << "wrote " << a.prior_out << ": " << sc.str() << " prior, " << prior.edges.size()
                  << " candidate edges\n";
    }
    return kExitOk;
}

// ---- solve ------------------------------------------------------------------

struct SolveArgs {
    std::string model = "cgl-mcp";
    std::string cov;
    std::string data;
    std::string connectivity = "full";
    double lambda = 0.0;
    double gamma = 1.5;
    double eps = 1e-6;
    double sigma0 = 1.0;
    int max_iter = 0;
    std::string gram = "auto";
    std::string out = "-";
};

Json dca_config_json(const DcaParams& p) {
    return {{"sigma0", p.sigma0},
            {"rho", p.rho},
            {"sigma_min", p.sigma_min},
            {"eps", p.eps},
            {"max_iterations", p.max_iterations},
            {"max_certificate_retries", p.max_certificate_retries},
            {"descent_slack", p.descent_slack},
            {"ssn_tolerance_scale", p.ssn_tolerance_scale},
            {"warm_start_eps_floor", p.warm_start_eps_floor},
            {"ssn",
             {{"eta_bar", p.ssn.eta_bar},
              {"tau", p.ssn.tau},
              {"mu", p.ssn.mu},
              {"rho", p.ssn.rho},
              {"max_iterations", p.ssn.max_iterations},
              {"max_backtracks", p.ssn.max_backtracks},
              {"max_cg_iterations", p.ssn.max_cg_iterations}}}};
}

Json admm_config_json(const AdmmOptions& o) {
    return {{"eps", o.eps},
            {"max_iterations", o.max_iterations},
            {"tau", o.tau},
            {"sigma0", o.sigma0},
            {"adapt_every", o.adapt_every},
            {"adapt_ratio", o.adapt_ratio},
            {"gram_strategy", to_string(o.gram_strategy)}};
}

int cmd_solve(const SolveArgs& a) {
    if (a.cov.empty() == a.data.empty()) throw std::invalid_argument("solve: give exactly one of --cov or --data");
    const Matrix s = !a.cov.empty() ? read_covariance(a.cov) : covariance_from_data(read_data_matrix(a.data));
    const int n = static_cast<int>(s.rows());
    ConnectivityPrior prior;
    if (a.connectivity == "full") {
        prior = full_prior(n);
    } else {
        const EdgeGraph g = read_graph(a.connectivity);
        if (g.n() != n) {
            throw IoError("connectivity graph has " + std::to_string(g.n()) + " nodes, covariance has " +
                          std::to_string(n));
        }
        prior = {n, g.edges(), PriorKind::True, 0.0};
    }
    const ProblemData problem(s, prior, PenaltyParams{a.lambda, a.gamma});
    const GramStrategy gram = parse_gram(a.gram);

    Json config{{"model", a.model},
                {"cov", a.cov.empty() ? Json(nullptr) : Json(a.cov)},
                {"data", a.data.empty() ? Json(nullptr) : Json(a.data)},
                {"connectivity", a.connectivity},
                {"lambda", a.lambda},
                {"gamma", a.gamma},
                {"eps", a.eps},
                {"edge_threshold", kDefaultEdgeThreshold}};
    SolveReport report;
    if (a.model == "cgl-mcp") {
        DcaParams p;
        p.eps = a.eps;
        p.sigma0 = a.sigma0;
        if (a.max_iter > 0) p.max_iterations = a.max_iter;
        p.warm_start.gram_strategy = gram;
        AdmmOptions warm = p.warm_start;
        warm.eps = std::max(p.eps, p.warm_start_eps_floor);
        config["dca"] = dca_config_json(p);
        config["admm"] = admm_config_json(warm);
        report = dca_solve(problem, p);
    } else if (a.model == "cgl-l1") {
        AdmmOptions o;
        o.eps = a.eps;
        o.sigma0 = a.sigma0;
        if (a.max_iter > 0) o.max_iterations = a.max_iter;
        o.gram_strategy = gram;
        config["admm"] = admm_config_json(o);
        report = solve_cgl_l1(problem, o);
    } else {
        throw std::invalid_argument("unknown model '" + a.model + "' (cgl-mcp, cgl-l1)");
    }
    Json j = report_to_json(report);
    j["config"] = std::move(config);
    j["estimated_edges"] = edge_set(report.w, report.edges).size();
    write_json(j, a.out);
    std::cerr << a.model << ": " << to_string(report.termination) << " after " << report.iterations
              << " iterations, objective " << report.objective << ", " << report.wall_time_s << " s\n";
    return report.converged() ? kExitOk : kExitNotConverged;
}

// ---- sweep ------------------------------------------------------------------

struct SweepArgs {
    GraphArgs graph;
    std::string scenario = "true";
    long long samples_per_node = 5000;
    std::string model = "cgl-mcp";
    std::string lambdas = "1e-4:1:20";
    double gamma = 1.5;
    double eps = 1e-6;
    double sigma0 = 1.0;
    std::string gram = "auto";
    std::vector<std::uint64_t> seeds;
    int num_seeds = 1;
    std::uint64_t base_seed = 1;
    unsigned threads = 0;
    double threshold = kDefaultEdgeThreshold;
    std::string out = "sweep.csv";
    std::string avg_out;
};

std::string sibling(const std::string& path, const std::string& suffix) {
    std::filesystem::path p(path);
    const std::string stem = p.stem().string();
    return (p.parent_path() / (stem + suffix)).string();
}

int cmd_sweep(SweepArgs& a) {
    ExperimentConfig cfg;
    cfg.graph = a.graph.resolve();
    cfg.scenario = parse_scenario(a.scenario);
    cfg.samples_per_node = a.samples_per_node;
    cfg.model = a.model;
    cfg.lambdas = parse_log_grid(a.lambdas);
    cfg.gamma = a.gamma;
    cfg.eps = a.eps;
    cfg.sigma0 = a.sigma0;
    cfg.gram_strategy = parse_gram(a.gram);
    cfg.edge_threshold = a.threshold;
    if (!a.seeds.empty()) {
        cfg.seeds = a.seeds;
    } else {
        if (a.num_seeds < 1) throw std::invalid_argument("--num-seeds must be positive");
        cfg.seeds.clear();
        for (int i = 0; i < a.num_seeds; ++i) cfg.seeds.push_back(a.base_seed + static_cast<std::uint64_t>(i));
    }
    if (cfg.model != "cgl-mcp" && cfg.model != "cgl-l1") throw std::invalid_argument("unknown model '" + cfg.model + "'");
    const unsigned threads = resolve_threads(a.threads);

    const auto rows = run_sweep(cfg, threads);
    const auto avg = average_over_seeds(rows);
    const std::string avg_path = a.avg_out.empty() ? sibling(a.out, ".avg.csv") : a.avg_out;
    write_sweep_csv(a.out, rows);
    write_sweep_csv(avg_path, avg);

    Json seeds = Json::array();
    for (auto s : cfg.seeds) seeds.push_back(s);
    const Json config{{"graph", GraphArgs::to_json(cfg.graph)},
                      {"scenario", cfg.scenario.str()},
                      {"samples_per_node", cfg.samples_per_node},
                      {"samples", cfg.samples()},
                      {"model", cfg.model},
                      {"lambdas", cfg.lambdas},
                      {"lambda_grid", a.lambdas},
                      {"gamma", cfg.gamma},
                      {"eps", cfg.eps},
                      {"sigma0", cfg.sigma0},
                      {"gram_strategy", to_string(cfg.gram_strategy)},
                      {"seeds", seeds},
                      {"threads", threads},
                      {"edge_threshold", cfg.edge_threshold},
                      {"dca", dca_config_json(dca_params_for(cfg))},
                      {"rows", a.out},
                      {"averages", avg_path}};
    write_json(config, sibling(a.out, ".config.json"));

    int failed = 0;
    for (const auto& r : rows) failed += r.status != "converged";
    std::cerr << "sweep: " << rows.size() << " rows -> " << a.out << ", " << avg.size() << " averaged rows -> "
              << avg_path << " (" << threads << " threads)\n";
    if (failed > 0) std::cerr << "sweep: " << failed << " cells did not converge\n";
    return failed > 0 ? kExitNotConverged : kExitOk;
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
    std::string estimate;
    std::string truth;
    double threshold = kDefaultEdgeThreshold;
    std::string out = "-";
};

int cmd_eval(const EvalArgs& a) {
    std::ifstream in(a.estimate);
    if (!in) throw IoError("cannot open '" + a.estimate + "' for reading");
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& ex) {
        throw IoError("'" + a.estimate + "': " + ex.what());
    }
    const EdgeGraph est = graph_from_report(j);
    const EdgeGraph truth = read_graph(a.truth);
    if (est.n() != truth.n()) {
        throw IoError("node count mismatch: estimate has " + std::to_string(est.n()) + ", truth has " +
                      std::to_string(truth.n()));
    }
    const EdgeList est_edges = edge_set(est.weight_vector(), est.edges(), a.threshold);
    const EdgeDecision d = compare_edges(est_edges, truth.edges());
    const Json m{{"f1", f1_score(d)},
                 {"recovery_error", recovery_error(laplacian(est), laplacian(truth))},
                 {"estimated_edges", est_edges.size()},
                 {"true_edges", truth.num_edges()},
                 {"tp", d.tp},
                 {"fp", d.fp},
                 {"fn", d.fn},
                 {"threshold", a.threshold}};
    write_json(m, a.out);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse graph Laplacian learning with the MCP penalty (proximal DCA + semismooth Newton)"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "draw a weighted random graph");
    gen.graph.attach(g);
    g->add_option("--seed", gen.seed, "random seed")->capture_default_str();
    g->add_option("--out", gen.out, "graph JSON output")->capture_default_str();
    g->add_option("--cov", gen.cov, "also write the covariance (Matrix Market)");
    g->add_option("--samples", gen.samples, "sample size k for --cov; 0 writes the exact pseudo-inverse")
        ->capture_default_str();
    g->add_option("--prior", gen.prior_scenario, "prior scenario for --prior-out: true | full | coarse:F | drop:D");
    g->add_option("--prior-out", gen.prior_out, "write the connectivity prior as a graph JSON");

    SolveArgs solve;
    auto* s = app.add_subcommand("solve", "fit a Laplacian to a covariance or data file");
    s->add_option("--model", solve.model, "cgl-mcp | cgl-l1")->capture_default_str();
    s->add_option("--cov", solve.cov, "covariance (Matrix Market)");
    s->add_option("--data", solve.data, "raw data CSV, k rows x n columns");
    s->add_option("--connectivity", solve.connectivity, "'full' or a graph JSON of candidate edges")
        ->capture_default_str();
    s->add_option("--lambda", solve.lambda, "penalty parameter")->capture_default_str();
    s->add_option("--gamma", solve.gamma, "MCP concavity, > 1")->capture_default_str();
    s->add_option("--eps", solve.eps, "termination tolerance")->capture_default_str();
    s->add_option("--sigma0", solve.sigma0, "initial proximal / penalty parameter")->capture_default_str();
    s->add_option("--max-iter", solve.max_iter, "iteration cap (0 = solver default)");
    s->add_option("--gram", solve.gram, "ADMM linear solver: auto | cholesky | smw | cg")->capture_default_str();
    s->add_option("--out", solve.out, "report JSON ('-' for stdout)")->capture_default_str();

    SweepArgs sweep;
    auto* w = app.add_subcommand("sweep", "lambda x seed benchmark on a synthetic ensemble");
    sweep.graph.attach(w);
    w->add_option("--scenario", sweep.scenario, "true | full | coarse:F | drop:D")->capture_default_str();
    w->add_option("--samples-per-node", sweep.samples_per_node, "k = this * n")->capture_default_str();
    w->add_option("--model", sweep.model, "cgl-mcp | cgl-l1")->capture_default_str();
    w->add_option("--lambdas", sweep.lambdas, "log grid lo:hi:count")->capture_default_str();
    w->add_option("--gamma", sweep.gamma, "MCP concavity")->capture_default_str();
    w->add_option("--eps", sweep.eps, "termination tolerance")->capture_default_str();
    w->add_option("--sigma0", sweep.sigma0, "initial proximal parameter")->capture_default_str();
    w->add_option("--gram", sweep.gram, "ADMM linear solver")->capture_default_str();
    w->add_option("--seeds", sweep.seeds, "explicit seeds")->delimiter(',');
    w->add_option("--num-seeds", sweep.num_seeds, "seeds base-seed .. base-seed+N-1")->capture_default_str();
    w->add_option("--base-seed", sweep.base_seed, "first seed")->capture_default_str();
    w->add_option("--threads", sweep.threads, "worker threads (0 = all; capped by LAPLACE_MCP_THREADS)");
    w->add_option("--threshold", sweep.threshold, "relative edge threshold")->capture_default_str();
    w->add_option("--out", sweep.out, "per-(lambda, seed) CSV")->capture_default_str();
    w->add_option("--avg-out", sweep.avg_out, "per-lambda averages (default <out>.avg.csv)");

    EvalArgs eval;
    auto* e = app.add_subcommand("eval", "score an estimate against a truth graph");
    e->add_option("--estimate", eval.estimate, "solve report or graph JSON")->required();
    e->add_option("--truth", eval.truth, "truth graph JSON")->required();
    e->add_option("--threshold", eval.threshold, "relative edge threshold")->capture_default_str();
    e->add_option("--out", eval.out, "metrics JSON ('-' for stdout)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& ex) {
        const int code = app.exit(ex);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (g->parsed()) return cmd_gen(gen);
        if (s->parsed()) return cmd_solve(solve);
        if (w->parsed()) return cmd_sweep(sweep);
        if (e->parsed()) return cmd_eval(eval);
    } catch (const std::exception& ex) {
        std::cerr << "lapmcp: " << ex.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
