#include "test_util.hpp"

using namespace lapmcp;
using namespace lapmcp::testing;

namespace {

// One edge, two nodes: min -log(2w) + w kappa, kappa = b^T K b, so w* = 1/kappa.
struct TwoNode {
    ProblemData problem;
    double kappa;
    AdmmState exact;
};

TwoNode two_node(double sigma = 1.0) {
    Matrix s(2, 2);
    s << 0.9, -0.3, -0.3, 0.6;
    ProblemData prob(s, Incidence(2, {{0, 1}}), PenaltyParams{0.05, 1.5});
    const Matrix k = l1_shift(prob);
    const double kappa = k(0, 0) + k(1, 1) - 2 * k(0, 1);
    const double w = 1.0 / kappa;
    const Vector b{{1.0, -1.0}};
    AdmmState st = AdmmState::zeros(2, 1, sigma, 1.618);
    st.x = st.w = Vector::Constant(1, w);
    st.theta = prob.incidence.astar(st.x);
    st.y = b * b.transpose() / (4 * w) + ones_over_n(2) - k;
    st.zeta = Vector::Zero(1);
    return {prob, kappa, st};
}

Instance er20(std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.graph.ensemble = Ensemble::ErdosRenyi;
    cfg.graph.n = 20;
    cfg.graph.p = 0.3;
    return make_instance(cfg, seed);
}

}  // namespace

TEST(AdmmStep, ExactKktPointIsFixed) {
    for (double sigma : {0.5, 1.0, 4.0}) {
        const TwoNode t = two_node(sigma);
        const GramSolver gram(t.problem.incidence);
        const AdmmState next = admm_step(t.exact, t.problem, gram);
        EXPECT_LT((next.x - t.exact.x).norm(), 1e-10);
        EXPECT_LT((next.w - t.exact.w).norm(), 1e-10);
        EXPECT_LT((next.theta - t.exact.theta).norm(), 1e-10);
        EXPECT_LT((next.y - t.exact.y).norm(), 1e-10);
        EXPECT_LT((next.zeta - t.exact.zeta).norm(), 1e-10);
    }
}

TEST(AdmmStep, NonnegativeWeightsAndExactLinearSolve) {
    const auto sp = small_problem(10, 0.05, 2, true, 50000);
    const GramSolver gram(sp.problem.incidence);
    const Matrix k = l1_shift(sp.problem);
    AdmmState st = AdmmState::zeros(10, sp.problem.num_edges(), 1.0, 1.618);
    for (int it = 0; it < 30; ++it) {
        const Vector rhs = sp.problem.incidence.a(st.theta + st.y / st.sigma) + st.w + st.zeta / st.sigma;
        const AdmmState next = admm_step(st, sp.problem, gram, k);
        EXPECT_LT((gram.apply(next.x) - rhs).norm(), 1e-10 * std::max(1.0, rhs.norm()));
        EXPECT_GE(next.w.minCoeff(), 0.0);
        EXPECT_GT(sym_eigenvalues(next.theta + ones_over_n(10)).minCoeff(), 0.0);
        st = next;
    }
}

TEST(AdmmStep, RejectsNonPositiveSigma) {
    const TwoNode t = two_node();
    AdmmState st = t.exact;
    st.sigma = 0.0;
    EXPECT_THROW(admm_step(st, t.problem, GramSolver(t.problem.incidence)), std::invalid_argument);
}

TEST(KktResiduals, VanishAtAnalyticSolution) {
    const TwoNode t = two_node();
    const KktResiduals r = kkt_residuals(t.exact, t.problem);
    EXPECT_LT(r.eta_p, 1e-12);
    EXPECT_LT(r.eta_d, 1e-12);
    EXPECT_LT(r.eta_g, 1e-12);
    EXPECT_NEAR(r.pobj, 1.0 - std::log(2.0 / t.kappa), 1e-12);
    EXPECT_NEAR(r.dobj, r.pobj, 1e-12);
}

TEST(KktResiduals, NonNegativeAndDualSentinel) {
    const TwoNode t = two_node();
    AdmmState st = t.exact;
    st.y = -10.0 * Matrix::Identity(2, 2);
    const KktResiduals r = kkt_residuals(st, t.problem);
    EXPECT_EQ(r.dobj, -kInfinity);
    EXPECT_EQ(r.eta_g, 1.0);
    EXPECT_GE(r.eta_p, 0.0);
    EXPECT_GE(r.eta_d, 0.0);
    const KktResiduals z = kkt_residuals(AdmmState::zeros(2, 1, 1.0, 1.618), t.problem);
    EXPECT_GE(z.eta_p, 0.0);
    EXPECT_GE(z.eta_d, 0.0);
    EXPECT_GE(z.eta_g, 0.0);
}

TEST(SolveL1, TwoNodeMatchesClosedForm) {
    const TwoNode t = two_node();
    AdmmOptions o;
    o.eps = 1e-10;
    const SolveReport r = solve_cgl_l1(t.problem, o);
    EXPECT_TRUE(r.converged());
    EXPECT_NEAR(r.w[0], 1.0 / t.kappa, 1e-8);
}

TEST(SolveL1, ErdosRenyi20Converges) {
    const Instance inst = er20(1);
    const ProblemData prob(inst.s, inst.prior, PenaltyParams{0.01, 1.5});
    const SolveReport r = solve_cgl_l1(prob, AdmmOptions{});
    EXPECT_TRUE(r.converged());
    EXPECT_LE(r.iterations, 5000);
    EXPECT_LT(r.kkt_residual, 1e-5);
    EXPECT_GE(r.w.minCoeff(), 0.0);
    EXPECT_FALSE(r.admm_history.empty());
    EXPECT_EQ(r.admm_history.back().iteration, r.iterations);
}

TEST(SolveL1, TraceDecreasesWithLambda) {
    const Instance inst = er20(2);
    double prev = kInfinity;
    for (double lambda : {0.01, 0.1, 1.0}) {
        const ProblemData prob(inst.s, true_prior(inst.truth), PenaltyParams{lambda, 1.5});
        const double tr = solve_cgl_l1(prob, AdmmOptions{}).theta.trace();
        EXPECT_LT(tr, prev);
        prev = tr;
    }
}

TEST(SolveL1, GapShrinksWithTolerance) {
    const auto sp = small_problem(8, 0.05, 3, false, 40000);
    double prev = kInfinity;
    for (double eps : {1e-3, 1e-5, 1e-7}) {
        AdmmOptions o;
        o.eps = eps;
        const auto res = solve_cgl_l1_full(sp.problem, o);
        const KktResiduals k = kkt_residuals(res.state, sp.problem);
        EXPECT_TRUE(res.report.converged());
        EXPECT_LT(k.max(), eps);
        EXPECT_LT(k.eta_g, prev);
        prev = k.eta_g;
    }
}

TEST(SolveL1, IterationCapIsReported) {
    const auto sp = small_problem(8, 0.05, 4);
    AdmmOptions o;
    o.max_iterations = 3;
    const SolveReport r = solve_cgl_l1(sp.problem, o);
    EXPECT_EQ(r.termination, Termination::MaxIterations);
    EXPECT_EQ(r.iterations, 3);
    EXPECT_GE(r.w.minCoeff(), 0.0);
}

TEST(SolveL1, RejectsBadOptionsAndDisconnectedPrior) {
    const auto sp = small_problem(6, 0.05, 5);
    AdmmOptions o;
    o.tau = 1.7;
    EXPECT_THROW(solve_cgl_l1(sp.problem, o), std::invalid_argument);
    o = {};
    o.eps = 0.0;
    EXPECT_THROW(solve_cgl_l1(sp.problem, o), std::invalid_argument);
    const ProblemData split(sp.problem.s, Incidence(6, {{0, 1}, {2, 3}}), PenaltyParams{0.05, 1.5});
    EXPECT_THROW(solve_cgl_l1(split, AdmmOptions{}), std::invalid_argument);
}

TEST(SolveL1, GramStrategiesGiveSameSolution) {
    const auto sp = small_problem(12, 0.05, 6, true, 60000);
    std::vector<Vector> ws;
    for (GramStrategy s : {GramStrategy::Cholesky, GramStrategy::Smw, GramStrategy::Cg}) {
        AdmmOptions o;
        o.eps = 1e-8;
        o.gram_strategy = s;
        ws.push_back(solve_cgl_l1(sp.problem, o).w);
    }
    EXPECT_LT((ws[0] - ws[1]).norm(), 1e-6);
    EXPECT_LT((ws[0] - ws[2]).norm(), 1e-6);
}
