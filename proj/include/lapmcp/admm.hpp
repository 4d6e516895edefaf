#pragma once

// ADMM for the l1-penalized model
//   min -log det(Theta + J) + <K, Theta>   s.t. Theta = A* x, w = x, w >= 0,
// with K = S + lambda I (on Laplacians the off-diagonal l1 norm equals the trace).
// Its result is the warm start of the proximal DCA and the l1 baseline.

#include "lapmcp/core.hpp"
#include "lapmcp/graph.hpp"
#include "lapmcp/problem.hpp"
#include "lapmcp/report.hpp"
#include "lapmcp/symlinalg.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <chrono>
#include <optional>

namespace lapmcp {

struct AdmmState {
    Vector x;
    Matrix theta;
    Vector w;
    Matrix y;
    Vector zeta;
    double sigma = 1.0;
    double tau = 1.618;

    /// All-zero primal and dual blocks.
    static AdmmState zeros(int n, Eigen::Index edges, double sigma, double tau) {
        return {Vector::Zero(edges), Matrix::Zero(n, n), Vector::Zero(edges),
                Matrix::Zero(n, n),  Vector::Zero(edges), sigma, tau};
    }
};

struct AdmmOptions {
    double eps = 1e-5;
    int max_iterations = 20000;
    double tau = 1.618;
    double sigma0 = 1.0;
    // sigma is doubled / halved when eta_p / eta_d leaves [1/10, 10], checked
    // every `adapt_every` iterations.
    int adapt_every = 50;
    double adapt_ratio = 10.0;
    int trace_every = 50;
    GramStrategy gram_strategy = GramStrategy::Auto;
};

struct KktResiduals {
    double pobj = 0.0;
    double dobj = 0.0;
    double eta_p = 0.0;
    double eta_d = 0.0;
    double eta_g = 0.0;

    double max() const { return std::max({eta_p, eta_d, eta_g}); }
};

/// K = S + lambda I.
inline Matrix l1_shift(const ProblemData& problem) {
    Matrix k = problem.s;
    k.diagonal().array() += problem.penalty.lambda;
    return k;
}

/// One sweep of the four-block iteration.
inline AdmmState admm_step(const AdmmState& s, const ProblemData& problem, const GramSolver& gram,
                           const Matrix& k) {
    if (!(s.sigma > 0.0)) throw std::invalid_argument("admm_step: sigma must be positive");
    const Incidence& inc = problem.incidence;
    const int n = problem.n();
    const double inv_sigma = 1.0 / s.sigma;
    AdmmState next;
    next.sigma = s.sigma;
    next.tau = s.tau;

    next.x = gram.solve(inc.a(s.theta + inv_sigma * s.y) + s.w + inv_sigma * s.zeta);
    const Matrix ax = inc.astar(next.x);
    const Matrix j = ones_over_n(n);
    next.theta = prox_logdet(symmetrized(j + ax - inv_sigma * (s.y + k)), s.sigma).value - j;
    next.w = project_nonneg(next.x - inv_sigma * s.zeta);

    const double step = s.tau * s.sigma;
    next.y = symmetrized(s.y + step * (next.theta - ax));
    next.zeta = s.zeta + step * (next.w - next.x);
    return next;
}

inline AdmmState admm_step(const AdmmState& s, const ProblemData& problem, const GramSolver& gram) {
    return admm_step(s, problem, gram, l1_shift(problem));
}

namespace detail {

/// log det of a symmetric matrix, nullopt when it is not positive definite.
inline std::optional<double> logdet_pd(const Matrix& m) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) return std::nullopt;
    const Vector diag = llt.matrixL().toDenseMatrix().diagonal();
    if (!(diag.minCoeff() > 0.0)) return std::nullopt;
    return 2.0 * diag.array().log().sum();
}

inline void fill_feasibility(const AdmmState& s, const Incidence& inc, KktResiduals& r) {
    const double primal = std::max((s.theta - inc.astar(s.x)).norm(), (s.w - s.x).norm()) / (1.0 + s.x.norm());
    const double sign = project_nonneg(-s.w).norm() / (1.0 + s.w.norm());
    r.eta_p = std::max(primal, sign);
    r.eta_d = std::max((inc.a(s.y) + s.zeta).norm(), project_nonneg(-s.zeta).norm()) / (1.0 + s.zeta.norm());
}

inline void fill_gap(const AdmmState& s, const ProblemData& problem, const Matrix& k, KktResiduals& r) {
    const int n = problem.n();
    const Matrix aw = problem.incidence.astar(s.w);
    const auto primal_logdet = logdet_pd(aw + ones_over_n(n));
    r.pobj = primal_logdet ? -*primal_logdet + frob_inner(k, aw) : kInfinity;
    const Matrix yk = s.y + k;
    const auto dual_logdet = logdet_pd(yk);
    r.dobj = dual_logdet ? *dual_logdet - yk.sum() / n + n : -kInfinity;
    if (std::isfinite(r.pobj) && std::isfinite(r.dobj)) {
        r.eta_g = std::abs(r.pobj - r.dobj) / (1.0 + std::abs(r.pobj) + std::abs(r.dobj));
    } else {
        // Limit of the ratio as either objective diverges.
        r.eta_g = 1.0;
    }
}

}  // namespace detail

/// Relative KKT residuals (eta_p, eta_d, eta_g) together with pobj and dobj.
/// dobj is -inf when Y + K is not positive definite.
inline KktResiduals kkt_residuals(const AdmmState& s, const ProblemData& problem) {
    KktResiduals r;
    detail::fill_feasibility(s, problem.incidence, r);
    detail::fill_gap(s, problem, l1_shift(problem), r);
    return r;
}

struct AdmmResult {
    AdmmState state;
    SolveReport report;
};

/// Runs ADMM from the zero point until max{eta_p, eta_d, eta_g} < eps or
/// the iteration cap. Hitting the cap is reported, not thrown.
inline AdmmResult solve_cgl_l1_full(const ProblemData& problem, const AdmmOptions& opts = {}) {
    if (!(opts.eps > 0.0)) throw std::invalid_argument("solve_cgl_l1: eps must be positive");
    if (!(opts.tau > 0.0 && opts.tau < 0.5 * (1.0 + std::sqrt(5.0)))) {
        throw std::invalid_argument("solve_cgl_l1: tau outside (0, (1 + sqrt 5)/2)");
    }
    problem.require_connected();
    const auto start = std::chrono::steady_clock::now();
    const GramSolver gram(problem.incidence, opts.gram_strategy);
    const Matrix k = l1_shift(problem);

    AdmmState state = AdmmState::zeros(problem.n(), problem.num_edges(), opts.sigma0, opts.tau);
    SolveReport report;
    report.model = "cgl-l1";
    report.n = problem.n();
    report.edges = problem.incidence.edges();
    report.termination = Termination::MaxIterations;

    KktResiduals res;
    bool gap_current = false;
    int it = 0;
    while (it < opts.max_iterations) {
        state = admm_step(state, problem, gram, k);
        ++it;
        res = {};
        detail::fill_feasibility(state, problem.incidence, res);
        const bool traced = opts.trace_every > 0 && it % opts.trace_every == 0;
        const bool feasible = std::max(res.eta_p, res.eta_d) < opts.eps;
        gap_current = feasible || traced;
        if (gap_current) detail::fill_gap(state, problem, k, res);
        if (traced) report.admm_history.push_back({it, res.eta_p, res.eta_d, res.eta_g, res.pobj, state.sigma});
        if (feasible && res.eta_g < opts.eps) {
            report.termination = Termination::Converged;
            break;
        }
        if (opts.adapt_every > 0 && it % opts.adapt_every == 0 && res.eta_d > 0.0) {
            const double ratio = res.eta_p / res.eta_d;
            if (ratio > opts.adapt_ratio) {
                state.sigma *= 2.0;
            } else if (ratio < 1.0 / opts.adapt_ratio) {
                state.sigma *= 0.5;
            }
        }
    }
    if (!gap_current) detail::fill_gap(state, problem, k, res);
    if (report.admm_history.empty() || report.admm_history.back().iteration != it) {
        report.admm_history.push_back({it, res.eta_p, res.eta_d, res.eta_g, res.pobj, state.sigma});
    }

    report.iterations = it;
    report.kkt_residual = res.max();
    report.w = state.w;
    report.theta = problem.incidence.astar(state.w);
    report.objective = res.pobj;
    report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {std::move(state), std::move(report)};
}

inline SolveReport solve_cgl_l1(const ProblemData& problem, const AdmmOptions& opts = {}) {
    return solve_cgl_l1_full(problem, opts).report;
}

}  // namespace lapmcp
