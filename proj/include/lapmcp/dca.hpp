#pragma once

// Inexact proximal DCA for the MCP-penalized Laplacian model.
//
// Step 0 takes the l1 solution (ADMM) as w^0. Step k linearizes h at A* w^k,
// G^k = S + lambda I - grad h(A* w^k), and solves the proximal subproblem
// through its dual with the semismooth Newton method. A candidate w^{k+1} is
// accepted only when its error vector passes the inexactness test; the SSN
// tolerance is tightened until it does.

#include "lapmcp/admm.hpp"
#include "lapmcp/core.hpp"
#include "lapmcp/penalty.hpp"
#include "lapmcp/problem.hpp"
#include "lapmcp/report.hpp"
#include "lapmcp/ssn.hpp"

#include <chrono>
#include <functional>

namespace lapmcp {

/// A step violated f(w+) <= f(w) - (sigma/4)||dw||^2 beyond the slack. The
/// certificate makes this impossible, so it signals a bug.
struct DescentViolation : std::logic_error {
    using std::logic_error::logic_error;
};

struct DcaParams {
    double sigma0 = 1.0;
    // sigma_{k+1} = max(rho sigma_k, sigma_min), i.e. rho_k = rho until the floor.
    double rho = 0.8;
    double sigma_min = 1e-4;
    double eps = 1e-6;
    int max_iterations = 500;
    int max_certificate_retries = 20;
    double descent_slack = 1e-9;
    // Initial SSN tolerance is ssn_tolerance_scale * (1 + ||G^k||_F).
    double ssn_tolerance_scale = 1e-4;
    SsnParams ssn;
    AdmmOptions warm_start;
    // Warm-start ADMM tolerance is max(eps, warm_start_eps_floor).
    double warm_start_eps_floor = 1e-5;

    void validate() const {
        if (!(sigma0 > 0.0)) throw std::invalid_argument("DcaParams: sigma0 must be positive");
        if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("DcaParams: rho outside (0, 1]");
        if (!(sigma_min > 0.0)) throw std::invalid_argument("DcaParams: sigma_min must be positive");
        if (!(eps > 0.0)) throw std::invalid_argument("DcaParams: eps must be positive");
    }
};

/// G^k = S + lambda I - grad h(A* w^k).
template <DcPenalty P>
Matrix build_gk(const Vector& w, const ProblemData& problem, const P& pen) {
    if (w.size() > 0 && w.minCoeff() < 0.0) throw std::invalid_argument("build_gk: w must be non-negative");
    Matrix g = problem.s - grad_h_matrix(problem.incidence.astar(w), pen);
    g.diagonal().array() += pen.lambda();
    return g;
}

inline Matrix build_gk(const Vector& w, const ProblemData& problem) {
    return build_gk(w, problem, Mcp(problem.penalty));
}

/// f_next <= f_prev - (sigma/4) dw^2 + 1e-9 max(1, |f_prev|).
inline bool descent_check(double f_prev, double f_next, double sigma, double step_norm, double slack = 1e-9) {
    if (!std::isfinite(f_prev)) return f_next <= f_prev;
    return f_next <= f_prev - 0.25 * sigma * step_norm * step_norm + slack * std::max(1.0, std::abs(f_prev));
}

/// Raw data of one accepted step, for independent re-verification.
struct AcceptedStep {
    const DcaIteration& record;
    const ErrorCertificate& certificate;
    const SubproblemContext& context;
    const Vector& w_prev;
    const Vector& w_next;
    const Matrix& e;
};

/// Optional hooks invoked after every accepted step.
struct DcaObserver {
    std::function<void(const DcaIteration&, const ErrorCertificate&)> on_accept;
    std::function<void(const AcceptedStep&)> on_step;
};

template <DcPenalty P>
SolveReport dca_solve(const ProblemData& problem, const DcaParams& params, const P& pen,
                      const DcaObserver& observer = {}) {
    params.validate();
    params.ssn.validate();
    problem.require_connected();
    const auto start = std::chrono::steady_clock::now();
    const Incidence& inc = problem.incidence;

    AdmmOptions admm_opts = params.warm_start;
    admm_opts.eps = std::max(params.eps, params.warm_start_eps_floor);
    ProblemData l1_problem = problem;
    l1_problem.penalty.lambda = pen.lambda();
    const SolveReport warm = solve_cgl_l1(l1_problem, admm_opts);

    SolveReport report;
    report.model = "cgl-mcp";
    report.n = problem.n();
    report.edges = inc.edges();
    report.admm_history = warm.admm_history;
    report.warm_start = {warm.iterations, warm.termination, warm.kkt_residual};
    report.termination = Termination::MaxIterations;

    const double a_norm = opnorm_a(inc);
    Vector w = warm.w;
    double f = objective_f(w, problem, pen);
    Matrix y = Matrix::Zero(problem.n(), problem.n());
    double sigma = params.sigma0;

    int k = 0;
    for (; k < params.max_iterations; ++k) {
        Matrix g = build_gk(w, problem, pen);
        const double g_norm = g.norm();
        const SubproblemContext ctx = SubproblemContext::at(sigma, w, std::move(g), inc);

        SsnParams ssn = params.ssn;
        ssn.grad_tolerance = params.ssn_tolerance_scale * (1.0 + g_norm);
        bool accepted = false;
        int ssn_iterations = 0;
        int retries = 0;
        SsnResult sol;
        ErrorCertificate cert;
        double f_next = kInfinity;
        double rhs = 0.0;
        for (; retries <= params.max_certificate_retries; ++retries) {
            sol = ssn_solve(ctx, y, ssn);
            ssn_iterations += sol.iterations;
            y = sol.y();
            const Vector& w_next = sol.point.w;
            cert = subproblem_error_vector(w_next, sol.e, ctx, a_norm);
            if (cert.valid() && check_stop_condition(cert.delta, w_next, w, sigma, inc)) {
                f_next = objective_f(w_next, problem, pen);
                if (std::isfinite(f_next)) {
                    rhs = stop_condition_rhs(w_next, w, sigma, inc);
                    accepted = true;
                    break;
                }
            }
            ssn.grad_tolerance = std::max(0.5 * std::min(ssn.grad_tolerance, sol.e.norm()),
                                          std::numeric_limits<double>::min());
        }
        if (!accepted) {
            report.termination = Termination::CertificateLimit;
            break;
        }

        const Vector w_next = sol.point.w;
        const double step = (w_next - w).norm();
        if (!descent_check(f, f_next, sigma, step, params.descent_slack)) {
            throw DescentViolation("dca_solve: descent property violated at iteration " + std::to_string(k));
        }
        DcaIteration rec;
        rec.k = k;
        rec.objective = f_next;
        rec.sigma = sigma;
        rec.step_norm = step;
        rec.ssn_iterations = ssn_iterations;
        rec.certificate_retries = retries;
        rec.residual_norm = sol.e.norm();
        rec.delta_norm = cert.delta.norm();
        rec.stop_rhs = rhs;
        rec.certificate_ratio = cert.ratio;
        rec.certificate_bound = cert.bound;
        rec.descent_margin = std::isfinite(f) ? f - 0.25 * sigma * step * step - f_next : kInfinity;
        report.history.push_back(rec);
        if (observer.on_accept) observer.on_accept(rec, cert);
        if (observer.on_step) observer.on_step(AcceptedStep{rec, cert, ctx, w, w_next, sol.e});

        const double rel_w = step / (1.0 + w.norm());
        const double rel_f = std::abs(f_next - f) / (1.0 + std::abs(f));
        w = w_next;
        f = f_next;
        if (rel_w < params.eps || rel_f < params.eps) {
            report.termination = Termination::Converged;
            ++k;
            break;
        }
        sigma = std::max(params.sigma_min, params.rho * sigma);
    }

    report.iterations = k;
    report.w = w;
    report.theta = inc.astar(w);
    report.objective = f;
    report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

inline SolveReport dca_solve(const ProblemData& problem, const DcaParams& params = {},
                             const DcaObserver& observer = {}) {
    return dca_solve(problem, params, Mcp(problem.penalty), observer);
}

}  // namespace lapmcp
