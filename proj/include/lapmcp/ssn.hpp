#pragma once

// Semismooth Newton method on the dual of the proximal subproblem
//
//   min  -log det(Theta + J) + <K, Theta> + (sigma/2)||Theta - Theta~||^2
//        + (sigma/2)||w - w~||^2
//   s.t. Theta = A* w,  w >= 0.
//
// For a multiplier Y the inner minimizers are
//   Theta(Y) = prox_logdet(Theta~ + J - (K + Y)/sigma, sigma) - J,
//   w(Y)     = max(w~ + A Y / sigma, 0),
// Phi(Y) is the Lagrangian at those points and grad Phi(Y) = Theta(Y) - A* w(Y).

#include "lapmcp/core.hpp"
#include "lapmcp/graph.hpp"
#include "lapmcp/symlinalg.hpp"

#include <Eigen/Cholesky>

#include <vector>

namespace lapmcp {

/// Data (sigma, Theta~, w~, K) of one proximal subproblem.
class SubproblemContext {
public:
    SubproblemContext(double sigma, Matrix theta_tilde, Vector w_tilde, Matrix k, const Incidence& inc)
        : sigma_(sigma),
          theta_tilde_(std::move(theta_tilde)),
          w_tilde_(std::move(w_tilde)),
          k_(std::move(k)),
          inc_(&inc) {
        if (!(sigma_ > 0.0)) throw std::invalid_argument("SubproblemContext: sigma must be positive");
        const int n = inc.n();
        if (theta_tilde_.rows() != n || theta_tilde_.cols() != n || k_.rows() != n || k_.cols() != n) {
            throw DimensionError("SubproblemContext: matrix size does not match the graph");
        }
        if (w_tilde_.size() != inc.num_edges()) throw DimensionError("SubproblemContext: w~ length != |E|");
        base_ = symmetrized(theta_tilde_ + ones_over_n(n) - k_ / sigma_);
    }

    /// Context of the DCA step at w: Theta~ = A* w, w~ = w.
    static SubproblemContext at(double sigma, const Vector& w, Matrix k, const Incidence& inc) {
        return SubproblemContext(sigma, inc.astar(w), w, std::move(k), inc);
    }

    double sigma() const { return sigma_; }
    const Matrix& theta_tilde() const { return theta_tilde_; }
    const Vector& w_tilde() const { return w_tilde_; }
    const Matrix& k() const { return k_; }
    const Incidence& incidence() const { return *inc_; }
    int n() const { return inc_->n(); }

    /// Theta~ + J - (K + Y)/sigma.
    Matrix prox_argument(const Matrix& y) const { return symmetrized(base_ - y / sigma_); }

private:
    double sigma_;
    Matrix theta_tilde_;
    Vector w_tilde_;
    Matrix k_;
    const Incidence* inc_;
    Matrix base_;
};

/// Everything the Newton method needs at one dual iterate.
struct DualPoint {
    Matrix y;
    EigCache cache;  // prox base point Theta~ + J - (K + Y)/sigma
    Matrix p;        // prox value = Theta(Y) + J
    Vector c;        // w~ + A Y / sigma
    Vector w;        // max(c, 0)
    Matrix grad;
    double phi = 0.0;
};

inline DualPoint evaluate_dual(const Matrix& y, const SubproblemContext& ctx) {
    if (y.rows() != ctx.n() || y.cols() != ctx.n()) throw DimensionError("evaluate_dual: Y has wrong size");
    const Incidence& inc = ctx.incidence();
    const double sigma = ctx.sigma();
    DualPoint pt;
    pt.y = y;
    pt.cache = EigCache(sym_eig(ctx.prox_argument(y)), sigma);
    pt.p = pt.cache.prox();
    pt.c = ctx.w_tilde() + inc.a(y) / sigma;
    pt.w = project_nonneg(pt.c);
    const Matrix aw = inc.astar(pt.w);
    const Matrix theta = pt.p - ones_over_n(ctx.n());
    pt.grad = symmetrized(theta - aw);
    pt.phi = -pt.cache.logdet_prox() + frob_inner(ctx.k(), theta) +
             0.5 * sigma * (theta - ctx.theta_tilde()).squaredNorm() +
             0.5 * sigma * (pt.w - ctx.w_tilde()).squaredNorm() + frob_inner(pt.grad, y);
    return pt;
}

inline double phi_value(const Matrix& y, const SubproblemContext& ctx) { return evaluate_dual(y, ctx).phi; }
inline Matrix phi_grad(const Matrix& y, const SubproblemContext& ctx) { return evaluate_dual(y, ctx).grad; }

/// V[H] = -(1/sigma) prox'[H] - (1/sigma) A* Diag(mask) A H, an element of the
/// generalized Jacobian of grad Phi at `at`.
inline Matrix jacobian_apply(const DualPoint& at, const Matrix& h, const SubproblemContext& ctx,
                             const Vector& mask) {
    const Incidence& inc = ctx.incidence();
    if (mask.size() != inc.num_edges()) throw DimensionError("jacobian_apply: mask length != |E|");
    if (at.cache.size() != ctx.n()) throw std::invalid_argument("jacobian_apply: stale eigen cache");
    const Vector ah = inc.a(h).cwiseProduct(mask);
    return -(prox_logdet_dderiv(at.cache, h) + inc.astar(ah)) / ctx.sigma();
}

inline Matrix jacobian_apply(const DualPoint& at, const Matrix& h, const SubproblemContext& ctx) {
    return jacobian_apply(at, h, ctx, clarke_diag(at.c));
}

struct SsnParams {
    double eta_bar = 0.1;
    double tau = 0.5;
    double mu = 0.25;
    double rho = 0.5;
    int max_iterations = 200;
    double grad_tolerance = 1e-6;
    int max_backtracks = 50;
    int max_cg_iterations = 1000;
    double ridge = 1e-12;

    void validate() const {
        if (!(eta_bar > 0.0 && eta_bar < 1.0)) throw std::invalid_argument("SsnParams: eta_bar outside (0,1)");
        if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("SsnParams: tau outside (0,1]");
        if (!(mu > 0.0 && mu < 0.5)) throw std::invalid_argument("SsnParams: mu outside (0,0.5)");
        if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("SsnParams: rho outside (0,1)");
        if (!(grad_tolerance > 0.0)) throw std::invalid_argument("SsnParams: tolerance must be positive");
    }
};

enum class SsnStatus { Converged, MaxIterations, LineSearchFailed };

inline const char* to_string(SsnStatus s) {
    switch (s) {
        case SsnStatus::Converged: return "converged";
        case SsnStatus::MaxIterations: return "max_iterations";
        case SsnStatus::LineSearchFailed: return "line_search_failed";
    }
    return "?";
}

struct SsnResult {
    DualPoint point;  // final iterate, Y = point.y
    Matrix e;         // -grad Phi(Y)
    int iterations = 0;
    int cg_iterations = 0;
    SsnStatus status = SsnStatus::Converged;
    std::vector<double> grad_norms;
    std::vector<double> phi_values;

    const Matrix& y() const { return point.y; }
};

namespace detail {

struct CgOutcome {
    Matrix x;
    int iterations = 0;
};

/// Conjugate gradients on the positive definite operator -V + ridge I.
inline CgOutcome newton_direction(const DualPoint& at, const SubproblemContext& ctx, const Vector& mask,
                                  const Matrix& rhs, double tolerance, const SsnParams& params) {
    const auto op = [&](const Matrix& h) -> Matrix {
        return -jacobian_apply(at, h, ctx, mask) + params.ridge * h;
    };
    CgOutcome out{Matrix::Zero(rhs.rows(), rhs.cols()), 0};
    Matrix r = rhs;
    Matrix p = r;
    double rr = r.squaredNorm();
    while (std::sqrt(rr) > tolerance && out.iterations < params.max_cg_iterations) {
        const Matrix ap = op(p);
        const double curvature = frob_inner(p, ap);
        if (!(curvature > 0.0)) break;
        const double alpha = rr / curvature;
        out.x += alpha * p;
        r -= alpha * ap;
        const double rr_next = r.squaredNorm();
        p = r + (rr_next / rr) * p;
        rr = rr_next;
        ++out.iterations;
    }
    return out;
}

}  // namespace detail

/// Maximizes Phi from Y0 until ||grad Phi||_F <= params.grad_tolerance.
///
/// Steps follow Armijo backtracking on Phi. Once the predicted increase
/// mu * alpha * <grad, D> drops under the rounding level of Phi the value test
/// cannot discriminate any more; a trial step is then accepted when it reduces
/// ||grad Phi|| and does not lower Phi beyond that rounding level.
inline SsnResult ssn_solve(const SubproblemContext& ctx, const Matrix& y0, const SsnParams& params = {}) {
    params.validate();
    SsnResult res;
    res.point = evaluate_dual(y0, ctx);
    double gnorm = res.point.grad.norm();
    res.grad_norms.push_back(gnorm);
    res.phi_values.push_back(res.point.phi);
    res.status = SsnStatus::MaxIterations;

    while (true) {
        if (gnorm <= params.grad_tolerance) {
            res.status = SsnStatus::Converged;
            break;
        }
        if (res.iterations >= params.max_iterations) break;

        const Vector mask = clarke_diag(res.point.c);
        const double cg_tol = std::min(params.eta_bar, std::pow(gnorm, 1.0 + params.tau));
        const auto dir = detail::newton_direction(res.point, ctx, mask, res.point.grad, cg_tol, params);
        res.cg_iterations += dir.iterations;
        const double slope = frob_inner(res.point.grad, dir.x);
        if (!(slope > 0.0)) {
            res.status = SsnStatus::LineSearchFailed;
            break;
        }

        const double noise = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(res.point.phi));
        double alpha = 1.0;
        bool accepted = false;
        for (int m = 0; m <= params.max_backtracks; ++m, alpha *= params.rho) {
            DualPoint trial = evaluate_dual(res.point.y + alpha * dir.x, ctx);
            const double predicted = params.mu * alpha * slope;
            bool ok = trial.phi >= res.point.phi + predicted;
            if (!ok && predicted <= noise) {
                ok = trial.phi >= res.point.phi - noise && trial.grad.norm() < gnorm;
            }
            if (ok) {
                res.point = std::move(trial);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            res.status = SsnStatus::LineSearchFailed;
            break;
        }
        ++res.iterations;
        gnorm = res.point.grad.norm();
        res.grad_norms.push_back(gnorm);
        res.phi_values.push_back(res.point.phi);
    }
    res.e = -res.point.grad;
    return res;
}

struct PrimalRecovery {
    Matrix theta;
    Vector w;
};

/// Theta = prox(Theta~ + J - (K + Y)/sigma) - J,  w = max(w~ + A Y / sigma, 0).
inline PrimalRecovery recover_primal(const Matrix& y, const SubproblemContext& ctx) {
    const DualPoint pt = evaluate_dual(y, ctx);
    return {pt.p - ones_over_n(ctx.n()), pt.w};
}

/// Error vector of an inexact subproblem solve and its a-priori bound.
///
/// With Q = A* w + J and P = Q - E (the prox value),
///   delta = -A[sigma E - P^{-1} E Q^{-1}],
/// which equals the direct form -A[sigma E - P^{-1} + Q^{-1}]. Given r < 1,
///   ||delta|| <= ||A|| ||E||_F [sigma + ||P^{-1}||_2^2 / (1 - r)]
/// where ||A|| is the Frobenius-to-Euclidean operator norm returned by opnorm_a.
struct ErrorCertificate {
    Vector delta;
    double ratio = kInfinity;  // r = ||P^{-1} E||_2
    double bound = kInfinity;
    double p_inverse_norm = kInfinity;

    bool valid() const { return ratio < 1.0; }
};

inline ErrorCertificate subproblem_error_vector(const Vector& w_next, const Matrix& e, const SubproblemContext& ctx,
                                                double a_norm) {
    const Incidence& inc = ctx.incidence();
    const int n = ctx.n();
    ErrorCertificate cert;
    const Matrix q = inc.astar(w_next) + ones_over_n(n);
    if (e.isZero(0.0)) {
        cert.delta = Vector::Zero(inc.num_edges());
        cert.ratio = 0.0;
        cert.bound = 0.0;
        return cert;
    }
    const SymEig pe = sym_eig(symmetrized(q - e));
    if (!(pe.values.minCoeff() > 0.0)) return cert;
    const Matrix p_inv = symmetrized(pe.vectors * pe.values.cwiseInverse().asDiagonal() * pe.vectors.transpose());
    cert.p_inverse_norm = 1.0 / pe.values.minCoeff();
    const Matrix pe_prod = p_inv * e;
    cert.ratio = std::sqrt(std::max(0.0, sym_eigenvalues(symmetrized(pe_prod.transpose() * pe_prod)).maxCoeff()));
    if (!cert.valid()) return cert;

    const Eigen::LLT<Matrix> q_llt(q);
    const Matrix inner = pe_prod * q_llt.solve(Matrix::Identity(n, n));
    cert.delta = -inc.a(symmetrized(ctx.sigma() * e - inner));
    cert.bound = a_norm * e.norm() *
                 (ctx.sigma() + cert.p_inverse_norm * cert.p_inverse_norm / (1.0 - cert.ratio));
    return cert;
}

/// Right-hand side of the inexactness test
///   ||delta|| <= (sigma/4)||dw|| + sigma ||A* dw||^2 / (2 ||dw||).
inline double stop_condition_rhs(const Vector& w_next, const Vector& w_prev, double sigma, const Incidence& inc) {
    const Vector dw = w_next - w_prev;
    const double step = dw.norm();
    if (step == 0.0) return 0.0;
    return 0.25 * sigma * step + sigma * inc.astar(dw).squaredNorm() / (2.0 * step);
}

/// Inclusive test. A zero step counts only when delta vanishes (to 1e-12).
inline bool check_stop_condition(const Vector& delta, const Vector& w_next, const Vector& w_prev, double sigma,
                                 const Incidence& inc) {
    if ((w_next - w_prev).norm() == 0.0) return delta.norm() <= 1e-12;
    return delta.norm() <= stop_condition_rhs(w_next, w_prev, sigma, inc);
}

}  // namespace lapmcp
