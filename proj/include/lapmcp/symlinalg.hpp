#pragma once

// Proximal maps used by the solvers and the structured linear algebra around
// the incidence operator.
//
//   prox of l(X) = -log det X with parameter sigma:
//     argmin_Z { -log det Z + (sigma/2) ||Z - X||^2 } = U D U^T
//   with X = U Lambda U^T and D_ii = (sqrt(Lambda_ii^2 + 4/sigma) + Lambda_ii) / 2.

#include "lapmcp/core.hpp"
#include "lapmcp/graph.hpp"
#include "lapmcp/symeig.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <memory>

namespace lapmcp {

/// Spectral data of a prox-logdet evaluation: eigenpairs of the base point,
/// the prox eigenvalues D and the divided-difference matrix Gamma of the map.
class EigCache {
public:
    EigCache() = default;

    EigCache(SymEig eig, double sigma) : eig_(std::move(eig)), sigma_(sigma) {
        if (!(sigma > 0.0)) throw std::invalid_argument("prox_logdet: sigma must be positive");
        const Eigen::Index n = eig_.values.size();
        root_.resize(n);
        d_.resize(n);
        const double c = 4.0 / sigma;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double lam = eig_.values[i];
            root_[i] = std::sqrt(lam * lam + c);
            // Avoid cancellation for strongly negative eigenvalues.
            d_[i] = lam >= 0.0 ? 0.5 * (root_[i] + lam) : (2.0 / sigma) / (root_[i] - lam);
        }
        // 1/2 [1 + (l_i + l_j)/(r_i + r_j)] rewritten as (d_i + d_j)/(r_i + r_j).
        gamma_.resize(n, n);
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index i = 0; i < n; ++i) {
                gamma_(i, j) = (d_[i] + d_[j]) / (root_[i] + root_[j]);
            }
        }
    }

    const Matrix& vectors() const { return eig_.vectors; }
    const Vector& values() const { return eig_.values; }
    const Vector& prox_values() const { return d_; }
    const Matrix& gamma() const { return gamma_; }
    double sigma() const { return sigma_; }
    Eigen::Index size() const { return d_.size(); }

    Matrix prox() const { return spectral(d_); }
    Matrix prox_inverse() const { return spectral(d_.cwiseInverse()); }
    double logdet_prox() const { return d_.array().log().sum(); }

    Matrix spectral(const Vector& f) const {
        return symmetrized(eig_.vectors * f.asDiagonal() * eig_.vectors.transpose());
    }

private:
    SymEig eig_;
    double sigma_ = 1.0;
    Vector root_;
    Vector d_;
    Matrix gamma_;
};

struct ProxResult {
    Matrix value;
    EigCache cache;
};

inline ProxResult prox_logdet(const Matrix& x, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("prox_logdet: sigma must be positive");
    EigCache cache(sym_eig(x), sigma);
    Matrix p = cache.prox();
    return {std::move(p), std::move(cache)};
}

/// Directional derivative of the prox at the cached base point:
/// U [Gamma o (U^T H U)] U^T.
inline Matrix prox_logdet_dderiv(const EigCache& cache, const Matrix& h) {
    const Matrix& u = cache.vectors();
    if (h.rows() != u.rows() || h.cols() != u.rows()) {
        throw DimensionError("prox_logdet_dderiv: direction has wrong size");
    }
    Matrix t = u.transpose() * h * u;
    t.array() *= cache.gamma().array();
    return symmetrized(u * t * u.transpose());
}

/// Moreau envelope of -log det: l(P) + (sigma/2) ||P - X||^2 at P = prox(X).
inline double moreau_logdet_value(const EigCache& cache) {
    const Vector gap = cache.prox_values() - cache.values();
    return -cache.logdet_prox() + 0.5 * cache.sigma() * gap.squaredNorm();
}

inline double moreau_logdet_value(const Matrix& x, double sigma) {
    return moreau_logdet_value(EigCache(sym_eig(x), sigma));
}

/// Componentwise max{c, 0}.
inline Vector project_nonneg(const Vector& c) { return c.cwiseMax(0.0); }

/// 0/1 diagonal of an element of the Clarke Jacobian of the projection;
/// ties (c_i = 0) take 0.
inline Vector clarke_diag(const Vector& c) {
    return (c.array() > 0.0).cast<double>().matrix();
}

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Matrix form 2I + |B|^T |B| of the operator w -> A A* w.
inline SparseMatrix build_aat_matrix(const Incidence& inc) {
    const SparseMatrix abs_b = inc.matrix().cwiseAbs();
    SparseMatrix out = SparseMatrix(abs_b.transpose()) * abs_b;
    SparseMatrix eye(inc.num_edges(), inc.num_edges());
    eye.setIdentity();
    out += 2.0 * eye;
    out.makeCompressed();
    return out;
}

enum class GramStrategy { Auto, Cholesky, Smw, Cg };

inline const char* to_string(GramStrategy s) {
    switch (s) {
        case GramStrategy::Auto: return "auto";
        case GramStrategy::Cholesky: return "cholesky";
        case GramStrategy::Smw: return "smw";
        case GramStrategy::Cg: return "cg";
    }
    return "?";
}

/// Strategy picked for GramStrategy::Auto.
inline GramStrategy select_gram_strategy(Eigen::Index nodes, Eigen::Index edges) {
    // Edge-space Cholesky fills in badly once nodes carry many edges; the
    // n x n Woodbury system is then the cheaper factorization.
    if (edges < 5000 && edges < 10 * nodes) return GramStrategy::Cholesky;
    if (nodes < 5000) return GramStrategy::Smw;
    return GramStrategy::Cg;
}

struct GramCgOptions {
    double relative_tolerance = 1e-10;
    // Zero means 10 |E|.
    Eigen::Index max_iterations = 0;
};

/// Solver for (3I + |B|^T |B|) x = b, i.e. (I + A A*) x = b.
class GramSolver {
public:
    using CgOptions = GramCgOptions;

    GramSolver(const Incidence& inc, GramStrategy strategy = GramStrategy::Auto, CgOptions cg = {})
        : abs_b_(inc.matrix().cwiseAbs()), cg_(cg) {
        abs_b_.makeCompressed();
        strategy_ = strategy == GramStrategy::Auto ? select_gram_strategy(inc.n(), inc.num_edges()) : strategy;
        if (strategy_ == GramStrategy::Cholesky) {
            SparseMatrix m = SparseMatrix(abs_b_.transpose()) * abs_b_;
            SparseMatrix eye(inc.num_edges(), inc.num_edges());
            eye.setIdentity();
            m += 3.0 * eye;
            factor_ = std::make_shared<Factor>(m);
        } else if (strategy_ == GramStrategy::Smw) {
            SparseMatrix m = abs_b_ * SparseMatrix(abs_b_.transpose());
            SparseMatrix eye(inc.n(), inc.n());
            eye.setIdentity();
            m += 3.0 * eye;
            factor_ = std::make_shared<Factor>(m);
        }
        if (factor_ && factor_->info() != Eigen::Success) {
            throw std::runtime_error("GramSolver: Cholesky factorization failed");
        }
    }

    GramStrategy strategy() const { return strategy_; }
    Eigen::Index size() const { return abs_b_.cols(); }

    /// (3I + |B|^T |B|) x in O(|E|).
    Vector apply(const Vector& x) const {
        const Vector t = abs_b_ * x;
        return 3.0 * x + abs_b_.transpose() * t;
    }

    Vector solve(const Vector& b) const {
        if (b.size() != size()) throw DimensionError("solve_shifted_gram: rhs length != |E|");
        switch (strategy_) {
            case GramStrategy::Cholesky: return factor_->solve(b);
            case GramStrategy::Smw: {
                // (3I + |B|^T|B|)^{-1} = (1/3)(I - |B|^T (3I + |B||B|^T)^{-1} |B|)
                const Vector small = factor_->solve(abs_b_ * b);
                return (b - abs_b_.transpose() * small) / 3.0;
            }
            default: return conjugate_gradient(b);
        }
    }

private:
    using Factor = Eigen::SimplicialLLT<SparseMatrix>;

    Vector conjugate_gradient(const Vector& b) const {
        Vector x = Vector::Zero(b.size());
        const double bnorm = b.norm();
        if (bnorm == 0.0) return x;
        const Eigen::Index cap = cg_.max_iterations > 0 ? cg_.max_iterations : 10 * b.size();
        Vector r = b;
        Vector p = r;
        double rr = r.squaredNorm();
        for (Eigen::Index it = 0; it < cap && std::sqrt(rr) > cg_.relative_tolerance * bnorm; ++it) {
            const Vector ap = apply(p);
            const double alpha = rr / p.dot(ap);
            x += alpha * p;
            r -= alpha * ap;
            const double rr_next = r.squaredNorm();
            p = r + (rr_next / rr) * p;
            rr = rr_next;
        }
        return x;
    }

    SparseMatrix abs_b_;
    CgOptions cg_;
    GramStrategy strategy_ = GramStrategy::Cg;
    std::shared_ptr<const Factor> factor_;
};

inline Vector solve_shifted_gram(const GramSolver& solver, const Vector& b) { return solver.solve(b); }

/// ||A||_2 = sqrt(lambda_max(2I + |B|^T|B|)).
///
/// Power iteration from the all-ones vector. The matrix is entrywise
/// non-negative with positive diagonal, so the iterates stay positive and the
/// Collatz-Wielandt ratio max_i (Mx)_i / x_i bounds lambda_max from above;
/// that upper bound is what gets returned.
inline double opnorm_a(const Incidence& inc, double relative_tolerance = 1e-8) {
    const Eigen::Index m = inc.num_edges();
    if (m == 0) return 0.0;
    const SparseMatrix aat = build_aat_matrix(inc);
    Vector x = Vector::Ones(m);
    double upper = kInfinity;
    for (int it = 0; it < 100000; ++it) {
        const Vector y = aat * x;
        upper = (x.array() > 0.0).select(y.array() / x.array(), 0.0).maxCoeff();
        const double rayleigh = x.dot(y) / x.squaredNorm();
        x = y / y.norm();
        if (upper - rayleigh <= relative_tolerance * upper) break;
    }
    return std::sqrt(upper);
}

}  // namespace lapmcp
