#pragma once

#include "lapmcp/core.hpp"
#include "lapmcp/graph.hpp"
#include "lapmcp/penalty.hpp"
#include "lapmcp/symeig.hpp"

#include <vector>

namespace lapmcp {

/// Covariance, candidate edge set and penalty parameters of one estimation
/// problem. The edge set fixes the coordinates of the weight vector w.
struct ProblemData {
    Matrix s;
    Incidence incidence;
    PenaltyParams penalty;

    ProblemData() = default;

    ProblemData(Matrix covariance, Incidence inc, PenaltyParams params)
        : s(std::move(covariance)), incidence(std::move(inc)), penalty(params) {
        require_symmetric(s, "ProblemData");
        if (s.rows() != incidence.n()) {
            throw DimensionError("ProblemData: covariance is " + std::to_string(s.rows()) + "x" +
                                 std::to_string(s.cols()) + " but the graph has " +
                                 std::to_string(incidence.n()) + " nodes");
        }
        if (incidence.num_edges() == 0) throw std::invalid_argument("ProblemData: empty connectivity prior");
        s = symmetrized(s);
        penalty.validate();
    }

    ProblemData(Matrix covariance, const ConnectivityPrior& prior, PenaltyParams params)
        : ProblemData(std::move(covariance), Incidence(prior.n, prior.edges), params) {}

    int n() const { return incidence.n(); }
    Eigen::Index num_edges() const { return incidence.num_edges(); }

    /// The candidate graph has to be connected, otherwise log det(A*w + J) is
    /// -inf for every w and the objective is +inf everywhere.
    void require_connected() const {
        if (!is_connected(incidence.n(), incidence.edges())) {
            throw std::invalid_argument("connectivity prior does not yield a connected candidate graph");
        }
    }
};

/// Eigenvalue floor below which A*w + J counts as singular.
inline constexpr double kSingularEigenvalue = 1e-12;

/// -log det(Theta + J), or +inf when Theta + J is (numerically) singular.
inline double neg_logdet_shifted(const Matrix& theta) {
    const Vector ev = sym_eigenvalues(theta + ones_over_n(theta.rows()));
    if (!(ev.minCoeff() >= kSingularEigenvalue)) return kInfinity;
    return -ev.array().log().sum();
}

/// f(w) = -log det(A*w + J) + <S, A*w> + P(A*w), +inf for w outside the
/// non-negative orthant or a singular argument.
template <DcPenalty P>
double objective_f(const Vector& w, const ProblemData& problem, const P& pen) {
    if (w.size() != problem.num_edges()) throw DimensionError("objective_f: weight vector length != |E|");
    if (w.size() > 0 && w.minCoeff() < 0.0) return kInfinity;
    const Matrix theta = problem.incidence.astar(w);
    const double logdet_term = neg_logdet_shifted(theta);
    if (!std::isfinite(logdet_term)) return kInfinity;
    // Off-diagonal entries are -w_e at both (i,j) and (j,i), zero elsewhere.
    double penalty = 0.0;
    for (Eigen::Index k = 0; k < w.size(); ++k) penalty += 2.0 * pen.value(-w[k]);
    return logdet_term + frob_inner(problem.s, theta) + penalty;
}

inline double objective_f(const Vector& w, const ProblemData& problem) {
    return objective_f(w, problem, Mcp(problem.penalty));
}

}  // namespace lapmcp
