#pragma once

// Minimax concave penalty and its difference-of-convex split
//   p(x) = lambda |x| - h(x),
//   h(x) = x^2 / (2 gamma)                     for |x| <= gamma lambda,
//          lambda |x| - gamma lambda^2 / 2     otherwise,
//   h'(x) = min(|x| / gamma, lambda) sign(x).

#include "lapmcp/core.hpp"

#include <algorithm>
#include <concepts>

namespace lapmcp {

struct PenaltyParams {
    double lambda = 0.0;
    double gamma = 1.5;

    /// lambda = 0 is admitted: it switches the penalty off entirely.
    void validate() const {
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
            throw std::invalid_argument("penalty: lambda must be finite and non-negative");
        }
        if (!(gamma > 1.0)) throw std::invalid_argument("penalty: gamma must exceed 1");
    }
};

inline double mcp_scalar(double x, const PenaltyParams& p) {
    const double ax = std::abs(x);
    if (ax <= p.gamma * p.lambda) return p.lambda * ax - x * x / (2.0 * p.gamma);
    return 0.5 * p.gamma * p.lambda * p.lambda;
}

inline double h_scalar(double x, const PenaltyParams& p) {
    const double ax = std::abs(x);
    if (ax <= p.gamma * p.lambda) return x * x / (2.0 * p.gamma);
    return p.lambda * ax - 0.5 * p.gamma * p.lambda * p.lambda;
}

inline double h_grad_scalar(double x, const PenaltyParams& p) {
    const double mag = std::min(std::abs(x) / p.gamma, p.lambda);
    return x > 0.0 ? mag : (x < 0.0 ? -mag : 0.0);
}

/// Any separable penalty of the form lambda |x| - h(x) with h convex and
/// smooth plugs into the DCA through this interface.
template <class P>
concept DcPenalty = requires(const P& pen, double x) {
    { pen.value(x) } -> std::convertible_to<double>;
    { pen.h(x) } -> std::convertible_to<double>;
    { pen.h_grad(x) } -> std::convertible_to<double>;
    { pen.lambda() } -> std::convertible_to<double>;
};

class Mcp {
public:
    Mcp() = default;
    explicit Mcp(PenaltyParams params) : params_(params) { params_.validate(); }

    double value(double x) const { return mcp_scalar(x, params_); }
    double h(double x) const { return h_scalar(x, params_); }
    double h_grad(double x) const { return h_grad_scalar(x, params_); }
    double lambda() const { return params_.lambda; }
    const PenaltyParams& params() const { return params_; }

private:
    PenaltyParams params_;
};

static_assert(DcPenalty<Mcp>);

/// Entrywise gradient of h(Theta) = sum_{i != j} h(Theta_ij); zero diagonal.
template <DcPenalty P>
Matrix grad_h_matrix(const Matrix& theta, const P& pen) {
    require_square(theta, "grad_h_matrix");
    Matrix g(theta.rows(), theta.cols());
    for (Eigen::Index j = 0; j < theta.cols(); ++j) {
        for (Eigen::Index i = 0; i < theta.rows(); ++i) {
            g(i, j) = i == j ? 0.0 : pen.h_grad(theta(i, j));
        }
    }
    return g;
}

inline Matrix grad_h_matrix(const Matrix& theta, const PenaltyParams& params) {
    return grad_h_matrix(theta, Mcp(params));
}

/// P(Theta) = sum over off-diagonal entries.
template <DcPenalty P>
double penalty_matrix(const Matrix& theta, const P& pen) {
    double total = 0.0;
    for (Eigen::Index j = 0; j < theta.cols(); ++j) {
        for (Eigen::Index i = 0; i < theta.rows(); ++i) {
            if (i != j) total += pen.value(theta(i, j));
        }
    }
    return total;
}

template <DcPenalty P>
double h_matrix(const Matrix& theta, const P& pen) {
    double total = 0.0;
    for (Eigen::Index j = 0; j < theta.cols(); ++j) {
        for (Eigen::Index i = 0; i < theta.rows(); ++i) {
            if (i != j) total += pen.h(theta(i, j));
        }
    }
    return total;
}

inline double offdiag_l1(const Matrix& theta) {
    return theta.cwiseAbs().sum() - theta.diagonal().cwiseAbs().sum();
}

}  // namespace lapmcp
