#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lapmcp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Thrown when operand shapes do not agree.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Frobenius inner product <X, Y> = trace(X^T Y).
inline double frob_inner(const Matrix& x, const Matrix& y) {
    return x.cwiseProduct(y).sum();
}

/// The constant matrix J = (1/n) 1 1^T.
inline Matrix ones_over_n(Eigen::Index n) {
    return Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
}

inline Matrix symmetrized(const Matrix& x) {
    return 0.5 * (x + x.transpose());
}

inline void require_square(const Matrix& x, const char* what) {
    if (x.rows() != x.cols()) {
        throw DimensionError(std::string(what) + ": matrix is not square");
    }
}

}  // namespace lapmcp
