#pragma once

#include "lapmcp/core.hpp"

#include <Eigen/Eigenvalues>

namespace lapmcp {

/// X = U diag(values) U^T with values ascending.
struct SymEig {
    Matrix vectors;
    Vector values;

    Matrix reconstruct() const {
        return vectors * values.asDiagonal() * vectors.transpose();
    }
};

/// Relative asymmetry accepted by sym_eig before it rejects the input.
inline constexpr double kSymmetryTolerance = 1e-12;

inline void require_symmetric(const Matrix& x, const char* what) {
    require_square(x, what);
    const double scale = x.norm();
    if ((x - x.transpose()).norm() > kSymmetryTolerance * scale) {
        throw std::invalid_argument(std::string(what) + ": matrix is not symmetric");
    }
}

/// Dense symmetric eigendecomposition. Only the lower triangle is read once
/// the symmetry check has passed.
inline SymEig sym_eig(const Matrix& x) {
    require_symmetric(x, "sym_eig");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(x, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("sym_eig: eigensolver did not converge");
    }
    return {solver.eigenvectors(), solver.eigenvalues()};
}

/// Eigenvalues only, ascending.
inline Vector sym_eigenvalues(const Matrix& x) {
    require_symmetric(x, "sym_eigenvalues");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(x, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("sym_eigenvalues: eigensolver did not converge");
    }
    return solver.eigenvalues();
}

}  // namespace lapmcp
