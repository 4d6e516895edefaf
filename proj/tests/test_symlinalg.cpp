#include "test_util.hpp"

using namespace lapmcp;
using namespace lapmcp::testing;

namespace {

Incidence path3() { return Incidence(3, {{0, 1}, {1, 2}}); }

double prox_residual(const Matrix& p, const Matrix& x, double sigma) {
    return (-p.inverse() + sigma * (p - x)).norm();
}

}  // namespace

TEST(SymEig, Identity) {
    const SymEig e = sym_eig(Matrix::Identity(4, 4));
    EXPECT_TRUE(e.values.isApprox(Vector::Ones(4), 1e-15));
}

TEST(SymEig, DiagonalAscending) {
    Matrix x = Vector{{3.0, 1.0, 2.0}}.asDiagonal();
    const SymEig e = sym_eig(x);
    EXPECT_TRUE(e.values.isApprox(Vector{{1.0, 2.0, 3.0}}, 1e-15));
    EXPECT_TRUE(e.vectors.cwiseAbs().isApprox(
        (Matrix(3, 3) << 0, 0, 1, 1, 0, 0, 0, 1, 0).finished(), 1e-15));
}

TEST(SymEig, ReconstructsRandomMatrix) {
    Rng rng(2);
    const Matrix x = random_symmetric(8, rng);
    const SymEig e = sym_eig(x);
    EXPECT_LT((e.reconstruct() - x).norm(), 1e-10 * std::max(1.0, x.norm()));
    EXPECT_LT((e.vectors * e.vectors.transpose() - Matrix::Identity(8, 8)).norm(), 1e-12);
}

TEST(SymEig, RejectsAsymmetric) {
    Matrix x(2, 2);
    x << 1, 2, 0, 1;
    EXPECT_THROW(sym_eig(x), std::invalid_argument);
}

TEST(ProxLogdet, ScalarZero) {
    EXPECT_NEAR(prox_logdet(Matrix::Zero(1, 1), 1.0).value(0, 0), 1.0, 1e-15);
}

TEST(ProxLogdet, ScalarThree) {
    EXPECT_NEAR(prox_logdet(Matrix::Constant(1, 1, 3.0), 1.0).value(0, 0), (std::sqrt(13.0) + 3.0) / 2.0, 1e-14);
}

TEST(ProxLogdet, LargeSigmaReturnsInput) {
    Rng rng(4);
    Matrix x = random_symmetric(5, rng);
    x += (1.0 - sym_eigenvalues(x).minCoeff()) * Matrix::Identity(5, 5);
    EXPECT_LT((prox_logdet(x, 1e8).value - x).norm(), 1e-6);
}

TEST(ProxLogdet, OptimalityResidual) {
    Rng rng(6);
    for (double sigma : {0.1, 1.0, 10.0}) {
        for (int n = 1; n <= 10; ++n) {
            const Matrix x = random_symmetric(n, rng, 2.0);
            const Matrix p = prox_logdet(x, sigma).value;
            EXPECT_GT(sym_eigenvalues(p).minCoeff(), 0.0);
            EXPECT_LT(prox_residual(p, x, sigma), 1e-8 * sigma * std::max(1.0, x.norm()));
        }
    }
}

TEST(ProxLogdet, StrongNegativeEigenvaluesStayAccurate) {
    Matrix x = Matrix::Zero(2, 2);
    x(0, 0) = -1e6;
    x(1, 1) = 2.0;
    const double sigma = 1e-3;
    const Matrix p = prox_logdet(x, sigma).value;
    // Scalar equation -1/d + sigma (d - x) = 0 holds in relative terms.
    const double d = p(0, 0);
    EXPECT_GT(d, 0.0);
    EXPECT_NEAR(-1.0 / d + sigma * (d - x(0, 0)), 0.0, 1e-9 / d);
}

TEST(ProxLogdet, RejectsNonPositiveSigma) {
    EXPECT_THROW(prox_logdet(Matrix::Identity(2, 2), 0.0), std::invalid_argument);
    EXPECT_THROW(prox_logdet(Matrix::Identity(2, 2), -1.0), std::invalid_argument);
}

TEST(ProxDerivative, ZeroDirection) {
    Rng rng(1);
    const auto pr = prox_logdet(random_symmetric(4, rng), 1.0);
    EXPECT_TRUE(prox_logdet_dderiv(pr.cache, Matrix::Zero(4, 4)).isZero(0.0));
}

TEST(ProxDerivative, GammaIsHalfAtZeroSpectrum) {
    const EigCache c(sym_eig(Matrix::Zero(3, 3)), 1.0);
    EXPECT_TRUE(c.gamma().isApprox(Matrix::Constant(3, 3, 0.5), 1e-15));
}

TEST(ProxDerivative, GammaWithinUnitInterval) {
    Rng rng(13);
    const EigCache c(sym_eig(random_symmetric(7, rng, 3.0)), 0.5);
    EXPECT_GT(c.gamma().minCoeff(), 0.0);
    EXPECT_LT(c.gamma().maxCoeff(), 1.0);
    EXPECT_GT(c.prox_values().minCoeff(), 0.0);
}

TEST(ProxDerivative, FiniteDifferenceAtFirstOrder) {
    Rng rng(7);
    const Matrix x = random_symmetric(6, rng);
    const Matrix h = random_symmetric(6, rng);
    const auto base = prox_logdet(x, 1.0);
    const Matrix d = prox_logdet_dderiv(base.cache, h);
    double err_prev = 0.0;
    for (double t : {1e-4, 1e-5}) {
        const Matrix fd = (prox_logdet(x + t * h, 1.0).value - base.value) / t;
        const double err = (fd - d).norm();
        EXPECT_LT(err, 50.0 * t * h.squaredNorm());
        if (err_prev > 0.0) {
            EXPECT_LT(err, 0.2 * err_prev);
        }
        err_prev = err;
    }
}

TEST(ProxDerivative, LinearAndSymmetric) {
    Rng rng(8);
    const auto base = prox_logdet(random_symmetric(5, rng), 2.0);
    const Matrix h1 = random_symmetric(5, rng), h2 = random_symmetric(5, rng);
    const Matrix lhs = prox_logdet_dderiv(base.cache, 2.0 * h1 - 3.0 * h2);
    const Matrix rhs = 2.0 * prox_logdet_dderiv(base.cache, h1) - 3.0 * prox_logdet_dderiv(base.cache, h2);
    EXPECT_LT((lhs - rhs).norm(), 1e-12);
    EXPECT_TRUE(lhs.isApprox(lhs.transpose(), 0.0));
    // Self-adjoint in the trace inner product.
    EXPECT_NEAR(frob_inner(prox_logdet_dderiv(base.cache, h1), h2), frob_inner(h1, prox_logdet_dderiv(base.cache, h2)),
                1e-12);
}

TEST(ProxDerivative, RejectsWrongSize) {
    const auto base = prox_logdet(Matrix::Identity(3, 3), 1.0);
    EXPECT_THROW(prox_logdet_dderiv(base.cache, Matrix::Zero(2, 2)), DimensionError);
}

TEST(Moreau, ScalarValue) {
    const double p = (std::sqrt(5.0) + 1.0) / 2.0;
    EXPECT_NEAR(moreau_logdet_value(Matrix::Ones(1, 1), 1.0), -std::log(p) + 0.5 * (p - 1.0) * (p - 1.0), 1e-15);
}

TEST(Moreau, GradientIdentity) {
    Rng rng(9);
    for (double sigma : {0.1, 1.0, 10.0}) {
        const Matrix x = random_symmetric(5, rng);
        const Matrix grad = sigma * (x - prox_logdet(x, sigma).value);
        const Matrix h = random_symmetric(5, rng);
        const double t = 1e-6;
        const double fd = (moreau_logdet_value(x + t * h, sigma) - moreau_logdet_value(x - t * h, sigma)) / (2 * t);
        EXPECT_NEAR(fd, frob_inner(grad, h), 1e-6 * std::max(1.0, std::abs(fd)));
    }
}

TEST(Moreau, MidpointConvexity) {
    Rng rng(10);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix a = random_symmetric(4, rng, 2.0), b = random_symmetric(4, rng, 2.0);
        EXPECT_LE(moreau_logdet_value(0.5 * (a + b), 1.0),
                  0.5 * (moreau_logdet_value(a, 1.0) + moreau_logdet_value(b, 1.0)) + 1e-12);
    }
}

TEST(Projection, Examples) {
    EXPECT_EQ(project_nonneg(Vector{{1.0, -2.0, 0.0}}), (Vector{{1.0, 0.0, 0.0}}));
    EXPECT_TRUE(project_nonneg(Vector{{-1.0, -0.5}}).isZero(0.0));
}

TEST(Projection, IdempotentAndNearest) {
    Rng rng(14);
    const Vector c = random_vector(12, rng);
    const Vector pc = project_nonneg(c);
    EXPECT_EQ(project_nonneg(pc), pc);
    for (int trial = 0; trial < 100; ++trial) {
        const Vector v = random_vector(12, rng, 0.0, 1.0);
        EXPECT_LE((c - pc).norm(), (c - v).norm());
    }
}

TEST(Clarke, TieRuleAndPositives) {
    EXPECT_EQ(clarke_diag(Vector{{1.0, -1.0, 0.0}}), (Vector{{1.0, 0.0, 0.0}}));
    EXPECT_EQ(clarke_diag(Vector::Constant(4, 0.3)), Vector::Ones(4));
}

TEST(Clarke, MatchesDirectionalProbe) {
    Rng rng(15);
    const Vector c = random_vector(10, rng);
    const Vector m = clarke_diag(c);
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        for (double t : {1e-6, -1e-6}) {
            Vector e = Vector::Zero(c.size());
            e[i] = t;
            const Vector diff = project_nonneg(c + e) - project_nonneg(c);
            EXPECT_NEAR(diff[i], t * m[i], 1e-15);  // rounding of c + t
        }
    }
}

TEST(AatMatrix, PathExample) {
    const Matrix m = build_aat_matrix(path3());
    EXPECT_TRUE(m.isApprox((Matrix(2, 2) << 4, 1, 1, 4).finished(), 0.0));
}

TEST(AatMatrix, MatchesOperatorAndBruteForce) {
    Rng rng(16);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 7;
        const Incidence inc(random_connected_graph(n, 0.5, rng));
        const SparseMatrix m = build_aat_matrix(inc);
        const Matrix b = inc.matrix();
        const Vector w = random_vector(inc.num_edges(), rng);
        const Vector brute = (b.transpose() * b * w.asDiagonal() * b.transpose() * b).diagonal();
        EXPECT_LT((m * w - brute).norm(), 1e-12);
        EXPECT_LT((m * w - inc.a(inc.astar(w))).norm(), 1e-12);
        EXPECT_TRUE(Matrix(m).diagonal().isApprox(Vector::Constant(inc.num_edges(), 4.0), 0.0));
    }
}

TEST(GramSolver, PathSystem) {
    const Incidence inc = path3();
    for (GramStrategy s : {GramStrategy::Cholesky, GramStrategy::Smw, GramStrategy::Cg}) {
        const GramSolver g(inc, s);
        EXPECT_LT((solve_shifted_gram(g, Vector{{6.0, 6.0}}) - Vector{{1.0, 1.0}}).norm(), 1e-12) << to_string(s);
        EXPECT_TRUE(solve_shifted_gram(g, Vector::Zero(2)).isZero(0.0));
    }
}

TEST(GramSolver, StrategiesAgree) {
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const Incidence inc(random_connected_graph(15, 0.4, rng));
        const Vector b = random_vector(inc.num_edges(), rng);
        const Vector xc = GramSolver(inc, GramStrategy::Cholesky).solve(b);
        const Vector xs = GramSolver(inc, GramStrategy::Smw).solve(b);
        const Vector xg = GramSolver(inc, GramStrategy::Cg).solve(b);
        const GramSolver any(inc, GramStrategy::Cholesky);
        EXPECT_LT((any.apply(xc) - b).norm(), 1e-10 * b.norm());
        EXPECT_LT((any.apply(xs) - b).norm(), 1e-10 * b.norm());
        EXPECT_LT((xc - xs).norm(), 1e-8);
        EXPECT_LT((xc - xg).norm(), 1e-8);
        // apply() is I + A A*.
        EXPECT_LT((any.apply(b) - (b + inc.a(inc.astar(b)))).norm(), 1e-12);
    }
}

TEST(GramSolver, AutoSelection) {
    EXPECT_EQ(select_gram_strategy(100, 495), GramStrategy::Cholesky);
    EXPECT_EQ(select_gram_strategy(160, 12720), GramStrategy::Smw);
    EXPECT_EQ(select_gram_strategy(100, 4950), GramStrategy::Smw);
    EXPECT_EQ(select_gram_strategy(6000, 20000), GramStrategy::Cg);
    EXPECT_THROW(GramSolver(path3()).solve(Vector::Zero(3)), DimensionError);
}

TEST(OpNorm, SingleEdge) { EXPECT_NEAR(opnorm_a(Incidence(2, {{0, 1}})), 2.0, 1e-8); }

TEST(OpNorm, Path) { EXPECT_NEAR(opnorm_a(path3()), std::sqrt(5.0), 1e-8); }

TEST(OpNorm, MatchesDenseEigenvalueAndBounds) {
    Rng rng(18);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 3 + trial;
        const Incidence inc(random_connected_graph(n, 0.5, rng));
        const double norm = opnorm_a(inc);
        const double exact = std::sqrt(sym_eigenvalues(Matrix(build_aat_matrix(inc))).maxCoeff());
        EXPECT_GE(norm, exact * (1.0 - 1e-12));
        EXPECT_LE(norm, exact * (1.0 + 1e-8));
        for (int probe = 0; probe < 10; ++probe) {
            const Matrix x = random_symmetric(n, rng);
            EXPECT_LE(inc.a(x).norm(), norm * x.norm() * (1.0 + 1e-12));
        }
    }
}
