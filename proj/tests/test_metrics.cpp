#include "test_util.hpp"

using namespace lapmcp;
using namespace lapmcp::testing;

TEST(EdgeSet, RelativeThreshold) {
    const EdgeList edges{{0, 1}, {1, 2}};
    EXPECT_EQ(edge_set(Vector{{1.0, 1e-6}}, edges), (EdgeList{{0, 1}}));
    EXPECT_EQ(edge_set(Vector{{1.0, 2e-4}}, edges), edges);
    EXPECT_EQ(edge_set(Vector{{1.0, 2e-4}}, edges, 1e-3), (EdgeList{{0, 1}}));
    EXPECT_TRUE(edge_set(Vector::Zero(2), edges).empty());
    EXPECT_THROW(edge_set(Vector::Zero(3), edges), DimensionError);
    EXPECT_THROW(edge_set(Vector::Zero(2), edges, -1.0), std::invalid_argument);
}

TEST(F1, Arithmetic) {
    const EdgeList truth{{0, 1}, {1, 2}, {2, 3}, {3, 4}};
    const EdgeList est{{0, 1}, {1, 2}, {0, 4}};
    const EdgeDecision d = compare_edges(est, truth);
    EXPECT_EQ(d.tp, 2);
    EXPECT_EQ(d.fp, 1);
    EXPECT_EQ(d.fn, 2);
    EXPECT_DOUBLE_EQ(f1_score(d), 4.0 / 7.0);
    EXPECT_EQ(f1_score(truth, truth), 1.0);
    EXPECT_EQ(f1_score(EdgeList{}, truth), 0.0);
    EXPECT_EQ(f1_score(EdgeList{}, EdgeList{}), 1.0);
}

TEST(F1, SymmetricAndOrderFree) {
    Rng rng(1);
    const EdgeList a = random_connected_graph(12, 0.3, rng).edges();
    const EdgeList b = random_connected_graph(12, 0.3, rng).edges();
    EXPECT_DOUBLE_EQ(f1_score(a, b), f1_score(b, a));
    EdgeList shuffled = a;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_DOUBLE_EQ(f1_score(shuffled, b), f1_score(a, b));
}

TEST(F1, InvariantUnderNodeRelabeling) {
    Rng rng(2);
    const EdgeList a = random_connected_graph(10, 0.3, rng).edges();
    const EdgeList b = random_connected_graph(10, 0.3, rng).edges();
    std::vector<int> perm(10);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto relabel = [&](const EdgeList& e) {
        EdgeList out;
        for (const Edge& x : e) {
            const int i = perm[static_cast<std::size_t>(x.i)], j = perm[static_cast<std::size_t>(x.j)];
            out.push_back({std::min(i, j), std::max(i, j)});
        }
        return out;
    };
    EXPECT_DOUBLE_EQ(f1_score(relabel(a), relabel(b)), f1_score(a, b));
}

TEST(RecoveryError, Values) {
    const Matrix l = laplacian(path_graph(4).with_weights({1.0, 2.0, 0.5}));
    EXPECT_EQ(recovery_error(l, l), 0.0);
    EXPECT_DOUBLE_EQ(recovery_error(Matrix::Zero(4, 4), l), 1.0);
    EXPECT_DOUBLE_EQ(recovery_error(2 * l, l), 1.0);
    EXPECT_THROW(recovery_error(Matrix::Zero(3, 3), l), DimensionError);
    EXPECT_THROW(recovery_error(l, Matrix::Zero(4, 4)), std::invalid_argument);
}
