#pragma once

// Graphs, the node-arc incidence structure and the edge-weight operators
//   A* w = B Diag(w) B^T      (weights -> Laplacian)
//   A X  = diag(B^T X B)      (its adjoint)
// plus the random ensembles and covariance synthesis used by the benchmarks.

#include "lapmcp/core.hpp"
#include "lapmcp/symeig.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <compare>
#include <cstdint>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace lapmcp {

struct Edge {
    int i = 0;
    int j = 0;
    auto operator<=>(const Edge&) const = default;
};

using EdgeList = std::vector<Edge>;

namespace detail {

inline void validate_edges(int n, const EdgeList& edges) {
    if (n < 1) throw std::invalid_argument("graph: node count must be positive");
    for (const Edge& e : edges) {
        if (e.i < 0 || e.j >= n || e.i >= e.j) {
            throw std::invalid_argument("graph: edge (" + std::to_string(e.i) + "," +
                                        std::to_string(e.j) + ") violates 0 <= i < j < n");
        }
    }
    EdgeList sorted = edges;
    std::sort(sorted.begin(), sorted.end());
    const auto dup = std::adjacent_find(sorted.begin(), sorted.end());
    if (dup != sorted.end()) {
        throw std::invalid_argument("graph: duplicate edge (" + std::to_string(dup->i) + "," +
                                    std::to_string(dup->j) + ")");
    }
}

}  // namespace detail

/// Undirected graph on nodes 0..n-1 with lexicographically ordered edges and
/// optional non-negative weights aligned with the edges.
class EdgeGraph {
public:
    EdgeGraph() = default;

    EdgeGraph(int n, EdgeList edges, std::optional<std::vector<double>> weights = std::nullopt)
        : n_(n) {
        if (weights && weights->size() != edges.size()) {
            throw std::invalid_argument("graph: weight count does not match edge count");
        }
        std::vector<std::size_t> order(edges.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return edges[a] < edges[b]; });
        edges_.reserve(edges.size());
        for (std::size_t k : order) edges_.push_back(edges[k]);
        detail::validate_edges(n, edges_);
        if (weights) {
            std::vector<double> sorted;
            sorted.reserve(order.size());
            for (std::size_t k : order) {
                const double w = (*weights)[k];
                if (!(w >= 0.0)) throw std::invalid_argument("graph: weights must be non-negative");
                sorted.push_back(w);
            }
            weights_ = std::move(sorted);
        }
    }

    int n() const { return n_; }
    const EdgeList& edges() const { return edges_; }
    std::size_t num_edges() const { return edges_.size(); }
    bool has_weights() const { return weights_.has_value(); }

    const std::vector<double>& weights() const {
        if (!weights_) throw std::logic_error("graph: no weights attached");
        return *weights_;
    }

    Vector weight_vector() const {
        const auto& w = weights();
        return Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
    }

    EdgeGraph with_weights(std::vector<double> w) const { return EdgeGraph(n_, edges_, std::move(w)); }

    std::vector<int> degrees() const {
        std::vector<int> deg(static_cast<std::size_t>(n_), 0);
        for (const Edge& e : edges_) {
            ++deg[static_cast<std::size_t>(e.i)];
            ++deg[static_cast<std::size_t>(e.j)];
        }
        return deg;
    }

private:
    int n_ = 0;
    EdgeList edges_;
    std::optional<std::vector<double>> weights_;
};

/// Node-arc incidence matrix B (n x |E|), column (ij) = e_i - e_j, with the
/// linear maps A* and A built on top of it.
class Incidence {
public:
    Incidence() = default;

    Incidence(int n, EdgeList edges) : n_(n), edges_(std::move(edges)) {
        detail::validate_edges(n_, edges_);
        std::vector<Eigen::Triplet<double>> triplets;
        triplets.reserve(2 * edges_.size());
        for (std::size_t k = 0; k < edges_.size(); ++k) {
            const auto col = static_cast<int>(k);
            triplets.emplace_back(edges_[k].i, col, 1.0);
            triplets.emplace_back(edges_[k].j, col, -1.0);
        }
        b_.resize(n_, static_cast<Eigen::Index>(edges_.size()));
        b_.setFromTriplets(triplets.begin(), triplets.end());
    }

    explicit Incidence(const EdgeGraph& g) : Incidence(g.n(), g.edges()) {}

    int n() const { return n_; }
    Eigen::Index num_edges() const { return static_cast<Eigen::Index>(edges_.size()); }
    const EdgeList& edges() const { return edges_; }
    const Eigen::SparseMatrix<double>& matrix() const { return b_; }

    /// A* w = B Diag(w) B^T.
    Matrix astar(const Vector& w) const {
        if (w.size() != num_edges()) throw DimensionError("apply_astar: weight vector length != |E|");
        Matrix out = Matrix::Zero(n_, n_);
        for (std::size_t k = 0; k < edges_.size(); ++k) {
            const double wk = w[static_cast<Eigen::Index>(k)];
            const int i = edges_[k].i;
            const int j = edges_[k].j;
            out(i, i) += wk;
            out(j, j) += wk;
            out(i, j) -= wk;
            out(j, i) -= wk;
        }
        return out;
    }

    /// A X = diag(B^T X B), i.e. X_ii + X_jj - X_ij - X_ji per edge.
    Vector a(const Matrix& x) const {
        if (x.rows() != n_ || x.cols() != n_) throw DimensionError("apply_a: matrix is not n x n");
        Vector out(num_edges());
        for (std::size_t k = 0; k < edges_.size(); ++k) {
            const int i = edges_[k].i;
            const int j = edges_[k].j;
            out[static_cast<Eigen::Index>(k)] = x(i, i) + x(j, j) - x(i, j) - x(j, i);
        }
        return out;
    }

private:
    int n_ = 0;
    EdgeList edges_;
    Eigen::SparseMatrix<double> b_;
};

inline Matrix apply_astar(const Vector& w, const Incidence& b) { return b.astar(w); }
inline Vector apply_a(const Matrix& x, const Incidence& b) { return b.a(x); }

/// The combinatorial Laplacian of a weighted graph.
inline Matrix laplacian(const EdgeGraph& g) {
    return Incidence(g).astar(g.weight_vector());
}

inline bool is_connected(int n, const EdgeList& edges) {
    if (n <= 1) return true;
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (const Edge& e : edges) {
        adj[static_cast<std::size_t>(e.i)].push_back(e.j);
        adj[static_cast<std::size_t>(e.j)].push_back(e.i);
    }
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = 1;
    int visited = 1;
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop();
        for (int v : adj[static_cast<std::size_t>(u)]) {
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = 1;
                ++visited;
                frontier.push(v);
            }
        }
    }
    return visited == n;
}

inline bool is_connected(const EdgeGraph& g) { return is_connected(g.n(), g.edges()); }

// ---------------------------------------------------------------------------
// Random ensembles

using Rng = std::mt19937_64;

inline EdgeGraph gen_erdos_renyi(int n, double p, std::uint64_t seed) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("gen_erdos_renyi: p must lie in (0, 1)");
    if (n < 1) throw std::invalid_argument("gen_erdos_renyi: n must be positive");
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    EdgeList edges;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (u(rng) < p) edges.push_back({i, j});
        }
    }
    return EdgeGraph(n, std::move(edges));
}

/// sqrt(n) x sqrt(n) lattice, each node linked to its four nearest neighbours.
inline EdgeGraph gen_grid(int n) {
    if (n < 1) throw std::invalid_argument("gen_grid: n must be positive");
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
    if (side * side != n) throw std::invalid_argument("gen_grid: n must be a perfect square");
    EdgeList edges;
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            const int u = r * side + c;
            if (c + 1 < side) edges.push_back({u, u + 1});
            if (r + 1 < side) edges.push_back({u, u + side});
        }
    }
    return EdgeGraph(n, std::move(edges));
}

/// Module index of a node when n nodes are split into equal contiguous blocks.
inline int module_of(int node, int n, int modules) {
    return static_cast<int>(static_cast<long long>(node) * modules / n);
}

/// Random modular graph: within-module edge probability p2, across-module p1.
inline EdgeGraph gen_modular(int n, double p1, double p2, std::uint64_t seed, int modules = 4) {
    if (!(p1 > 0.0 && p1 < 1.0) || !(p2 > 0.0 && p2 < 1.0)) {
        throw std::invalid_argument("gen_modular: probabilities must lie in (0, 1)");
    }
    if (modules < 1 || modules > n) throw std::invalid_argument("gen_modular: invalid module count");
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    EdgeList edges;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double p = module_of(i, n, modules) == module_of(j, n, modules) ? p2 : p1;
            if (u(rng) < p) edges.push_back({i, j});
        }
    }
    return EdgeGraph(n, std::move(edges));
}

/// Attach i.i.d. Uniform[lo, hi] weights.
inline EdgeGraph sample_weights(const EdgeGraph& g, double lo, double hi, std::uint64_t seed) {
    if (!(lo > 0.0) || hi < lo) throw std::invalid_argument("sample_weights: need 0 < lo <= hi");
    if (g.num_edges() == 0) throw std::invalid_argument("sample_weights: graph has no edges");
    Rng rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> w(g.num_edges());
    for (double& x : w) x = (lo == hi) ? lo : u(rng);
    return g.with_weights(std::move(w));
}

// ---------------------------------------------------------------------------
// Connectivity priors

enum class PriorKind { True, Coarse, Full, Drop };

inline const char* to_string(PriorKind k) {
    switch (k) {
        case PriorKind::True: return "true";
        case PriorKind::Coarse: return "coarse";
        case PriorKind::Full: return "full";
        case PriorKind::Drop: return "drop";
    }
    return "?";
}

/// Edge set allowed to carry weight, with where it came from. `parameter` is
/// the coarsening factor or the drop percentage.
struct ConnectivityPrior {
    int n = 0;
    EdgeList edges;
    PriorKind kind = PriorKind::True;
    double parameter = 0.0;
};

inline ConnectivityPrior true_prior(const EdgeGraph& g) {
    return {g.n(), g.edges(), PriorKind::True, 0.0};
}

inline ConnectivityPrior full_prior(int n) {
    EdgeList edges;
    edges.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) edges.push_back({i, j});
    }
    return {n, std::move(edges), PriorKind::Full, 0.0};
}

struct PerturbMode {
    PriorKind kind = PriorKind::Full;
    double parameter = 0.0;

    static PerturbMode coarse(double factor) { return {PriorKind::Coarse, factor}; }
    static PerturbMode full() { return {PriorKind::Full, 0.0}; }
    static PerturbMode drop(double percent) { return {PriorKind::Drop, percent}; }
};

/// coarse(f): superset of size round(f |E|) obtained by adding random non-edges.
/// full: all pairs. drop(d): removes round(d% |E|) random edges.
inline ConnectivityPrior perturb_connectivity(const ConnectivityPrior& truth, PerturbMode mode,
                                              std::uint64_t seed) {
    Rng rng(seed);
    const auto m = static_cast<long long>(truth.edges.size());
    switch (mode.kind) {
        case PriorKind::True: return truth;
        case PriorKind::Full: return full_prior(truth.n);
        case PriorKind::Coarse: {
            if (!(mode.parameter >= 1.0)) throw std::invalid_argument("perturb_connectivity: coarse factor < 1");
            const long long target = std::llround(mode.parameter * static_cast<double>(m));
            const long long all_pairs = static_cast<long long>(truth.n) * (truth.n - 1) / 2;
            if (target > all_pairs) throw std::invalid_argument("perturb_connectivity: not enough non-edges");
            std::set<Edge> present(truth.edges.begin(), truth.edges.end());
            EdgeList candidates;
            for (int i = 0; i < truth.n; ++i) {
                for (int j = i + 1; j < truth.n; ++j) {
                    if (!present.count({i, j})) candidates.push_back({i, j});
                }
            }
            std::shuffle(candidates.begin(), candidates.end(), rng);
            EdgeList edges = truth.edges;
            edges.insert(edges.end(), candidates.begin(), candidates.begin() + (target - m));
            std::sort(edges.begin(), edges.end());
            return {truth.n, std::move(edges), PriorKind::Coarse, mode.parameter};
        }
        case PriorKind::Drop: {
            if (!(mode.parameter >= 0.0 && mode.parameter <= 100.0)) {
                throw std::invalid_argument("perturb_connectivity: drop percentage outside [0, 100]");
            }
            const long long removed = std::llround(mode.parameter / 100.0 * static_cast<double>(m));
            EdgeList edges = truth.edges;
            std::shuffle(edges.begin(), edges.end(), rng);
            edges.resize(static_cast<std::size_t>(m - removed));
            std::sort(edges.begin(), edges.end());
            return {truth.n, std::move(edges), PriorKind::Drop, mode.parameter};
        }
    }
    throw std::logic_error("perturb_connectivity: unknown mode");
}

// ---------------------------------------------------------------------------
// Covariance synthesis

namespace detail {

/// Eigendecomposition of a connected-graph Laplacian with the null pair split off.
inline SymEig laplacian_spectrum(const Matrix& lap) {
    SymEig eig = sym_eig(lap);
    const Eigen::Index n = eig.values.size();
    const double top = std::max(std::abs(eig.values[n - 1]), std::numeric_limits<double>::min());
    if (std::abs(eig.values[0]) >= 1e-9 * top) {
        throw std::invalid_argument("population_covariance: matrix has no null eigenvalue");
    }
    if (n > 1 && eig.values[1] < 1e-9 * top) {
        throw std::invalid_argument("population_covariance: graph is disconnected");
    }
    return eig;
}

}  // namespace detail

/// Moore-Penrose pseudo-inverse of a connected-graph Laplacian.
inline Matrix population_covariance(const Matrix& lap) {
    const SymEig eig = detail::laplacian_spectrum(lap);
    const Eigen::Index n = eig.values.size();
    Vector inv = Vector::Zero(n);
    for (Eigen::Index k = 1; k < n; ++k) inv[k] = 1.0 / eig.values[k];
    return symmetrized(eig.vectors * inv.asDiagonal() * eig.vectors.transpose());
}

/// Sample covariance of k zero-mean draws x = L^{+1/2} z, z ~ N(0, I) (the
/// component along 1 is annihilated by L^{+1/2}).
///
/// For k >= n the Gram matrix sum z z^T is drawn directly from its Wishart
/// law via the Bartlett factorization, which costs O(n^3) instead of O(k n^2).
inline Matrix sample_covariance(const Matrix& lap, long long k, std::uint64_t seed) {
    if (k <= 0) throw std::invalid_argument("sample_covariance: k must be positive");
    const SymEig eig = detail::laplacian_spectrum(lap);
    const Eigen::Index n = eig.values.size();
    Vector root = Vector::Zero(n);
    for (Eigen::Index i = 1; i < n; ++i) root[i] = 1.0 / std::sqrt(eig.values[i]);
    const Matrix half = eig.vectors * root.asDiagonal() * eig.vectors.transpose();

    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix gram;
    if (k >= n) {
        Matrix t = Matrix::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            std::chi_squared_distribution<double> chi2(static_cast<double>(k - i));
            t(i, i) = std::sqrt(chi2(rng));
            for (Eigen::Index j = 0; j < i; ++j) t(i, j) = normal(rng);
        }
        gram = t * t.transpose();
    } else {
        Matrix z(n, static_cast<Eigen::Index>(k));
        for (Eigen::Index c = 0; c < z.cols(); ++c) {
            for (Eigen::Index r = 0; r < n; ++r) z(r, c) = normal(rng);
        }
        gram = z * z.transpose();
    }
    return symmetrized(half * gram * half / static_cast<double>(k));
}

}  // namespace lapmcp
