#pragma once

#include "lapmcp/core.hpp"
#include "lapmcp/graph.hpp"

#include <algorithm>
#include <set>

namespace lapmcp {

inline constexpr double kDefaultEdgeThreshold = 1e-4;

/// Edges whose weight exceeds threshold_rel * max(w).
inline EdgeList edge_set(const Vector& w, const EdgeList& edges, double threshold_rel = kDefaultEdgeThreshold) {
    if (!(threshold_rel >= 0.0)) throw std::invalid_argument("edge_set: threshold must be non-negative");
    if (static_cast<std::size_t>(w.size()) != edges.size()) throw DimensionError("edge_set: |w| != |E|");
    EdgeList out;
    if (w.size() == 0) return out;
    const double cut = threshold_rel * std::max(w.maxCoeff(), 0.0);
    for (Eigen::Index k = 0; k < w.size(); ++k) {
        if (w[k] > cut && w[k] > 0.0) out.push_back(edges[static_cast<std::size_t>(k)]);
    }
    return out;
}

struct EdgeDecision {
    EdgeList estimated;
    double threshold = kDefaultEdgeThreshold;
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
};

inline EdgeDecision compare_edges(const EdgeList& estimated, const EdgeList& truth) {
    const std::set<Edge> est(estimated.begin(), estimated.end());
    const std::set<Edge> ref(truth.begin(), truth.end());
    EdgeDecision d;
    d.estimated = estimated;
    for (const Edge& e : est) {
        if (ref.count(e)) {
            ++d.tp;
        } else {
            ++d.fp;
        }
    }
    d.fn = static_cast<long long>(ref.size()) - d.tp;
    return d;
}

/// 2 tp / (2 tp + fp + fn); 1 when both sets are empty.
inline double f1_score(const EdgeDecision& d) {
    const long long denom = 2 * d.tp + d.fp + d.fn;
    if (denom == 0) return 1.0;
    return 2.0 * static_cast<double>(d.tp) / static_cast<double>(denom);
}

inline double f1_score(const EdgeList& estimated, const EdgeList& truth) {
    return f1_score(compare_edges(estimated, truth));
}

/// ||Theta - L||_F / ||L||_F.
inline double recovery_error(const Matrix& theta, const Matrix& truth) {
    if (theta.rows() != truth.rows() || theta.cols() != truth.cols()) {
        throw DimensionError("recovery_error: size mismatch");
    }
    const double denom = truth.norm();
    if (denom == 0.0) throw std::invalid_argument("recovery_error: true matrix is zero");
    return (theta - truth).norm() / denom;
}

}  // namespace lapmcp
