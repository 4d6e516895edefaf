#pragma once

#include "lapmcp/core.hpp"
#include "lapmcp/graph.hpp"

#include <string>
#include <vector>

namespace lapmcp {

enum class Termination {
    Converged,
    MaxIterations,
    // The subproblem error certificate could not be met within the retry budget.
    CertificateLimit,
};

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::Converged: return "converged";
        case Termination::MaxIterations: return "max_iterations";
        case Termination::CertificateLimit: return "certificate_limit";
    }
    return "?";
}

/// One accepted outer iteration of the proximal DCA.
struct DcaIteration {
    int k = 0;
    double objective = 0.0;
    double sigma = 0.0;
    double step_norm = 0.0;
    int ssn_iterations = 0;
    int certificate_retries = 0;
    double residual_norm = 0.0;  // ||E^k||_F, E^k = -grad Phi(Y^{k+1})
    double delta_norm = 0.0;
    double stop_rhs = 0.0;
    double certificate_ratio = 0.0;  // r = ||(A*w + J - E)^{-1} E||_2
    double certificate_bound = 0.0;
    double descent_margin = 0.0;  // f_prev - (sigma/4)||dw||^2 - f_next
};

struct AdmmTrace {
    int iteration = 0;
    double eta_p = 0.0;
    double eta_d = 0.0;
    double eta_g = 0.0;
    double pobj = 0.0;
    double sigma = 0.0;
};

struct WarmStartSummary {
    int iterations = 0;
    Termination termination = Termination::Converged;
    double kkt_residual = 0.0;
};

struct SolveReport {
    std::string model;
    int n = 0;
    EdgeList edges;
    Vector w;
    Matrix theta;
    double objective = 0.0;
    Termination termination = Termination::Converged;
    int iterations = 0;
    double wall_time_s = 0.0;
    std::vector<DcaIteration> history;
    std::vector<AdmmTrace> admm_history;
    WarmStartSummary warm_start;
    // Largest KKT residual at exit (ADMM runs only).
    double kkt_residual = 0.0;

    bool converged() const { return termination == Termination::Converged; }
};

}  // namespace lapmcp
