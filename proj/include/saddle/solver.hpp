#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "saddle/trimesh.hpp"

namespace saddle {

// Nodal solution of the minimal graph equation on a triangulated domain,
// found by minimizing the piecewise-linear area functional. W = sqrt(1+|grad u|^2)
// per triangle; residual_norm is the Euclidean norm of the functional's
// gradient over the free nodes at the returned iterate.
struct GraphSolution {
    std::shared_ptr<const TriMesh> mesh;
    std::vector<double> u;
    double truncation_level = 0.0;
    // True when the boundary data came from the +-M truncation of marked
    // edges; enables the boundary-artifact rules in divergence detection.
    bool jenkins_serrin_truncation = false;
    std::vector<Vec2> gradient; // per triangle
    std::vector<double> w;      // per triangle
    double residual_norm = 0.0;

    double max_w() const;
};

struct SolverOptions {
    double tol_solve = 1e-10; // on the norm of the functional gradient
    int max_iterations = 200;
    double armijo = 1e-4;
};

// Computes per-triangle gradients/W for externally supplied nodal values
// (used to wrap synthetic sequences for divergence analysis).
GraphSolution make_graph_solution(std::shared_ptr<const TriMesh> mesh, std::vector<double> u);

// Minimizes the discrete area functional with Dirichlet data fixed at every
// boundary node (interior entries of boundary_values are ignored). Damped
// Newton with backtracking line search; the functional is convex, so the
// minimizer does not depend on the starting iterate.
GraphSolution solve_dirichlet(std::shared_ptr<const TriMesh> mesh,
                              const std::vector<double>& boundary_values,
                              const SolverOptions& options = {},
                              const std::vector<double>* initial_guess = nullptr);

struct DivergenceSegment {
    Vec2 a, b;
    double flux_ratio = 0.0;
    double max_w = 0.0;
    // Candidates explained by the +-M truncation layer or ending on the
    // interior of a marked edge; excluded from the convergence verdict.
    bool artifact = false;
    std::string note;
};

struct DivergenceOptions {
    double w_div = 50.0;
    double eps_div = 0.05;
};

struct DivergenceReport {
    std::vector<DivergenceSegment> segments;
    bool converges = true;

    bool has_real_segment() const {
        for (const auto& s : segments)
            if (!s.artifact) return true;
        return false;
    }
};

// Scans the latest solution of a sequence for straight segments of gradient
// blow-up: per-triangle W above w_div clustered along a line whose endpoints
// carry a conjugate-function difference within eps_div of the segment length.
DivergenceReport detect_divergence_lines(const std::vector<GraphSolution>& solutions,
                                         const DivergenceOptions& options = {});

struct JenkinsSerrinOptions {
    std::vector<double> m_schedule{2.0, 4.0, 8.0, 16.0};
    double tol_js = 1e-3;
    double compact_margin = 0.1; // sup-diff window: dist to boundary >= margin
    bool force = false;          // bypass the chord-criterion refusal
    SolverOptions solver;
    DivergenceOptions divergence;
};

struct JenkinsSerrinResult {
    GraphSolution solution;                // final, renormalized to u(Q)=0
    std::vector<GraphSolution> sequence;   // one per executed schedule level
    std::vector<double> schedule_levels;
    std::vector<double> successive_diffs;  // sup over the compact window
    bool stabilized = false;
    std::optional<DivergenceReport> divergence; // filled when not stabilized
};

// Solves with boundary values +-M per the marks (0 at polygon vertices) for
// each M in the schedule, renormalizing u(q)=0, until successive solutions
// agree on the compact window. Refuses domains failing the chord criterion
// unless options.force is set.
JenkinsSerrinResult solve_jenkins_serrin(std::shared_ptr<const TriMesh> mesh, const Vec2& q,
                                         const JenkinsSerrinOptions& options = {});

// True at polygon vertex p iff the minimum nodal W over mesh nodes within
// distance delta*r0 of p exceeds 10.
std::vector<bool> vertex_gradient_check(const GraphSolution& sol, double r0, double delta);

} // namespace saddle
