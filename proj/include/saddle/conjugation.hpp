#pragma once

#include <memory>
#include <vector>

#include "saddle/solver.hpp"

namespace saddle {

// Loop-residual budget: the discrete conjugate forms are exact up to the
// edge-averaging error, which is second order in the mesh size.
inline constexpr double kLoopResidualConstant = 1.0;

struct ConjugateField {
    std::vector<double> psi;
    double max_loop_residual = 0.0;
};

// Integrates the conjugate 1-form (u1 dx2 - u2 dx1)/W, constant per triangle
// and averaged across shared edges, along a spanning tree of mesh edges from
// the node at the given polygon vertex. Reports the worst loop integral over
// the triangle loops, which generate all mesh loops.
ConjugateField conjugate_function(const GraphSolution& sol, int base_polygon_vertex = 0,
                                  double base_value = 0.0);

// psi difference across polygon edge e, taken along the boundary orientation.
double edge_flux(const GraphSolution& sol, const std::vector<double>& psi, int polygon_edge);

struct ImmersionField {
    std::vector<Vec3> xstar;
    double max_loop_residual = 0.0; // of the two rotated coordinate forms
};

// First two coordinates from integrating the rotations of dx1 and dx2 by the
// complex structure of the graph metric; the third coordinate is psi itself.
ImmersionField conjugate_immersion(const GraphSolution& sol, const std::vector<double>& psi);

// Largest relative deviation, over all triangles, between the rotated du and
// the directly assembled conjugate form. Algebraically zero; anything beyond
// rounding indicates a metric inconsistency.
double rotation_consistency_error(const GraphSolution& sol);

struct ConjugateSolution {
    std::shared_ptr<const TriMesh> mesh;
    std::vector<double> psi;
    std::vector<Vec3> xstar;
    int base_polygon_vertex = 0;
    double base_value = 0.0;
    double max_loop_residual = 0.0;
    double max_loop_residual_xstar = 0.0;
    bool from_jenkins_serrin = false;
    double truncation_level = 0.0;
};

// Convenience bundle: psi, X*, and the loop diagnostics in one pass.
ConjugateSolution conjugate_solution(const GraphSolution& sol, int base_polygon_vertex = 0,
                                     double base_value = 0.0);

struct KrustDiagnostics {
    bool orientation_consistent = false;
    bool overlap_free = false;
    int degenerate_triangles = 0;

    bool graph() const { return orientation_consistent && overlap_free; }
};

// Checks that the horizontal projection of X* maps all triangles with one
// orientation sign and without pairwise overlap (sampled point-in-triangle
// test on a uniform grid acceleration).
KrustDiagnostics krust_check(const TriMesh& mesh, const std::vector<Vec3>& xstar);

inline bool krust_check(const ConjugateSolution& conj) {
    return krust_check(*conj.mesh, conj.xstar).graph();
}

} // namespace saddle
