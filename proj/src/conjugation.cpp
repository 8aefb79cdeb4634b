#include "saddle/conjugation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <unordered_map>

#include "saddle/error.hpp"

namespace saddle {

namespace {

struct EdgeTable {
    struct Edge {
        int a, b;          // a < b
        int t0 = -1, t1 = -1;
    };
    std::vector<Edge> edges;
    std::vector<std::vector<int>> node_edges; // incident edge ids per node

    static EdgeTable build(const TriMesh& mesh) {
        EdgeTable table;
        std::map<std::pair<int, int>, int> index;
        for (int t = 0; t < mesh.num_triangles(); ++t) {
            for (int k = 0; k < 3; ++k) {
                int u = mesh.triangles[t][k], v = mesh.triangles[t][(k + 1) % 3];
                auto key = std::minmax(u, v);
                auto it = index.find({key.first, key.second});
                if (it == index.end()) {
                    index[{key.first, key.second}] = static_cast<int>(table.edges.size());
                    table.edges.push_back({key.first, key.second, t, -1});
                } else {
                    table.edges[it->second].t1 = t;
                }
            }
        }
        table.node_edges.resize(mesh.num_nodes());
        for (int e = 0; e < static_cast<int>(table.edges.size()); ++e) {
            table.node_edges[table.edges[e].a].push_back(e);
            table.node_edges[table.edges[e].b].push_back(e);
        }
        return table;
    }
};

// Integrates a piecewise-constant 1-form (per-triangle coefficients c with
// omega = c.x dx1 + c.y dx2) along a spanning tree from base_node, averaging
// the form across shared edges. The loop residual is the worst circulation
// around a triangle, which generates the loop space of a planar mesh.
struct FormIntegral {
    std::vector<double> values;
    double max_loop_residual = 0.0;
};

FormIntegral integrate_form(const TriMesh& mesh, const EdgeTable& table,
                            const std::vector<Vec2>& coeff, int base_node, double base_value) {
    const int ne = static_cast<int>(table.edges.size());
    std::vector<double> edge_val(ne);
    for (int e = 0; e < ne; ++e) {
        const auto& ed = table.edges[e];
        Vec2 d = mesh.points[ed.b] - mesh.points[ed.a];
        double v = dot(coeff[ed.t0], d);
        if (ed.t1 >= 0) v = 0.5 * (v + dot(coeff[ed.t1], d));
        edge_val[e] = v;
    }

    FormIntegral out;
    out.values.assign(mesh.num_nodes(), 0.0);
    std::vector<char> seen(mesh.num_nodes(), 0);
    std::deque<int> queue{base_node};
    seen[base_node] = 1;
    out.values[base_node] = base_value;
    int visited = 1;
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (int e : table.node_edges[u]) {
            const auto& ed = table.edges[e];
            int v = ed.a == u ? ed.b : ed.a;
            if (seen[v]) continue;
            seen[v] = 1;
            out.values[v] = out.values[u] + (ed.a == u ? edge_val[e] : -edge_val[e]);
            queue.push_back(v);
            ++visited;
        }
    }
    if (visited != mesh.num_nodes())
        throw Error(ErrorCode::InvalidInput, "mesh is disconnected");

    // Circulation of the averaged form around each triangle.
    std::map<std::pair<int, int>, int> index;
    for (int e = 0; e < ne; ++e) index[{table.edges[e].a, table.edges[e].b}] = e;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        double circ = 0.0;
        for (int k = 0; k < 3; ++k) {
            int u = mesh.triangles[t][k], v = mesh.triangles[t][(k + 1) % 3];
            auto key = std::minmax(u, v);
            int e = index[{key.first, key.second}];
            circ += (u == key.first) ? edge_val[e] : -edge_val[e];
        }
        out.max_loop_residual = std::max(out.max_loop_residual, std::abs(circ));
    }
    return out;
}

std::vector<Vec2> psi_form_coefficients(const GraphSolution& sol) {
    std::vector<Vec2> coeff(sol.mesh->num_triangles());
    for (int t = 0; t < sol.mesh->num_triangles(); ++t) {
        const Vec2& g = sol.gradient[t];
        coeff[t] = Vec2{-g.y, g.x} * (1.0 / sol.w[t]);
    }
    return coeff;
}

} // namespace

ConjugateField conjugate_function(const GraphSolution& sol, int base_polygon_vertex,
                                  double base_value) {
    const TriMesh& mesh = *sol.mesh;
    EdgeTable table = EdgeTable::build(mesh);
    FormIntegral fi = integrate_form(mesh, table, psi_form_coefficients(sol),
                                     mesh.polygon_vertex_node(base_polygon_vertex), base_value);
    return {std::move(fi.values), fi.max_loop_residual};
}

double edge_flux(const GraphSolution& sol, const std::vector<double>& psi, int polygon_edge) {
    const TriMesh& mesh = *sol.mesh;
    bool found = false;
    for (const BoundaryMeshEdge& be : mesh.boundary_edges)
        if (be.polygon_edge == mesh.domain.index(polygon_edge)) found = true;
    if (!found)
        throw Error(ErrorCode::InvalidInput, "boundary segment not resolved by the mesh");
    int a = mesh.polygon_vertex_node(polygon_edge);
    int b = mesh.polygon_vertex_node(polygon_edge + 1);
    return psi[b] - psi[a];
}

ImmersionField conjugate_immersion(const GraphSolution& sol, const std::vector<double>& psi) {
    const TriMesh& mesh = *sol.mesh;
    if (static_cast<int>(psi.size()) != mesh.num_nodes())
        throw Error(ErrorCode::InvalidInput, "psi vector size does not match the mesh");
    EdgeTable table = EdgeTable::build(mesh);

    // Rotations of dx1 and dx2 by the complex structure of the graph metric
    // ds^2 = (1+u1^2)dx1^2 + 2 u1 u2 dx1 dx2 + (1+u2^2)dx2^2.
    const int nt = mesh.num_triangles();
    std::vector<Vec2> c1(nt), c2(nt);
    for (int t = 0; t < nt; ++t) {
        double p = sol.gradient[t].x, q = sol.gradient[t].y, w = sol.w[t];
        c1[t] = Vec2{p * q, 1.0 + q * q} * (1.0 / w);
        c2[t] = Vec2{-(1.0 + p * p), -p * q} * (1.0 / w);
    }

    int base = mesh.polygon_vertex_node(0);
    FormIntegral x1 = integrate_form(mesh, table, c1, base, mesh.domain.vertex(0).x);
    FormIntegral x2 = integrate_form(mesh, table, c2, base, mesh.domain.vertex(0).y);

    ImmersionField out;
    out.max_loop_residual = std::max(x1.max_loop_residual, x2.max_loop_residual);
    out.xstar.resize(mesh.num_nodes());
    for (int v = 0; v < mesh.num_nodes(); ++v)
        out.xstar[v] = Vec3{x1.values[v], x2.values[v], psi[v]};
    return out;
}

double rotation_consistency_error(const GraphSolution& sol) {
    double worst = 0.0;
    for (int t = 0; t < sol.mesh->num_triangles(); ++t) {
        double p = sol.gradient[t].x, q = sol.gradient[t].y, w = sol.w[t];
        // du composed with the rotation, evaluated on the coordinate frame.
        double r1 = (p * (p * q) + q * (-(1.0 + p * p))) / w;
        double r2 = (p * (1.0 + q * q) + q * (-p * q)) / w;
        Vec2 direct{-q / w, p / w};
        double scale = std::max(1.0, norm(direct));
        worst = std::max(worst, std::max(std::abs(r1 - direct.x), std::abs(r2 - direct.y)) / scale);
    }
    return worst;
}

ConjugateSolution conjugate_solution(const GraphSolution& sol, int base_polygon_vertex,
                                     double base_value) {
    ConjugateSolution out;
    out.mesh = sol.mesh;
    out.base_polygon_vertex = base_polygon_vertex;
    out.base_value = base_value;
    out.from_jenkins_serrin = sol.jenkins_serrin_truncation;
    out.truncation_level = sol.truncation_level;

    ConjugateField field = conjugate_function(sol, base_polygon_vertex, base_value);
    out.max_loop_residual = field.max_loop_residual;
    ImmersionField imm = conjugate_immersion(sol, field.psi);
    out.max_loop_residual_xstar = imm.max_loop_residual;
    out.psi = std::move(field.psi);
    out.xstar = std::move(imm.xstar);
    return out;
}

KrustDiagnostics krust_check(const TriMesh& mesh, const std::vector<Vec3>& xstar) {
    KrustDiagnostics diag;
    const int nt = mesh.num_triangles();
    if (static_cast<int>(xstar.size()) != mesh.num_nodes())
        throw Error(ErrorCode::InvalidInput, "immersion size does not match the mesh");

    std::vector<std::array<Vec2, 3>> proj(nt);
    std::vector<double> area2(nt);
    int pos = 0, neg = 0;
    for (int t = 0; t < nt; ++t) {
        for (int k = 0; k < 3; ++k) {
            const Vec3& p = xstar[mesh.triangles[t][k]];
            proj[t][k] = Vec2{p.x, p.y};
        }
        area2[t] = orient2d(proj[t][0], proj[t][1], proj[t][2]);
        Vec3 a = xstar[mesh.triangles[t][0]], b = xstar[mesh.triangles[t][1]],
             c = xstar[mesh.triangles[t][2]];
        double area3 = norm(cross(b - a, c - a));
        if (std::abs(area2[t]) <= 1e-7 * std::max(area3, 1e-300)) {
            ++diag.degenerate_triangles;
            area2[t] = 0.0;
        } else if (area2[t] > 0.0) {
            ++pos;
        } else {
            ++neg;
        }
    }
    diag.orientation_consistent = (pos == 0 || neg == 0);

    // Sampled overlap test on a uniform bucket grid over projected bounding boxes.
    Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
    double mean_diam = 0.0;
    for (int t = 0; t < nt; ++t) {
        for (const Vec2& p : proj[t]) {
            lo.x = std::min(lo.x, p.x);
            lo.y = std::min(lo.y, p.y);
            hi.x = std::max(hi.x, p.x);
            hi.y = std::max(hi.y, p.y);
        }
        mean_diam += dist(proj[t][0], proj[t][1]);
    }
    mean_diam /= std::max(nt, 1);
    double cell = std::max(mean_diam * 2.0, 1e-12);
    auto bucket_of = [&](const Vec2& p) {
        return std::pair<long, long>{static_cast<long>(std::floor((p.x - lo.x) / cell)),
                                     static_cast<long>(std::floor((p.y - lo.y) / cell))};
    };
    std::map<std::pair<long, long>, std::vector<int>> buckets;
    for (int t = 0; t < nt; ++t) {
        auto [ix0, iy0] = bucket_of(Vec2{std::min({proj[t][0].x, proj[t][1].x, proj[t][2].x}),
                                         std::min({proj[t][0].y, proj[t][1].y, proj[t][2].y})});
        auto [ix1, iy1] = bucket_of(Vec2{std::max({proj[t][0].x, proj[t][1].x, proj[t][2].x}),
                                         std::max({proj[t][0].y, proj[t][1].y, proj[t][2].y})});
        for (long ix = ix0; ix <= ix1; ++ix)
            for (long iy = iy0; iy <= iy1; ++iy) buckets[{ix, iy}].push_back(t);
    }

    auto strictly_inside = [&](const Vec2& p, int t) {
        if (area2[t] == 0.0) return false;
        double s = area2[t] > 0.0 ? 1.0 : -1.0;
        double margin = 1e-9 * std::abs(area2[t]);
        return s * orient2d(proj[t][0], proj[t][1], p) > margin &&
               s * orient2d(proj[t][1], proj[t][2], p) > margin &&
               s * orient2d(proj[t][2], proj[t][0], p) > margin;
    };

    diag.overlap_free = true;
    for (int t = 0; t < nt && diag.overlap_free; ++t) {
        Vec2 c = (proj[t][0] + proj[t][1] + proj[t][2]) * (1.0 / 3.0);
        for (int other : buckets[bucket_of(c)]) {
            if (other == t) continue;
            if (strictly_inside(c, other)) {
                diag.overlap_free = false;
                break;
            }
        }
    }
    return diag;
}

} // namespace saddle
