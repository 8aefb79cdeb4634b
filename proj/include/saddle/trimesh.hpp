#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "saddle/domain.hpp"
#include "saddle/geometry.hpp"

namespace saddle {

struct BoundaryMeshEdge {
    int v0 = -1; // oriented along the counterclockwise boundary
    int v1 = -1;
    int polygon_edge = -1;
    bool mark_positive = false;
};

// Conforming triangulation of a MarkedPolygon. Triangles are positively
// oriented, every polygon vertex is a mesh node, and each boundary mesh edge
// knows which marked polygon edge it lies on.
struct TriMesh {
    MarkedPolygon domain;
    double target_h = 0.0;

    std::vector<Vec2> points;
    std::vector<std::array<int, 3>> triangles;
    // neighbors[t][k] faces edge (triangles[t][k], triangles[t][(k+1)%3]); -1 on the boundary.
    std::vector<std::array<int, 3>> neighbors;
    std::vector<BoundaryMeshEdge> boundary_edges;

    std::vector<int> node_polygon_vertex; // polygon vertex id or -1
    std::vector<int> node_polygon_edge;   // polygon edge id for edge-interior boundary nodes, else -1
    std::vector<double> node_boundary_dist;

    int num_nodes() const { return static_cast<int>(points.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }
    bool is_boundary_node(int v) const {
        return node_polygon_vertex[v] >= 0 || node_polygon_edge[v] >= 0;
    }

    double triangle_area_of(int t) const {
        const auto& tri = triangles[t];
        return triangle_area(points[tri[0]], points[tri[1]], points[tri[2]]);
    }
    Vec2 triangle_centroid(int t) const {
        const auto& tri = triangles[t];
        return (points[tri[0]] + points[tri[1]] + points[tri[2]]) * (1.0 / 3.0);
    }

    // Mesh node holding polygon vertex i.
    int polygon_vertex_node(int i) const;

    struct Location {
        int triangle = -1;
        std::array<double, 3> barycentric{0.0, 0.0, 0.0};
    };
    // Point location by triangle walk; nullopt if p lies outside the domain
    // (beyond tolerance).
    std::optional<Location> locate(const Vec2& p, int hint = 0) const;
    // P1 interpolation of a nodal field; throws if p is outside.
    double interpolate(const std::vector<double>& nodal, const Vec2& p) const;

    double min_angle_degrees() const;
};

// Quality triangulation with target size h (0 < h <= 1/2), minimum angle
// aimed at 20 degrees, and mesh size shrinking linearly to h/4 within
// inner_radius/2 of each polygon vertex.
TriMesh triangulate(const MarkedPolygon& poly, double h);

} // namespace saddle
