#include "saddle/trimesh.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numbers>

#include "saddle/error.hpp"

namespace saddle {

namespace {

constexpr double kPi = std::numbers::pi;
// Circumradius-to-shortest-edge bound B = 1/(2 sin 20deg); triangles above it
// have minimum angle below 20 degrees.
constexpr double kQualityBound = 1.4619022000815435;
constexpr int kMaxPoints = 3'000'000;

struct Sizing {
    const MarkedPolygon* poly;
    double h;
    double r0;

    double operator()(const Vec2& x) const {
        double floor = 0.25 * h;
        double slope = 1.5 * h / r0; // reaches h at distance r0/2 from a vertex
        double s = h;
        for (const Vec2& v : poly->vertices()) {
            double d = dist(x, v);
            if (d < 0.5 * r0) s = std::min(s, floor + slope * d);
        }
        return std::max(s, floor);
    }
};

// Incremental Bowyer-Watson triangulation with a super-triangle. Points are
// never removed; triangles carry adjacency for cavity search and walking.
class Delaunay {
  public:
    struct Tri {
        std::array<int, 3> v{-1, -1, -1};
        std::array<int, 3> n{-1, -1, -1}; // n[k] faces edge (v[k], v[k+1])
        bool alive = false;
    };

    std::vector<Vec2> pts;
    std::vector<Tri> tris;

    void init_super(const Vec2& lo, const Vec2& hi) {
        Vec2 c = (lo + hi) * 0.5;
        double d = std::max(hi.x - lo.x, hi.y - lo.y) * 40.0 + 10.0;
        pts.push_back(c + Vec2{-d, -d});
        pts.push_back(c + Vec2{d, -d});
        pts.push_back(c + Vec2{0.0, d});
        Tri t;
        t.v = {0, 1, 2};
        t.alive = true;
        tris.push_back(t);
        last_alive_ = 0;
    }

    bool in_circumcircle(const Tri& t, const Vec2& p) const {
        const Vec2& a = pts[t.v[0]];
        const Vec2& b = pts[t.v[1]];
        const Vec2& c = pts[t.v[2]];
        double ax = a.x - p.x, ay = a.y - p.y;
        double bx = b.x - p.x, by = b.y - p.y;
        double cx = c.x - p.x, cy = c.y - p.y;
        double a2 = ax * ax + ay * ay, b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
        double det = ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) + a2 * (bx * cy - by * cx);
        double scale = std::max({a2, b2, c2});
        return det > 1e-13 * scale * scale;
    }

    int locate(const Vec2& p, int hint) const {
        int t = hint >= 0 && hint < static_cast<int>(tris.size()) && tris[hint].alive ? hint
                                                                                      : last_alive_;
        if (!tris[t].alive) {
            for (int i = static_cast<int>(tris.size()) - 1; i >= 0; --i)
                if (tris[i].alive) {
                    t = i;
                    break;
                }
        }
        int steps = 0;
        const int cap = static_cast<int>(tris.size()) + 64;
        while (steps++ < cap) {
            const Tri& tr = tris[t];
            bool moved = false;
            for (int k = 0; k < 3; ++k) {
                const Vec2& a = pts[tr.v[k]];
                const Vec2& b = pts[tr.v[(k + 1) % 3]];
                if (orient2d(a, b, p) < -1e-14) {
                    int ng = tr.n[k];
                    if (ng >= 0) {
                        t = ng;
                        moved = true;
                        break;
                    }
                }
            }
            if (!moved) return t;
        }
        // Walk got stuck (can happen on slivers); linear fallback.
        for (int i = 0; i < static_cast<int>(tris.size()); ++i) {
            if (!tris[i].alive) continue;
            const Tri& tr = tris[i];
            if (orient2d(pts[tr.v[0]], pts[tr.v[1]], p) >= -1e-12 &&
                orient2d(pts[tr.v[1]], pts[tr.v[2]], p) >= -1e-12 &&
                orient2d(pts[tr.v[2]], pts[tr.v[0]], p) >= -1e-12)
                return i;
        }
        throw Error(ErrorCode::Internal, "point location failed");
    }

    int insert(const Vec2& p, int hint = -1) {
        if (static_cast<int>(pts.size()) >= kMaxPoints)
            throw Error(ErrorCode::Internal, "triangulation point budget exceeded");
        int seed = locate(p, hint);

        // Cavity: connected triangles whose circumcircle contains p.
        std::vector<int> cavity;
        std::vector<char> in_cavity(tris.size(), 0);
        std::deque<int> queue{seed};
        in_cavity[seed] = 1;
        while (!queue.empty()) {
            int t = queue.front();
            queue.pop_front();
            cavity.push_back(t);
            for (int k = 0; k < 3; ++k) {
                int ng = tris[t].n[k];
                if (ng >= 0 && !in_cavity[ng] && in_circumcircle(tris[ng], p)) {
                    in_cavity[ng] = 1;
                    queue.push_back(ng);
                }
            }
        }

        // Repair: every cavity boundary edge must see p strictly on its left,
        // otherwise retriangulation would create a degenerate triangle. Drop
        // offenders (but never the seed).
        bool changed = true;
        while (changed) {
            changed = false;
            for (size_t ci = 0; ci < cavity.size(); ++ci) {
                int t = cavity[ci];
                for (int k = 0; k < 3; ++k) {
                    int ng = tris[t].n[k];
                    if (ng >= 0 && in_cavity[ng]) continue;
                    const Vec2& a = pts[tris[t].v[k]];
                    const Vec2& b = pts[tris[t].v[(k + 1) % 3]];
                    if (orient2d(a, b, p) <= 1e-15 && t != seed) {
                        in_cavity[t] = 0;
                        cavity.erase(cavity.begin() + ci);
                        --ci;
                        changed = true;
                        break;
                    }
                }
            }
        }

        int pid = static_cast<int>(pts.size());
        pts.push_back(p);

        // Collect boundary fan (edge, outside-neighbor) and retriangulate.
        struct FanEdge {
            int a, b, outside;
        };
        std::vector<FanEdge> fan;
        for (int t : cavity) {
            for (int k = 0; k < 3; ++k) {
                int ng = tris[t].n[k];
                if (ng >= 0 && in_cavity[ng]) continue;
                fan.push_back({tris[t].v[k], tris[t].v[(k + 1) % 3], ng});
            }
        }
        for (int t : cavity) tris[t].alive = false;

        std::map<std::pair<int, int>, std::pair<int, int>> open_edges; // (lo,hi) -> (tri, slot)
        int first_new = -1;
        for (const FanEdge& fe : fan) {
            Tri nt;
            nt.v = {fe.a, fe.b, pid};
            nt.n = {fe.outside, -1, -1};
            int id = alloc(nt);
            if (first_new < 0) first_new = id;
            if (fe.outside >= 0) {
                Tri& out = tris[fe.outside];
                for (int k = 0; k < 3; ++k)
                    if ((out.v[k] == fe.b && out.v[(k + 1) % 3] == fe.a)) out.n[k] = id;
            }
            // Glue the two spoke edges (b,pid) and (pid,a) with siblings.
            glue(open_edges, id, 1, fe.b, pid);
            glue(open_edges, id, 2, pid, fe.a);
        }
        last_alive_ = first_new;
        return pid;
    }

    // Walks alive triangles only.
    template <class F> void for_alive(F&& f) const {
        for (int i = 0; i < static_cast<int>(tris.size()); ++i)
            if (tris[i].alive) f(i);
    }

  private:
    int alloc(const Tri& t) {
        tris.push_back(t);
        tris.back().alive = true;
        return static_cast<int>(tris.size()) - 1;
    }

    void glue(std::map<std::pair<int, int>, std::pair<int, int>>& open, int tri, int slot, int a,
              int b) {
        auto key = std::minmax(a, b);
        auto it = open.find({key.first, key.second});
        if (it == open.end()) {
            open[{key.first, key.second}] = {tri, slot};
        } else {
            auto [other, oslot] = it->second;
            tris[tri].n[slot] = other;
            tris[other].n[oslot] = tri;
            open.erase(it);
        }
    }

    mutable int last_alive_ = 0;
};

struct Circum {
    Vec2 center;
    double radius = 0.0;
    bool ok = false;
};

Circum circumcircle(const Vec2& a, const Vec2& b, const Vec2& c) {
    Vec2 ab = b - a, ac = c - a;
    double d = 2.0 * cross(ab, ac);
    Circum out;
    if (std::abs(d) < 1e-300) return out;
    double ab2 = norm2(ab), ac2 = norm2(ac);
    Vec2 rel{(ac.y * ab2 - ab.y * ac2) / d, (ab.x * ac2 - ac.x * ab2) / d};
    out.center = a + rel;
    out.radius = norm(rel);
    out.ok = true;
    return out;
}

// Graded subdivision of one unit polygon edge: points placed at equal
// increments of the integral of 1/s along the edge.
std::vector<double> edge_parameters(const Vec2& a, const Vec2& b, const Sizing& sz) {
    constexpr int kSamples = 4096;
    std::vector<double> cum(kSamples + 1, 0.0);
    double len = dist(a, b);
    for (int i = 0; i < kSamples; ++i) {
        double tm = (i + 0.5) / kSamples;
        Vec2 x = a + (b - a) * tm;
        cum[i + 1] = cum[i] + (len / kSamples) / sz(x);
    }
    int n = std::max(1, static_cast<int>(std::lround(cum.back())));
    std::vector<double> params;
    params.reserve(n - 1);
    int idx = 0;
    for (int k = 1; k < n; ++k) {
        double target = cum.back() * k / n;
        while (idx < kSamples && cum[idx + 1] < target) ++idx;
        double frac = (target - cum[idx]) / (cum[idx + 1] - cum[idx]);
        params.push_back((idx + frac) / kSamples);
    }
    return params;
}

} // namespace

int TriMesh::polygon_vertex_node(int i) const {
    for (int v = 0; v < num_nodes(); ++v)
        if (node_polygon_vertex[v] == domain.index(i)) return v;
    throw Error(ErrorCode::Internal, "polygon vertex missing from mesh");
}

std::optional<TriMesh::Location> TriMesh::locate(const Vec2& p, int hint) const {
    int t = (hint >= 0 && hint < num_triangles()) ? hint : 0;
    int steps = 0;
    const int cap = num_triangles() + 64;
    while (steps++ < cap) {
        const auto& tri = triangles[t];
        int worst = -1;
        double worst_val = -1e-12;
        for (int k = 0; k < 3; ++k) {
            double o = orient2d(points[tri[k]], points[tri[(k + 1) % 3]], p);
            if (o < worst_val) {
                worst_val = o;
                worst = k;
            }
        }
        if (worst < 0) break; // inside (or on the edge of) triangle t
        int ng = neighbors[t][worst];
        if (ng < 0) return std::nullopt; // walked out of the domain
        t = ng;
    }
    if (steps > cap) return std::nullopt;

    const auto& tri = triangles[t];
    double a0 = orient2d(points[tri[1]], points[tri[2]], p);
    double a1 = orient2d(points[tri[2]], points[tri[0]], p);
    double a2 = orient2d(points[tri[0]], points[tri[1]], p);
    double s = a0 + a1 + a2;
    Location loc;
    loc.triangle = t;
    loc.barycentric = {a0 / s, a1 / s, a2 / s};
    return loc;
}

double TriMesh::interpolate(const std::vector<double>& nodal, const Vec2& p) const {
    auto loc = locate(p);
    if (!loc) throw Error(ErrorCode::InvalidInput, "interpolation point outside the domain");
    const auto& tri = triangles[loc->triangle];
    return loc->barycentric[0] * nodal[tri[0]] + loc->barycentric[1] * nodal[tri[1]] +
           loc->barycentric[2] * nodal[tri[2]];
}

double TriMesh::min_angle_degrees() const {
    double worst = 180.0;
    for (const auto& tri : triangles) {
        for (int k = 0; k < 3; ++k) {
            Vec2 u = points[tri[(k + 1) % 3]] - points[tri[k]];
            Vec2 v = points[tri[(k + 2) % 3]] - points[tri[k]];
            double ang = std::atan2(std::abs(cross(u, v)), dot(u, v)) * 180.0 / kPi;
            worst = std::min(worst, ang);
        }
    }
    return worst;
}

TriMesh triangulate(const MarkedPolygon& poly, double h) {
    if (!(h > 0.0) || h > 0.5)
        throw Error(ErrorCode::InvalidInput, "mesh size must satisfy 0 < h <= 1/2");

    const double r0 = inner_radius(poly);
    Sizing sz{&poly, h, r0};
    const int np = poly.size();

    Delaunay dt;
    Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
    for (const Vec2& v : poly.vertices()) {
        lo.x = std::min(lo.x, v.x);
        lo.y = std::min(lo.y, v.y);
        hi.x = std::max(hi.x, v.x);
        hi.y = std::max(hi.y, v.y);
    }
    dt.init_super(lo, hi);

    // Bookkeeping parallel to dt.pts (super vertices included).
    std::vector<int> on_vertex{-1, -1, -1};
    std::vector<int> on_edge{-1, -1, -1};
    std::vector<double> edge_param{0.0, 0.0, 0.0};

    auto add_point = [&](const Vec2& p, int pv, int pe, double t) {
        int id = dt.insert(p);
        on_vertex.push_back(pv);
        on_edge.push_back(pe);
        edge_param.push_back(t);
        return id;
    };

    std::vector<int> vertex_node(np);
    for (int i = 0; i < np; ++i) vertex_node[i] = add_point(poly.vertex(i), i, -1, 0.0);

    // Boundary chains: per polygon edge the node ids ordered by parameter.
    std::vector<std::vector<std::pair<double, int>>> chains(np);
    for (int e = 0; e < np; ++e) {
        auto [a, b] = poly.edge(e);
        chains[e].push_back({0.0, vertex_node[e]});
        for (double t : edge_parameters(a, b, sz))
            chains[e].push_back({t, add_point(a + (b - a) * t, -1, e, t)});
        chains[e].push_back({1.0, vertex_node[poly.index(e + 1)]});
    }

    auto split_segment = [&](int e, size_t k) {
        // Insert the midpoint of the k-th sub-segment of chain e.
        auto [a, b] = poly.edge(e);
        double tm = 0.5 * (chains[e][k].first + chains[e][k + 1].first);
        int id = add_point(a + (b - a) * tm, -1, e, tm);
        chains[e].insert(chains[e].begin() + k + 1, {tm, id});
        return id;
    };

    auto find_encroached = [&](const Vec2& p) {
        std::vector<std::pair<int, size_t>> out;
        for (int e = 0; e < np; ++e) {
            auto [a, b] = poly.edge(e);
            for (size_t k = 0; k + 1 < chains[e].size(); ++k) {
                Vec2 pa = a + (b - a) * chains[e][k].first;
                Vec2 pb = a + (b - a) * chains[e][k + 1].first;
                Vec2 m = (pa + pb) * 0.5;
                double r = 0.5 * dist(pa, pb);
                if (dist(p, m) < r * (1.0 - 1e-12)) out.push_back({e, k});
            }
        }
        return out;
    };

    // Interior seeding: hexagonal lattice at spacing h, kept away from the
    // boundary and from the graded corner zones (those are filled by the
    // refinement pass at the proper local size).
    {
        double row = h * std::sqrt(3.0) / 2.0;
        int j = 0;
        for (double y = lo.y + 0.6 * h; y < hi.y; y += row, ++j) {
            double x0 = lo.x + (j % 2 == 0 ? 0.5 * h : h);
            for (double x = x0; x < hi.x; x += h) {
                Vec2 p{x, y};
                if (!point_in_convex(p, poly.vertices(), 0.0)) continue;
                // Clearance of 0.75h exceeds any sub-segment diametral radius,
                // so seeds cannot encroach the boundary.
                if (dist_to_polygon_boundary(p, poly.vertices()) < 0.75 * h) continue;
                if (sz(p) < 0.95 * h) continue;
                add_point(p, -1, -1, 0.0);
            }
        }
    }

    // Ruppert-style refinement: split oversized or skinny triangles at their
    // circumcenters; circumcenters that would encroach a boundary sub-segment
    // split that sub-segment instead.
    auto domain_triangle = [&](const Delaunay::Tri& t) {
        if (t.v[0] < 3 || t.v[1] < 3 || t.v[2] < 3) return false; // super vertex
        Vec2 c = (dt.pts[t.v[0]] + dt.pts[t.v[1]] + dt.pts[t.v[2]]) * (1.0 / 3.0);
        return point_in_convex(c, poly.vertices(), -1e-12);
    };

    const double size_floor = h / 16.0;
    auto needs_split = [&](const Delaunay::Tri& t) {
        const Vec2& a = dt.pts[t.v[0]];
        const Vec2& b = dt.pts[t.v[1]];
        const Vec2& c = dt.pts[t.v[2]];
        Circum cc = circumcircle(a, b, c);
        if (!cc.ok) return false;
        double lmin = std::min({dist(a, b), dist(b, c), dist(c, a)});
        if (cc.radius > 0.62 * sz(cc.center)) return true;
        if (cc.radius / lmin > kQualityBound && lmin > size_floor) return true;
        return false;
    };

    {
        std::deque<int> work;
        dt.for_alive([&](int i) { work.push_back(i); });
        long guard = 50'000'000;
        while (!work.empty() && guard-- > 0) {
            int i = work.front();
            work.pop_front();
            if (!dt.tris[i].alive) continue;
            if (!domain_triangle(dt.tris[i]) || !needs_split(dt.tris[i])) continue;
            Circum cc = circumcircle(dt.pts[dt.tris[i].v[0]], dt.pts[dt.tris[i].v[1]],
                                     dt.pts[dt.tris[i].v[2]]);
            size_t before = dt.tris.size();
            auto enc = find_encroached(cc.center);
            bool outside = !point_in_convex(cc.center, poly.vertices(), 1e-12);
            if (!enc.empty() || outside) {
                if (enc.empty()) {
                    // Center escaped the domain without encroaching: split the
                    // nearest boundary sub-segment instead.
                    double best = 1e300;
                    std::pair<int, size_t> pick{-1, 0};
                    for (int e = 0; e < np; ++e) {
                        auto [a, b] = poly.edge(e);
                        for (size_t k = 0; k + 1 < chains[e].size(); ++k) {
                            Vec2 pa = a + (b - a) * chains[e][k].first;
                            Vec2 pb = a + (b - a) * chains[e][k + 1].first;
                            double d = point_segment_distance(cc.center, pa, pb);
                            if (d < best) {
                                best = d;
                                pick = {e, k};
                            }
                        }
                    }
                    split_segment(pick.first, pick.second);
                } else {
                    // Split sub-segments from the back so stored indices stay valid.
                    std::sort(enc.begin(), enc.end(), [](auto& l, auto& r) {
                        return l.first != r.first ? l.first < r.first : l.second > r.second;
                    });
                    for (auto& [e, k] : enc) split_segment(e, k);
                }
            } else {
                dt.insert(cc.center);
            }
            for (size_t t = before; t < dt.tris.size(); ++t)
                work.push_back(static_cast<int>(t));
            if (!dt.tris[i].alive ? false : needs_split(dt.tris[i])) work.push_back(i);
        }
        if (guard <= 0) throw Error(ErrorCode::Internal, "mesh refinement failed to settle");
    }

    // Compact into the final mesh, dropping the super-triangle structure.
    TriMesh mesh{poly, h, {}, {}, {}, {}, {}, {}, {}};
    std::vector<int> remap(dt.pts.size(), -1);
    std::vector<int> tri_remap(dt.tris.size(), -1);

    dt.for_alive([&](int i) {
        if (!domain_triangle(dt.tris[i])) return;
        for (int k = 0; k < 3; ++k) {
            int v = dt.tris[i].v[k];
            if (remap[v] < 0) {
                remap[v] = mesh.num_nodes();
                mesh.points.push_back(dt.pts[v]);
                mesh.node_polygon_vertex.push_back(on_vertex[v]);
                mesh.node_polygon_edge.push_back(on_edge[v]);
            }
        }
        tri_remap[i] = mesh.num_triangles();
        mesh.triangles.push_back({remap[dt.tris[i].v[0]], remap[dt.tris[i].v[1]],
                                  remap[dt.tris[i].v[2]]});
    });
    mesh.neighbors.assign(mesh.num_triangles(), {-1, -1, -1});
    dt.for_alive([&](int i) {
        if (tri_remap[i] < 0) return;
        for (int k = 0; k < 3; ++k) {
            int ng = dt.tris[i].n[k];
            mesh.neighbors[tri_remap[i]][k] = (ng >= 0 && tri_remap[ng] >= 0) ? tri_remap[ng] : -1;
        }
    });

    for (int t = 0; t < mesh.num_triangles(); ++t)
        if (mesh.triangle_area_of(t) <= 0.0)
            throw Error(ErrorCode::Internal, "triangulation produced a degenerate triangle");

    // Boundary table from the chains (each consecutive pair is one mesh edge).
    for (int e = 0; e < np; ++e) {
        for (size_t k = 0; k + 1 < chains[e].size(); ++k) {
            BoundaryMeshEdge be;
            be.v0 = remap[chains[e][k].second];
            be.v1 = remap[chains[e][k + 1].second];
            be.polygon_edge = e;
            be.mark_positive = poly.edge_mark_positive(e);
            if (be.v0 < 0 || be.v1 < 0)
                throw Error(ErrorCode::Internal, "boundary node lost during compaction");
            mesh.boundary_edges.push_back(be);
        }
    }

    mesh.node_boundary_dist.resize(mesh.num_nodes());
    for (int v = 0; v < mesh.num_nodes(); ++v)
        mesh.node_boundary_dist[v] = dist_to_polygon_boundary(mesh.points[v], poly.vertices());

    return mesh;
}

} // namespace saddle
