#include "saddle/solver.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "saddle/conjugation.hpp"
#include "saddle/domain.hpp"
#include "saddle/error.hpp"

namespace saddle {

namespace {

constexpr double kPi = std::numbers::pi;

struct P1Element {
    double area;
    Vec2 grad[3]; // gradients of the nodal basis functions
};

std::vector<P1Element> build_elements(const TriMesh& mesh) {
    std::vector<P1Element> els(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        const Vec2& a = mesh.points[tri[0]];
        const Vec2& b = mesh.points[tri[1]];
        const Vec2& c = mesh.points[tri[2]];
        double two_a = orient2d(a, b, c);
        P1Element el;
        el.area = 0.5 * two_a;
        el.grad[0] = Vec2{b.y - c.y, c.x - b.x} * (1.0 / two_a);
        el.grad[1] = Vec2{c.y - a.y, a.x - c.x} * (1.0 / two_a);
        el.grad[2] = Vec2{a.y - b.y, b.x - a.x} * (1.0 / two_a);
        els[t] = el;
    }
    return els;
}

Vec2 triangle_gradient(const P1Element& el, const std::array<int, 3>& tri,
                       const std::vector<double>& u) {
    return el.grad[0] * u[tri[0]] + el.grad[1] * u[tri[1]] + el.grad[2] * u[tri[2]];
}

double area_energy(const TriMesh& mesh, const std::vector<P1Element>& els,
                   const std::vector<double>& u) {
    double e = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        Vec2 g = triangle_gradient(els[t], mesh.triangles[t], u);
        e += els[t].area * std::sqrt(1.0 + norm2(g));
    }
    return e;
}

void fill_derived(GraphSolution& sol, const std::vector<P1Element>& els) {
    const TriMesh& mesh = *sol.mesh;
    sol.gradient.resize(mesh.num_triangles());
    sol.w.resize(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        Vec2 g = triangle_gradient(els[t], mesh.triangles[t], sol.u);
        sol.gradient[t] = g;
        sol.w[t] = std::sqrt(1.0 + norm2(g));
    }
}

} // namespace

double GraphSolution::max_w() const {
    double m = 1.0;
    for (double v : w) m = std::max(m, v);
    return m;
}

GraphSolution make_graph_solution(std::shared_ptr<const TriMesh> mesh, std::vector<double> u) {
    if (static_cast<int>(u.size()) != mesh->num_nodes())
        throw Error(ErrorCode::InvalidInput, "nodal vector size does not match the mesh");
    GraphSolution sol;
    sol.mesh = std::move(mesh);
    sol.u = std::move(u);
    fill_derived(sol, build_elements(*sol.mesh));
    return sol;
}

GraphSolution solve_dirichlet(std::shared_ptr<const TriMesh> mesh,
                              const std::vector<double>& boundary_values,
                              const SolverOptions& options,
                              const std::vector<double>* initial_guess) {
    const TriMesh& m = *mesh;
    const int n = m.num_nodes();
    if (static_cast<int>(boundary_values.size()) != n)
        throw Error(ErrorCode::InvalidInput, "boundary value vector size does not match the mesh");
    for (int v = 0; v < n; ++v)
        if (m.is_boundary_node(v) && !std::isfinite(boundary_values[v]))
            throw Error(ErrorCode::InvalidInput, "boundary values must be finite");

    std::vector<P1Element> els = build_elements(m);
    for (const P1Element& el : els)
        if (!(el.area > 0.0))
            throw Error(ErrorCode::InvalidInput, "degenerate triangle in solver input");

    std::vector<int> free_id(n, -1);
    std::vector<int> free_nodes;
    for (int v = 0; v < n; ++v) {
        if (!m.is_boundary_node(v)) {
            free_id[v] = static_cast<int>(free_nodes.size());
            free_nodes.push_back(v);
        }
    }
    const int nf = static_cast<int>(free_nodes.size());

    std::vector<double> u(n, 0.0);
    for (int v = 0; v < n; ++v)
        if (m.is_boundary_node(v)) u[v] = boundary_values[v];

    using Sparse = Eigen::SparseMatrix<double>;
    Eigen::SimplicialLDLT<Sparse> ldlt;
    bool pattern_ready = false;

    if (nf > 0) {
        if (initial_guess && static_cast<int>(initial_guess->size()) == n) {
            for (int v : free_nodes) u[v] = (*initial_guess)[v];
        } else {
            // Harmonic warm start: minimize the Dirichlet energy first.
            std::vector<Eigen::Triplet<double>> trips;
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf);
            for (int t = 0; t < m.num_triangles(); ++t) {
                const auto& tri = m.triangles[t];
                const P1Element& el = els[t];
                for (int i = 0; i < 3; ++i) {
                    int vi = tri[i];
                    if (free_id[vi] < 0) continue;
                    for (int j = 0; j < 3; ++j) {
                        double kij = el.area * dot(el.grad[i], el.grad[j]);
                        int vj = tri[j];
                        if (free_id[vj] >= 0)
                            trips.emplace_back(free_id[vi], free_id[vj], kij);
                        else
                            rhs[free_id[vi]] -= kij * u[vj];
                    }
                }
            }
            Sparse K(nf, nf);
            K.setFromTriplets(trips.begin(), trips.end());
            ldlt.analyzePattern(K);
            pattern_ready = true;
            ldlt.factorize(K);
            if (ldlt.info() != Eigen::Success)
                throw Error(ErrorCode::SolverFailure, "harmonic warm start factorization failed");
            Eigen::VectorXd h = ldlt.solve(rhs);
            for (int i = 0; i < nf; ++i) u[free_nodes[i]] = h[i];
        }
    }

    // Damped Newton on E(u) = sum_T area_T * sqrt(1 + |grad u|_T^2).
    std::vector<double> history;
    double grad_norm = 0.0;
    std::vector<Eigen::Triplet<double>> trips;
    for (int iter = 0; iter <= options.max_iterations; ++iter) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(nf);
        trips.clear();
        for (int t = 0; t < m.num_triangles(); ++t) {
            const auto& tri = m.triangles[t];
            const P1Element& el = els[t];
            Vec2 gr = triangle_gradient(el, tri, u);
            double w = std::sqrt(1.0 + norm2(gr));
            double a_w = el.area / w;
            double a_w3 = a_w / (w * w);
            double gg[3];
            for (int i = 0; i < 3; ++i) gg[i] = dot(el.grad[i], gr);
            for (int i = 0; i < 3; ++i) {
                int fi = free_id[tri[i]];
                if (fi < 0) continue;
                g[fi] += a_w * gg[i];
                for (int j = 0; j < 3; ++j) {
                    int fj = free_id[tri[j]];
                    if (fj < 0) continue;
                    double hij = a_w * dot(el.grad[i], el.grad[j]) - a_w3 * gg[i] * gg[j];
                    trips.emplace_back(fi, fj, hij);
                }
            }
        }
        grad_norm = g.norm();
        history.push_back(grad_norm);
        if (grad_norm <= options.tol_solve || nf == 0) break;
        if (iter == options.max_iterations) {
            std::ostringstream os;
            os << "Newton did not reach tolerance " << options.tol_solve << " in "
               << options.max_iterations << " iterations; residual history:";
            for (size_t k = history.size() > 12 ? history.size() - 12 : 0; k < history.size(); ++k)
                os << " " << history[k];
            throw Error(ErrorCode::SolverFailure, os.str());
        }

        Sparse hess(nf, nf);
        hess.setFromTriplets(trips.begin(), trips.end());
        if (!pattern_ready) {
            ldlt.analyzePattern(hess);
            pattern_ready = true;
        }
        ldlt.factorize(hess);
        if (ldlt.info() != Eigen::Success)
            throw Error(ErrorCode::SolverFailure, "Hessian factorization failed");
        Eigen::VectorXd d = ldlt.solve(-g);

        double slope = g.dot(d); // negative: Newton direction on a convex functional
        double e0 = area_energy(m, els, u);
        double step = 1.0;
        std::vector<double> trial = u;
        for (int ls = 0; ls < 60; ++ls) {
            for (int i = 0; i < nf; ++i) trial[free_nodes[i]] = u[free_nodes[i]] + step * d[i];
            if (area_energy(m, els, trial) <= e0 + options.armijo * step * slope) break;
            step *= 0.5;
        }
        for (int i = 0; i < nf; ++i) u[free_nodes[i]] += step * d[i];
    }

    GraphSolution sol;
    sol.mesh = std::move(mesh);
    sol.u = std::move(u);
    sol.residual_norm = grad_norm;
    fill_derived(sol, els);
    return sol;
}

JenkinsSerrinResult solve_jenkins_serrin(std::shared_ptr<const TriMesh> mesh, const Vec2& q,
                                         const JenkinsSerrinOptions& options) {
    const TriMesh& m = *mesh;
    if (options.m_schedule.empty())
        throw Error(ErrorCode::InvalidInput, "empty truncation schedule");
    for (size_t i = 1; i < options.m_schedule.size(); ++i)
        if (options.m_schedule[i] <= options.m_schedule[i - 1])
            throw Error(ErrorCode::InvalidInput, "truncation schedule must be increasing");
    if (!m.locate(q))
        throw Error(ErrorCode::InvalidInput, "normalization point lies outside the domain");

    if (!options.force) {
        auto [ok, witness] = chord_criterion(m.domain);
        if (!ok) {
            std::ostringstream os;
            os << "Jenkins-Serrin problem unsolvable: chord (" << witness->from << ","
               << witness->to << ") between opposite-parity vertices has length "
               << witness->length << " <= 1";
            throw Error(ErrorCode::SpecialDomain, os.str());
        }
    }

    std::vector<int> compact_nodes;
    for (int v = 0; v < m.num_nodes(); ++v)
        if (m.node_boundary_dist[v] >= options.compact_margin) compact_nodes.push_back(v);

    JenkinsSerrinResult result;
    std::vector<double> bc(m.num_nodes(), 0.0);
    std::vector<double> prev;
    for (double level : options.m_schedule) {
        for (int v = 0; v < m.num_nodes(); ++v) {
            if (m.node_polygon_vertex[v] >= 0) {
                bc[v] = 0.0; // a +inf and a -inf edge meet at every polygon vertex
            } else if (m.node_polygon_edge[v] >= 0) {
                bc[v] = m.domain.edge_mark_positive(m.node_polygon_edge[v]) ? level : -level;
            }
        }
        GraphSolution sol =
            solve_dirichlet(mesh, bc, options.solver, prev.empty() ? nullptr : &prev);
        sol.truncation_level = level;
        sol.jenkins_serrin_truncation = true;
        double uq = m.interpolate(sol.u, q);
        for (double& x : sol.u) x -= uq;
        prev = sol.u;

        double diff = std::numeric_limits<double>::quiet_NaN();
        if (!result.sequence.empty()) {
            diff = 0.0;
            const auto& last = result.sequence.back().u;
            for (int v : compact_nodes) diff = std::max(diff, std::abs(sol.u[v] - last[v]));
            result.successive_diffs.push_back(diff);
        }
        result.schedule_levels.push_back(level);
        result.sequence.push_back(std::move(sol));
        if (!result.successive_diffs.empty() && result.successive_diffs.back() <= options.tol_js) {
            result.stabilized = true;
            break;
        }
    }

    if (!result.stabilized && result.sequence.size() >= 2)
        result.divergence = detect_divergence_lines(result.sequence, options.divergence);

    result.solution = result.sequence.back();
    return result;
}

namespace {

// Intersection of a line (point + direction) with a convex polygon, as the
// parameter interval along the direction; empty when the line misses.
std::optional<std::pair<double, double>> clip_line(const std::vector<Vec2>& poly, const Vec2& p,
                                                   const Vec2& d) {
    double t0 = -1e300, t1 = 1e300;
    size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        Vec2 a = poly[i], b = poly[(i + 1) % n];
        Vec2 nrm = perp(b - a); // inward for counterclockwise order
        double denom = dot(nrm, d);
        double num = dot(nrm, a - p);
        if (std::abs(denom) < 1e-15) {
            if (num > 1e-12) return std::nullopt; // parallel and outside
        } else if (denom > 0.0) {
            t0 = std::max(t0, num / denom);
        } else {
            t1 = std::min(t1, num / denom);
        }
    }
    if (t0 > t1) return std::nullopt;
    return std::make_pair(t0, t1);
}

} // namespace

DivergenceReport detect_divergence_lines(const std::vector<GraphSolution>& solutions,
                                         const DivergenceOptions& options) {
    if (solutions.size() < 2)
        throw Error(ErrorCode::InvalidInput, "divergence detection needs at least two solutions");
    const GraphSolution& last = solutions.back();
    const TriMesh& mesh = *last.mesh;
    const std::vector<Vec2>& poly = mesh.domain.vertices();

    // Common interior region: every earlier domain must reach into the last one.
    for (const GraphSolution& s : solutions) {
        bool overlap = false;
        for (const Vec2& v : s.mesh->domain.vertices())
            if (point_in_convex(v, poly, -1e-9)) overlap = true;
        for (const Vec2& v : poly)
            if (point_in_convex(v, s.mesh->domain.vertices(), -1e-9)) overlap = true;
        if (!overlap)
            throw Error(ErrorCode::InvalidInput, "solution domains share no interior region");
    }

    const double h = mesh.target_h;
    DivergenceReport report;

    std::vector<int> marked;
    for (int t = 0; t < mesh.num_triangles(); ++t)
        if (last.w[t] >= options.w_div) marked.push_back(t);
    if (marked.empty()) {
        report.converges = true;
        return report;
    }

    ConjugateField field = conjugate_function(last, 0, 0.0);

    // Hough accumulation over (line angle, signed offset). The divergence
    // direction of a blown-up triangle is perpendicular to its gradient, so
    // the line normal follows the gradient.
    const int n_theta = 90;
    const double d_rho = 1.5 * h;
    Vec2 origin = mesh.domain.centroid();
    std::map<std::pair<int, int>, std::vector<int>> bins;
    for (int t : marked) {
        Vec2 g = last.gradient[t];
        if (norm(g) < 1e-12) continue;
        Vec2 nrm = normalized(g);
        if (nrm.y < 0.0 || (nrm.y == 0.0 && nrm.x < 0.0)) nrm = -nrm;
        double theta = std::atan2(nrm.y, nrm.x); // in [0, pi)
        int jt = std::min(n_theta - 1, static_cast<int>(theta / kPi * n_theta));
        double rho = dot(mesh.triangle_centroid(t) - origin, nrm);
        int jr = static_cast<int>(std::floor(rho / d_rho));
        bins[{jt, jr}].push_back(t);
    }

    std::map<std::pair<int, int>, bool> claimed;
    for (const auto& [key, seed_members] : bins) {
        if (claimed[key]) continue;
        // Merge angular neighbors at the same offset; offsets stay separate so
        // parallel lines are reported individually.
        std::vector<int> members = seed_members;
        for (int dt : {-1, 1}) {
            auto it = bins.find({(key.first + dt + n_theta) % n_theta, key.second});
            if (it != bins.end() && !claimed[it->first]) {
                members.insert(members.end(), it->second.begin(), it->second.end());
                claimed[it->first] = true;
            }
        }
        claimed[key] = true;
        if (static_cast<int>(members.size()) < 4) continue;

        // Total-least-squares line through the member centroids.
        Vec2 mean{0.0, 0.0};
        for (int t : members) mean += mesh.triangle_centroid(t);
        mean = mean * (1.0 / members.size());
        double sxx = 0.0, sxy = 0.0, syy = 0.0;
        for (int t : members) {
            Vec2 r = mesh.triangle_centroid(t) - mean;
            sxx += r.x * r.x;
            sxy += r.x * r.y;
            syy += r.y * r.y;
        }
        double tr = sxx + syy, det = sxx * syy - sxy * sxy;
        double lam = 0.5 * tr + std::sqrt(std::max(0.25 * tr * tr - det, 0.0));
        Vec2 dir = std::abs(sxy) > 1e-30 ? normalized(Vec2{lam - syy, sxy})
                                         : (sxx >= syy ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0});

        double tmin = 1e300, tmax = -1e300, perp_max = 0.0;
        for (int t : members) {
            Vec2 r = mesh.triangle_centroid(t) - mean;
            tmin = std::min(tmin, dot(r, dir));
            tmax = std::max(tmax, dot(r, dir));
            perp_max = std::max(perp_max, std::abs(cross(dir, r)));
        }
        if (perp_max > 2.5 * h) continue;     // not line-like
        if (tmax - tmin < 3.0 * h) continue;  // too short to call a segment

        // Extend the chord to the boundary when the marked coverage reaches it.
        auto span = clip_line(poly, mean, dir);
        if (!span) continue;
        double lo = tmin, hi = tmax;
        if (tmin - span->first <= 2.5 * h) lo = span->first;
        if (span->second - tmax <= 2.5 * h) hi = span->second;
        Vec2 a = mean + dir * lo, b = mean + dir * hi;

        double psi_a = mesh.interpolate(field.psi, a);
        double psi_b = mesh.interpolate(field.psi, b);
        double ratio = std::abs(psi_b - psi_a) / std::max(dist(a, b), 1e-12);
        if (ratio < 1.0 - options.eps_div) continue;

        DivergenceSegment seg;
        seg.a = a;
        seg.b = b;
        seg.flux_ratio = ratio;
        for (int t : members) seg.max_w = std::max(seg.max_w, last.w[t]);

        if (last.jenkins_serrin_truncation) {
            const double near_tol = 2.5 * h;
            // Rule out candidates explained by the +-M truncation layer: a
            // segment running along a marked edge is not a divergence line,
            // and a divergence line cannot end on the interior of an edge
            // with infinite boundary data.
            int npoly = mesh.domain.size();
            for (int e = 0; e < npoly && !seg.artifact; ++e) {
                auto [ea, eb] = mesh.domain.edge(e);
                Vec2 ed = normalized(eb - ea);
                bool parallel = std::abs(cross(ed, dir)) < 0.17; // within ~10 degrees
                Vec2 midpoint = (a + b) * 0.5;
                if (parallel && point_segment_distance(midpoint, ea, eb) <= near_tol &&
                    point_segment_distance(a, ea, eb) <= near_tol &&
                    point_segment_distance(b, ea, eb) <= near_tol) {
                    seg.artifact = true;
                    seg.note = "coincides with the truncation layer of a marked edge";
                }
            }
            for (const Vec2& endpoint : {a, b}) {
                if (seg.artifact) break;
                double vertex_dist = 1e300;
                for (const Vec2& v : poly) vertex_dist = std::min(vertex_dist, dist(endpoint, v));
                if (vertex_dist <= near_tol) continue; // ends at a polygon vertex: admissible
                if (dist_to_polygon_boundary(endpoint, poly) <= near_tol) {
                    seg.artifact = true;
                    seg.note = "ends on the interior of a marked edge";
                }
            }
        }
        report.segments.push_back(std::move(seg));
    }

    report.converges = !report.has_real_segment();
    return report;
}

std::vector<bool> vertex_gradient_check(const GraphSolution& sol, double r0, double delta) {
    const TriMesh& mesh = *sol.mesh;
    const int np = mesh.domain.size();

    // Nodal W: area-weighted average over incident triangles.
    std::vector<double> nodal_w(mesh.num_nodes(), 0.0), weight(mesh.num_nodes(), 0.0);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        double a = mesh.triangle_area_of(t);
        for (int k = 0; k < 3; ++k) {
            nodal_w[mesh.triangles[t][k]] += a * sol.w[t];
            weight[mesh.triangles[t][k]] += a;
        }
    }
    for (int v = 0; v < mesh.num_nodes(); ++v) nodal_w[v] /= weight[v];

    std::vector<bool> out(np, false);
    const double radius = delta * r0;
    for (int i = 0; i < np; ++i) {
        Vec2 p = mesh.domain.vertex(i);
        double wmin = 1e300;
        int count = 0;
        for (int v = 0; v < mesh.num_nodes(); ++v) {
            if (dist(mesh.points[v], p) <= radius) {
                wmin = std::min(wmin, nodal_w[v]);
                ++count;
            }
        }
        if (count == 0)
            throw Error(ErrorCode::InvalidInput,
                        "mesh too coarse: no nodes inside the vertex disk");
        out[i] = wmin > 10.0;
    }
    return out;
}

} // namespace saddle
