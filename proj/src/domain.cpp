#include "saddle/domain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>

#include "saddle/error.hpp"

namespace saddle {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kAngleEps = 1e-12;

[[noreturn]] void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

} // namespace

MarkedPolygon MarkedPolygon::create(std::vector<Vec2> vertices, double tol_geom) {
    if (tol_geom < 0.0) fail(ErrorCode::InvalidInput, "tol_geom must be nonnegative");
    const int n = static_cast<int>(vertices.size());
    if (n < 4) fail(ErrorCode::InvalidInput, "polygon needs at least 4 vertices");
    if (n % 2 != 0) fail(ErrorCode::InvalidInput, "even vertex count required");

    for (int i = 0; i < n; ++i) {
        double len = dist(vertices[i], vertices[(i + 1) % n]);
        if (std::abs(len - 1.0) > tol_geom) {
            std::ostringstream os;
            os << "edge " << i << " has length " << len << ", expected 1";
            fail(ErrorCode::InvalidInput, os.str());
        }
    }

    if (polygon_signed_area(vertices) <= 0.0)
        fail(ErrorCode::InvalidInput, "vertices must be in counterclockwise order");

    // Convexity with flat vertices allowed: at each vertex the boundary turns
    // left by tau in [0, pi); the turns must total 2*pi (simple closed convex
    // curve). A turn near pi would be a cusp, a negative turn a reflex vertex.
    double total_turn = 0.0;
    for (int i = 0; i < n; ++i) {
        Vec2 din = vertices[i] - vertices[(i + n - 1) % n];
        Vec2 dout = vertices[(i + 1) % n] - vertices[i];
        double s = cross(din, dout);
        double c = dot(din, dout);
        if (s < -tol_geom) fail(ErrorCode::InvalidInput, "non-convex: reflex vertex");
        double tau = std::atan2(std::max(s, 0.0), c);
        if (tau > kPi - 1e-9) fail(ErrorCode::InvalidInput, "degenerate vertex (zero interior angle)");
        total_turn += tau;
    }
    if (std::abs(total_turn - 2.0 * kPi) > 1e-7)
        fail(ErrorCode::InvalidInput, "boundary does not close up convexly");

    return MarkedPolygon(std::move(vertices), tol_geom);
}

double MarkedPolygon::interior_angle(int i) const {
    Vec2 din = vertex(i) - vertex(i - 1);
    Vec2 dout = vertex(i + 1) - vertex(i);
    double tau = std::atan2(std::max(cross(din, dout), 0.0), dot(din, dout));
    return kPi - tau;
}

bool MarkedPolygon::is_flat_vertex(int i) const {
    Vec2 din = vertex(i) - vertex(i - 1);
    Vec2 dout = vertex(i + 1) - vertex(i);
    return std::abs(cross(din, dout)) <= tol_geom_ && dot(din, dout) > 0.0;
}

bool MarkedPolygon::strictly_convex() const {
    for (int i = 0; i < size(); ++i)
        if (is_flat_vertex(i)) return false;
    return true;
}

Vec2 MarkedPolygon::centroid() const {
    Vec2 c{0.0, 0.0};
    for (const Vec2& v : vertices_) c += v;
    return c * (1.0 / size());
}

const char* domain_class_name(DomainClass c) {
    switch (c) {
        case DomainClass::General: return "general";
        case DomainClass::Strip: return "strip";
        case DomainClass::InfiniteSpecial: return "infinite-special";
        case DomainClass::HalfPlaneDegenerate: return "half-plane";
    }
    return "unknown";
}

double AngleGenerator::angle(int i) const {
    const int m = static_cast<int>(window.size());
    const int lo = start_index;
    const int hi = start_index + m - 1;
    if (m > 0 && i >= lo && i <= hi) return window[i - lo];
    if (tail_is_zero()) return 0.0;
    int steps = (m == 0) ? std::abs(i) : (i > hi ? i - hi - 1 : lo - i - 1);
    return tail_amplitude * std::pow(tail_ratio, steps);
}

double AngleGenerator::total_turn() const {
    double t = 0.0;
    for (double a : window) t += a;
    if (!tail_is_zero()) {
        // Two geometric tails, one per side.
        t += 2.0 * tail_amplitude / (1.0 - tail_ratio);
    }
    return t;
}

std::vector<int> AngleGenerator::positive_indices(double eps) const {
    std::vector<int> idx;
    const int m = static_cast<int>(window.size());
    for (int j = 0; j < m; ++j)
        if (window[j] > eps) idx.push_back(start_index + j);
    if (!tail_is_zero()) {
        // The tail decays geometrically; walk until below eps.
        for (int side = 0; side < 2; ++side) {
            int i = side == 0 ? start_index + m : start_index - 1;
            int step = side == 0 ? 1 : -1;
            if (m == 0 && side == 1) i = -1;
            if (m == 0 && side == 0) i = 0;
            for (int guard = 0; guard < 4096; ++guard, i += step) {
                if (angle(i) <= eps) break;
                idx.push_back(i);
            }
        }
        std::sort(idx.begin(), idx.end());
        idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    }
    return idx;
}

void UnboundedDomainSpec::validate() const {
    if (std::abs(norm(initial_direction) - 1.0) > 1e-12)
        fail(ErrorCode::InvalidInput, "initial_direction must be a unit vector");
    for (size_t j = 0; j < angles.window.size(); ++j)
        if (angles.window[j] < -kAngleEps)
            fail(ErrorCode::InvalidInput, "negative turning angle breaks convexity");
    if (!angles.tail_is_zero()) {
        if (angles.tail_amplitude < 0.0)
            fail(ErrorCode::InvalidInput, "negative tail amplitude breaks convexity");
        if (angles.tail_ratio < 0.0 || angles.tail_ratio >= 1.0)
            fail(ErrorCode::InvalidInput, "tail ratio must lie in [0,1)");
    }
    double total = angles.total_turn();
    if (total > kPi + 1e-9)
        fail(ErrorCode::InvalidInput, "total turning exceeds pi: boundary not convex-unbounded");
    for (int j = 0; j < static_cast<int>(angles.window.size()); ++j)
        if (angles.window[j] >= kPi - 1e-9)
            fail(ErrorCode::InvalidInput, "turning angle >= pi: zero interior angle");
}

Vec2 UnboundedDomainSpec::edge_direction(int i) const {
    // Edge 0 has the initial direction; the boundary turns left by angle(j)
    // at vertex j, so crossing vertices 1..i (or back across 0..i+1) rotates
    // the direction accordingly.
    double turn = 0.0;
    if (i > 0)
        for (int j = 1; j <= i; ++j) turn += angles.angle(j);
    else if (i < 0)
        for (int j = i + 1; j <= 0; ++j) turn -= angles.angle(j);
    return rotated(initial_direction, turn);
}

Vec2 UnboundedDomainSpec::vertex(int i) const {
    Vec2 p = base_vertex;
    if (i > 0)
        for (int j = 0; j < i; ++j) p += edge_direction(j);
    else if (i < 0)
        for (int j = -1; j >= i; --j) p -= edge_direction(j);
    return p;
}

namespace {

// Exact sum of generator angles over j >= j0 (tails via geometric series).
double sum_angles_from(const AngleGenerator& g, int j0) {
    const int m = static_cast<int>(g.window.size());
    const int lo = g.start_index, hi = g.start_index + m - 1;
    double s = 0.0;
    for (int j = std::max(j0, lo); j <= hi; ++j) s += g.window[j - lo];
    if (!g.tail_is_zero()) {
        const double q = g.tail_ratio, a = g.tail_amplitude;
        int f = std::max(j0, hi + 1); // first right-tail index included
        s += a * std::pow(q, f - (hi + 1)) / (1.0 - q);
        if (j0 < lo) {
            // Left tail runs j0..lo-1 with exponents lo-1-j downward.
            s += a * (1.0 - std::pow(q, lo - j0)) / (1.0 - q);
        }
    }
    return s;
}

double sum_angles_upto(const AngleGenerator& g, int j1) {
    return g.total_turn() - sum_angles_from(g, j1 + 1);
}

} // namespace

Vec2 UnboundedDomainSpec::direction_limit_pos() const {
    return rotated(initial_direction, sum_angles_from(angles, 1));
}

Vec2 UnboundedDomainSpec::direction_limit_neg() const {
    return rotated(initial_direction, -sum_angles_upto(angles, 0));
}

int UnboundedDomainSpec::normalize_base() {
    if (angles.angle(0) > kAngleEps) return 0;
    std::vector<int> pos = angles.positive_indices(kAngleEps);
    if (pos.empty()) fail(ErrorCode::InvalidInput, "no positive turning angle: degenerate domain");
    int best = pos.front();
    for (int i : pos) {
        if (std::abs(i) < std::abs(best) || (std::abs(i) == std::abs(best) && i > best)) best = i;
    }
    // Re-anchor so vertex `best` becomes vertex 0.
    base_vertex = vertex(best);
    initial_direction = edge_direction(best);
    angles.start_index -= best;
    return best;
}

DomainClass classify_domain(const UnboundedDomainSpec& spec) {
    spec.validate();
    double total = spec.angles.total_turn();
    std::vector<int> pos = spec.angles.positive_indices(kAngleEps);
    if (pos.empty() || total <= kAngleEps) return DomainClass::HalfPlaneDegenerate;
    if (pos.size() == 2 && pos[1] == pos[0] + 1 &&
        std::abs(spec.angles.angle(pos[0]) + spec.angles.angle(pos[1]) - kPi) <= 1e-9)
        return DomainClass::InfiniteSpecial;
    if (std::abs(total - kPi) <= 1e-9) return DomainClass::Strip;
    return DomainClass::General;
}

bool is_special_bounded(const MarkedPolygon& poly) {
    const int n = poly.size();
    const int k = n / 2;
    if (k < 3) return false;

    std::vector<int> corners;
    for (int i = 0; i < n; ++i)
        if (!poly.is_flat_vertex(i)) corners.push_back(i);
    if (corners.size() != 4) return false;

    // Chain lengths between consecutive corners, in edge counts.
    int len[4];
    for (int c = 0; c < 4; ++c) {
        int next = corners[(c + 1) % 4];
        len[c] = poly.index(next - corners[c] + n);
    }
    bool sides_ok = (len[0] == 1 && len[2] == 1 && len[1] == k - 1 && len[3] == k - 1) ||
                    (len[1] == 1 && len[3] == 1 && len[0] == k - 1 && len[2] == k - 1);
    if (!sides_ok) return false;

    // Corner quadrilateral must be a parallelogram.
    Vec2 a = poly.vertex(corners[0]), b = poly.vertex(corners[1]);
    Vec2 c = poly.vertex(corners[2]), d = poly.vertex(corners[3]);
    return norm((b - a) + (d - c)) <= 1e2 * poly.tol_geom() &&
           norm((c - b) + (a - d)) <= 1e2 * poly.tol_geom();
}

std::pair<bool, std::optional<ChordWitness>> chord_criterion(const MarkedPolygon& poly) {
    const int n = poly.size();
    std::optional<ChordWitness> worst;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue; // consecutive around the wrap
            if ((i + j) % 2 == 0) continue;     // same parity
            double len = dist(poly.vertex(i), poly.vertex(j));
            if (len <= 1.0 + poly.tol_geom()) {
                if (!worst || len < worst->length) worst = ChordWitness{i, j, len};
            }
        }
    }
    if (worst) return {false, worst};
    return {true, std::nullopt};
}

std::pair<bool, std::optional<SubpolygonWitness>>
jenkins_serrin_bruteforce(const MarkedPolygon& poly, int max_vertices) {
    const int n = poly.size();
    if (n > max_vertices)
        fail(ErrorCode::InvalidInput,
             "polygon too large for exhaustive subpolygon enumeration (limit " +
                 std::to_string(max_vertices) + " vertices)");

    const double tol = std::max(poly.tol_geom(), 1e-12);
    std::vector<int> members;
    members.reserve(n);

    const std::uint32_t full = (n >= 32) ? 0xffffffffu : ((1u << n) - 1u);
    for (std::uint32_t mask = 0; mask <= full; ++mask) {
        int m = std::popcount(mask);
        if (m < 3) continue;
        members.clear();
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) members.push_back(i);

        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (int t = 0; t < m; ++t) {
            int i = members[t], j = members[(t + 1) % m];
            bool consecutive = poly.index(j - i) == 1;
            if (consecutive) {
                gamma += 1.0;
                (poly.edge_mark_positive(i) ? alpha : beta) += 1.0;
            } else {
                gamma += dist(poly.vertex(i), poly.vertex(j));
            }
        }

        bool is_full = (mask == full);
        bool violated = is_full ? std::abs(alpha - beta) > tol
                                : (2.0 * alpha >= gamma - tol || 2.0 * beta >= gamma - tol);
        if (violated) {
            SubpolygonWitness w;
            w.vertex_indices = members;
            w.alpha = alpha;
            w.beta = beta;
            w.gamma = gamma;
            return {false, w};
        }
        if (mask == full) break; // full mask is the last with all bits below n
    }
    return {true, std::nullopt};
}

QuadrilateralComparison quadrilateral_compare(const Vec2& a, const Vec2& b, const Vec2& c,
                                              const Vec2& d, double tol_geom) {
    // Convexity in the given (counterclockwise or clockwise) order.
    double s1 = orient2d(a, b, c), s2 = orient2d(b, c, d), s3 = orient2d(c, d, a),
           s4 = orient2d(d, a, b);
    bool all_pos = s1 > -tol_geom && s2 > -tol_geom && s3 > -tol_geom && s4 > -tol_geom;
    bool all_neg = s1 < tol_geom && s2 < tol_geom && s3 < tol_geom && s4 < tol_geom;
    if (!all_pos && !all_neg)
        fail(ErrorCode::InvalidInput, "quadrilateral_compare: ABCD is not convex");
    double bc = dist(b, c), ad = dist(a, d);
    if (std::abs(bc - ad) > std::max(tol_geom, 1e-12) * (1.0 + bc))
        fail(ErrorCode::InvalidInput, "quadrilateral_compare: |BC| != |AD|");
    double angle_a = std::acos(std::clamp(dot(normalized(b - a), normalized(d - a)), -1.0, 1.0));
    double angle_b = std::acos(std::clamp(dot(normalized(a - b), normalized(c - b)), -1.0, 1.0));
    if (angle_a + angle_b > kPi + 1e-9)
        fail(ErrorCode::InvalidInput, "quadrilateral_compare: angles at A and B exceed pi");

    QuadrilateralComparison out;
    double cd = dist(c, d), ab = dist(a, b);
    double tol = std::max(tol_geom, 1e-12) * (1.0 + ab);
    if (std::abs(cd - ab) <= tol)
        out.cd_versus_ab = LengthOrdering::Equal;
    else
        out.cd_versus_ab = cd < ab ? LengthOrdering::Less : LengthOrdering::Greater;
    out.is_parallelogram = norm((b - a) - (c - d)) <= 10.0 * tol;
    return out;
}

MarkedPolygon build_exhaustion_domain(const UnboundedDomainSpec& spec, int n) {
    if (n < 1) fail(ErrorCode::InvalidInput, "exhaustion index must be >= 1");
    UnboundedDomainSpec s = spec;
    s.validate();
    if (classify_domain(s) != DomainClass::General)
        fail(ErrorCode::InvalidInput,
             std::string("exhaustion requires a general domain, got ") +
                 domain_class_name(classify_domain(s)));
    s.normalize_base();

    // Arc p_{-n} .. p_n, then the image of the open arc under the point
    // symmetry about the chord midpoint, traversed so the boundary stays
    // counterclockwise. The symmetry maps vertex p_i to the slot of p_{-i}.
    Vec2 mid = (s.vertex(-n) + s.vertex(n)) * 0.5;
    std::vector<Vec2> ring;
    ring.reserve(4 * n);
    for (int i = -n; i <= n; ++i) ring.push_back(s.vertex(i));
    for (int i = -n + 1; i <= n - 1; ++i) ring.push_back(mid * 2.0 - s.vertex(i));

    // Edge j of the list corresponds to boundary edge -n+j of the domain for
    // j < 2n; alternation continues across the seams. Rotate the list start
    // when n is odd so list parity matches the domain's mark parity.
    if (n % 2 != 0) std::rotate(ring.begin(), ring.begin() + 1, ring.end());

    MarkedPolygon poly = MarkedPolygon::create(std::move(ring), spec.tol_geom);
    auto [ok, witness] = chord_criterion(poly);
    if (!ok) {
        std::ostringstream os;
        os << "exhaustion domain unexpectedly fails the chord criterion: chord (" << witness->from
           << "," << witness->to << ") of length " << witness->length;
        fail(ErrorCode::Internal, os.str());
    }
    return poly;
}

double inner_radius(const MarkedPolygon& poly) {
    const int n = poly.size();
    double dmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        for (int e = 0; e < n; ++e) {
            if (e == i || poly.index(e + 1) == i) continue; // incident edges
            auto [a, b] = poly.edge(e);
            dmin = std::min(dmin, point_segment_distance(poly.vertex(i), a, b));
        }
    }
    if (!(dmin > poly.tol_geom()))
        fail(ErrorCode::InvalidInput, "degenerate polygon: vertex touches a non-incident edge");
    return std::min(1.0, 0.5 * dmin);
}

MarkedPolygon make_unit_square(double tol_geom) {
    return MarkedPolygon::create({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, tol_geom);
}

MarkedPolygon make_unit_square_vertical_plus(double tol_geom) {
    return MarkedPolygon::create({{1, 0}, {1, 1}, {0, 1}, {0, 0}}, tol_geom);
}

MarkedPolygon make_special_polygon(int k, double slant, double tol_geom) {
    if (k < 3) fail(ErrorCode::InvalidInput, "special polygon needs k >= 3");
    Vec2 step{std::cos(slant), std::sin(slant)};
    std::vector<Vec2> v;
    for (int i = 0; i < k; ++i) v.push_back({static_cast<double>(i), 0.0});
    for (int i = k - 1; i >= 0; --i) v.push_back(Vec2{static_cast<double>(i), 0.0} + step);
    return MarkedPolygon::create(std::move(v), tol_geom);
}

MarkedPolygon make_regular_hexagon(double tol_geom) {
    std::vector<Vec2> v;
    Vec2 p{0.0, 0.0};
    for (int i = 0; i < 6; ++i) {
        v.push_back(p);
        p += rotated(Vec2{1.0, 0.0}, i * kPi / 3.0);
    }
    return MarkedPolygon::create(std::move(v), tol_geom);
}

UnboundedDomainSpec make_right_angle_spec() {
    UnboundedDomainSpec s;
    s.base_vertex = {0.0, 0.0};
    s.initial_direction = {1.0, 0.0};
    s.angles.window = {kPi / 2.0};
    s.angles.start_index = 0;
    s.angles.tail = AngleGenerator::Tail::Zero;
    return s;
}

UnboundedDomainSpec make_geometric_decay_spec() {
    UnboundedDomainSpec s;
    s.base_vertex = {0.0, 0.0};
    s.initial_direction = {1.0, 0.0};
    s.angles.window = {kPi / 4.0};
    s.angles.start_index = 0;
    s.angles.tail = AngleGenerator::Tail::Geometric;
    s.angles.tail_amplitude = kPi / 8.0;
    s.angles.tail_ratio = 0.5;
    return s;
}

} // namespace saddle
