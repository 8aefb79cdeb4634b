#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "saddle/geometry.hpp"

namespace saddle {

inline constexpr double kDefaultTolGeom = 1e-9;

// Bounded convex polygon with unit edges and alternating boundary marks:
// edge (p_i, p_{i+1}) carries +infinity boundary data iff i is even (0-based).
// Interior angles of exactly pi (flat vertices) are allowed.
class MarkedPolygon {
  public:
    // Validates all invariants (even count >= 4, unit edges, convexity,
    // counterclockwise simple boundary) and throws Error on violation.
    static MarkedPolygon create(std::vector<Vec2> vertices, double tol_geom = kDefaultTolGeom);

    int size() const { return static_cast<int>(vertices_.size()); }
    const std::vector<Vec2>& vertices() const { return vertices_; }
    const Vec2& vertex(int i) const { return vertices_[index(i)]; }
    double tol_geom() const { return tol_geom_; }

    // Edge i runs from vertex i to vertex i+1 (cyclic).
    std::pair<Vec2, Vec2> edge(int i) const { return {vertex(i), vertex(i + 1)}; }
    bool edge_mark_positive(int i) const { return index(i) % 2 == 0; }

    // Interior angle at vertex i, in (0, pi].
    double interior_angle(int i) const;
    bool is_flat_vertex(int i) const;
    bool strictly_convex() const;

    Vec2 centroid() const;

    int index(int i) const {
        int n = size();
        int r = i % n;
        return r < 0 ? r + n : r;
    }

  private:
    MarkedPolygon(std::vector<Vec2> v, double tol) : vertices_(std::move(v)), tol_geom_(tol) {}

    std::vector<Vec2> vertices_;
    double tol_geom_ = kDefaultTolGeom;
};

enum class DomainClass { General, Strip, InfiniteSpecial, HalfPlaneDegenerate };

const char* domain_class_name(DomainClass c);

// Turning-angle generator for the boundary of an unbounded convex unitary
// polygonal domain: a stored window of angles plus a tail rule on both sides.
struct AngleGenerator {
    enum class Tail { Zero, Geometric };

    std::vector<double> window;  // window[j] = angle at vertex start_index + j
    int start_index = 0;
    Tail tail = Tail::Zero;
    double tail_amplitude = 0.0; // first angle beyond each window end
    double tail_ratio = 0.5;     // in [0,1)

    double angle(int i) const;
    double total_turn() const;
    // Indices with angle > eps, searching the window plus enough of the tail.
    std::vector<int> positive_indices(double eps) const;
    bool tail_is_zero() const { return tail == Tail::Zero || tail_amplitude == 0.0; }
};

// Generator description of an unbounded convex domain whose boundary is a
// polygonal curve with unit edges. Vertex p_i and edge direction a_i are
// derived from the base vertex, the initial edge direction and the turning
// angles; the interior lies on the left of the oriented boundary.
struct UnboundedDomainSpec {
    Vec2 base_vertex{0.0, 0.0};
    Vec2 initial_direction{1.0, 0.0};
    AngleGenerator angles;
    double tol_geom = kDefaultTolGeom;

    // Throws Error for negative angles, angle >= pi, or total turn > pi.
    void validate() const;

    Vec2 edge_direction(int i) const; // direction of edge (p_i, p_{i+1}), unit
    Vec2 vertex(int i) const;

    // Limits of the edge directions as i -> +/- infinity.
    Vec2 direction_limit_pos() const;
    Vec2 direction_limit_neg() const;

    // Shifts indices so the angle at the new index 0 is positive, choosing the
    // admissible vertex closest to 0 (ties resolved toward nonnegative index).
    // Returns the shift that was applied.
    int normalize_base();
};

DomainClass classify_domain(const UnboundedDomainSpec& spec);

// True iff the polygon is a parallelogram with 2k unit edges (k >= 3),
// sides of length 1 and k-1, the long sides being chains of collinear
// unit edges.
bool is_special_bounded(const MarkedPolygon& poly);

struct ChordWitness {
    int from = -1;
    int to = -1;
    double length = 0.0;
};

// Checks that every chord joining two non-consecutive vertices of opposite
// parity is longer than 1. On failure returns a shortest violating chord.
std::pair<bool, std::optional<ChordWitness>> chord_criterion(const MarkedPolygon& poly);

struct SubpolygonWitness {
    std::vector<int> vertex_indices;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
};

// Exhaustively enumerates cyclic vertex subsets of size >= 3 and tests the
// solvability inequalities: 2*alpha < gamma and 2*beta < gamma for every
// strict subpolygon, alpha = beta for the full polygon, where alpha (beta)
// totals the subpolygon sides that are single +inf (-inf) edges and gamma is
// its perimeter. Polygons beyond max_vertices are refused.
std::pair<bool, std::optional<SubpolygonWitness>>
jenkins_serrin_bruteforce(const MarkedPolygon& poly, int max_vertices = 24);

enum class LengthOrdering { Less, Equal, Greater };

struct QuadrilateralComparison {
    LengthOrdering cd_versus_ab = LengthOrdering::Equal;
    bool is_parallelogram = false;
};

// For a convex quadrilateral ABCD with |BC| = |AD| and interior angles at A
// and B summing to at most pi, |CD| <= |AB| with equality exactly for
// parallelograms. Throws on precondition violation.
QuadrilateralComparison quadrilateral_compare(const Vec2& a, const Vec2& b, const Vec2& c,
                                              const Vec2& d, double tol_geom = kDefaultTolGeom);

// Bounded convex domain formed by the region cut off by the chord
// [p_{-n}, p_n] together with its image under the point symmetry about the
// chord midpoint; marks extend by the symmetry and keep alternating. The
// result has exactly 4n vertices and is never special.
MarkedPolygon build_exhaustion_domain(const UnboundedDomainSpec& spec, int n);

// Largest r0 = min(1, d/2) such that each disk D(p, r0) around a vertex p
// meets the boundary only along the two edges incident to p; d is the least
// vertex-to-non-incident-edge distance.
double inner_radius(const MarkedPolygon& poly);

// Canned constructors used by tests and sample specs.
MarkedPolygon make_unit_square(double tol_geom = kDefaultTolGeom);
// Vertex 0 at (1,0): edge 0 is the right vertical side, so the +inf marks sit
// on the vertical sides.
MarkedPolygon make_unit_square_vertical_plus(double tol_geom = kDefaultTolGeom);
// Parallelogram with 2k unit edges, sides 1 and k-1; slant is the angle of
// the short side against the long side.
MarkedPolygon make_special_polygon(int k, double slant = 1.5707963267948966,
                                   double tol_geom = kDefaultTolGeom);
MarkedPolygon make_regular_hexagon(double tol_geom = kDefaultTolGeom);
// theta_0 = pi/2, all other turning angles zero; boundary runs along both
// positive coordinate axes.
UnboundedDomainSpec make_right_angle_spec();
// theta_i = pi / 2^(|i|+2); total turn 3*pi/4.
UnboundedDomainSpec make_geometric_decay_spec();

} // namespace saddle
