#pragma once

#include <cmath>
#include <limits>
#include <vector>

namespace saddle {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm2(const Vec2& a) { return dot(a, a); }
inline double norm(const Vec2& a) { return std::sqrt(norm2(a)); }
inline double dist(const Vec2& a, const Vec2& b) { return norm(a - b); }
inline Vec2 perp(const Vec2& a) { return {-a.y, a.x}; } // +90 degrees
inline Vec2 normalized(const Vec2& a) { double n = norm(a); return {a.x / n, a.y / n}; }
inline Vec2 rotated(const Vec2& a, double angle) {
    double c = std::cos(angle), s = std::sin(angle);
    return {c * a.x - s * a.y, s * a.x + c * a.y};
}

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }
};

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(a.x * a.x + a.y * a.y + a.z * a.z); }

// Twice the signed area of triangle (a,b,c); positive for counterclockwise order.
inline double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
    return cross(b - a, c - a);
}

inline double triangle_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * orient2d(a, b, c);
}

// Distance from p to the closed segment [a,b].
inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    Vec2 ab = b - a;
    double t = dot(p - a, ab);
    double l2 = norm2(ab);
    if (t <= 0.0 || l2 == 0.0) return dist(p, a);
    if (t >= l2) return dist(p, b);
    return dist(p, a + ab * (t / l2));
}

inline double polygon_signed_area(const std::vector<Vec2>& poly) {
    double a = 0.0;
    size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) a += cross(poly[i], poly[(i + 1) % n]);
    return 0.5 * a;
}

// Strictly inside test for a convex polygon in counterclockwise order.
// margin > 0 demands clearance from the boundary; margin < 0 admits a band outside.
inline bool point_in_convex(const Vec2& p, const std::vector<Vec2>& poly, double margin = 0.0) {
    size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        Vec2 a = poly[i], b = poly[(i + 1) % n];
        Vec2 e = b - a;
        double len = norm(e);
        if (cross(e, p - a) < margin * len) return false;
    }
    return true;
}

inline double dist_to_polygon_boundary(const Vec2& p, const std::vector<Vec2>& poly) {
    double d = std::numeric_limits<double>::infinity();
    size_t n = poly.size();
    for (size_t i = 0; i < n; ++i)
        d = std::min(d, point_segment_distance(p, poly[i], poly[(i + 1) % n]));
    return d;
}

} // namespace saddle
