#pragma once
// Planar vector primitive used everywhere: sensor positions, target state,
// separator normals. Double precision, value semantics.

#include <cmath>
#include <stdexcept>

namespace bsn {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(const Vec2& r) const { return {x + r.x, y + r.y}; }
    constexpr Vec2 operator-(const Vec2& r) const { return {x - r.x, y - r.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    friend constexpr Vec2 operator*(double s, const Vec2& v) { return {v.x * s, v.y * s}; }

    Vec2& operator+=(const Vec2& r) { x += r.x; y += r.y; return *this; }
    Vec2& operator-=(const Vec2& r) { x -= r.x; y -= r.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

    constexpr double dot(const Vec2& r) const { return x * r.x + y * r.y; }
    // z-component of the 3D cross product; >0 when r is counter-clockwise from *this.
    constexpr double cross(const Vec2& r) const { return x * r.y - y * r.x; }

    double norm() const { return std::hypot(x, y); }
    constexpr double norm_sq() const { return x * x + y * y; }

    bool finite() const { return std::isfinite(x) && std::isfinite(y); }

    // Rotation by +90 degrees.
    constexpr Vec2 perp() const { return {-y, x}; }

    Vec2 normalized() const {
        const double n = norm();
        if (n <= 0.0 || !std::isfinite(n))
            throw std::invalid_argument("Vec2::normalized: zero or non-finite vector");
        return {x / n, y / n};
    }
};

inline double dot(const Vec2& a, const Vec2& b) { return a.dot(b); }
inline double cross(const Vec2& a, const Vec2& b) { return a.cross(b); }

inline Vec2 from_angle(double radians) { return {std::cos(radians), std::sin(radians)}; }

// Absolute angular separation in [0, pi]. Orientation matters: a vector and
// its negation are a full pi apart.
inline double angle_between(const Vec2& a, const Vec2& b) {
    return std::atan2(std::abs(a.cross(b)), a.dot(b));
}

inline void require_finite(const Vec2& v, const char* what) {
    if (!v.finite()) throw std::invalid_argument(std::string(what) + ": non-finite vector");
}

} // namespace bsn
