#pragma once
// Convex separability diagnostics for a labeled snapshot.
//
// hulls_disjoint builds both convex hulls (monotone chain) and tests
// disjointness with a separating-axis sweep over the edge normals of both
// hulls; degenerate hulls (point, segment) get their missing axes added.
// The independent O(n^2) segment-intersection route lives in test code.
//
// Orientation predicates use an absolute tolerance eps_geo on cross products;
// field scales are O(1e2) m, so doubles leave ample headroom. Overlap within
// eps_geo counts as touching, not intersecting.

#include <algorithm>
#include <vector>

#include "bsn/field.hpp"
#include "bsn/observe.hpp"
#include "bsn/vec2.hpp"

namespace bsn {

inline constexpr double kEpsGeo = 1e-9;

// Convex hull via monotone chain, counter-clockwise, no repeated last point.
// 0, 1 and 2 input points come back as-is (deduplicated); collinear input
// collapses to its extreme segment.
inline std::vector<Vec2> convex_hull(std::vector<Vec2> pts, double eps = kEpsGeo) {
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [eps](const Vec2& a, const Vec2& b) {
                              return (a - b).norm() <= eps;
                          }),
              pts.end());
    const std::size_t n = pts.size();
    if (n <= 2) return pts;

    std::vector<Vec2> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) { // lower
        while (k >= 2 && (hull[k - 1] - hull[k - 2]).cross(pts[i] - hull[k - 2]) <= eps) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = n - 1, t = k + 1; i-- > 0;) { // upper
        while (k >= t && (hull[k - 1] - hull[k - 2]).cross(pts[i] - hull[k - 2]) <= eps) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

namespace detail {

struct Interval {
    double lo, hi;
};

inline Interval project_hull(const std::vector<Vec2>& hull, const Vec2& axis) {
    Interval iv{std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity()};
    for (const auto& p : hull) {
        const double d = p.dot(axis);
        iv.lo = std::min(iv.lo, d);
        iv.hi = std::max(iv.hi, d);
    }
    return iv;
}

inline void collect_axes(const std::vector<Vec2>& hull, std::vector<Vec2>& axes) {
    const std::size_t n = hull.size();
    if (n < 2) return;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 edge = hull[(i + 1) % n] - hull[i];
        if (edge.norm() <= kEpsGeo) continue;
        axes.push_back(edge.perp().normalized());
        if (n == 2) axes.push_back(edge.normalized()); // segment needs its own axis too
    }
}

} // namespace detail

// Separating-axis test for two convex hulls. Touching within eps is disjoint.
inline bool hulls_disjoint(const std::vector<Vec2>& a, const std::vector<Vec2>& b,
                           double eps = kEpsGeo) {
    if (a.empty() || b.empty()) return true;
    if (a.size() == 1 && b.size() == 1) return (a[0] - b[0]).norm() > eps;

    std::vector<Vec2> axes;
    detail::collect_axes(a, axes);
    detail::collect_axes(b, axes);
    for (const auto& axis : axes) {
        const auto ia = detail::project_hull(a, axis);
        const auto ib = detail::project_hull(b, axis);
        if (ia.hi <= ib.lo + eps || ib.hi <= ia.lo + eps) return true;
    }
    return false;
}

// Point containment in a convex hull (boundary within eps counts as inside).
inline bool point_in_hull(const Vec2& p, const std::vector<Vec2>& hull, double eps = kEpsGeo) {
    const std::size_t n = hull.size();
    if (n == 0) return false;
    if (n == 1) return (p - hull[0]).norm() <= eps;
    if (n == 2) {
        const Vec2 d = hull[1] - hull[0];
        const double len_sq = d.norm_sq();
        if (std::abs((p - hull[0]).cross(d)) > eps * std::max(1.0, std::sqrt(len_sq)))
            return false;
        const double t = (p - hull[0]).dot(d);
        return t >= -eps && t <= len_sq + eps;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 edge = hull[(i + 1) % n] - hull[i];
        if (edge.cross(p - hull[i]) < -eps) return false; // hull is CCW
    }
    return true;
}

struct SeparabilityReport {
    bool hulls_disjoint = false;
    bool target_excluded = false;
};

// Separability check: the "+" and "-" sensor hulls must be disjoint and the
// target must lie in neither.
inline SeparabilityReport separability_check(const SensorField& field,
                                             const std::vector<SignReport>& reports,
                                             const Vec2& target_position) {
    std::vector<Vec2> plus, minus;
    for (const auto& r : reports) {
        const Vec2& s = field.sensor(r.sensor_index);
        (r.sign == 1 ? plus : minus).push_back(s);
    }
    const auto hull_plus = convex_hull(std::move(plus));
    const auto hull_minus = convex_hull(std::move(minus));

    SeparabilityReport rep;
    rep.hulls_disjoint = hulls_disjoint(hull_plus, hull_minus);
    rep.target_excluded = !point_in_hull(target_position, hull_plus) &&
                          !point_in_hull(target_position, hull_minus);
    return rep;
}

} // namespace bsn
