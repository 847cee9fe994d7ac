// SPDX-License-Identifier: Apache-2.0
#include "caporch/geometry.hpp"

#include <cmath>
#include <numbers>

namespace caporch::geometry {

namespace {

double cross(Point o, Point a, Point b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

bool on_segment(Point p, Point q, Point r) {
    return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.y, q.y) <= r.y &&
           r.y <= std::max(p.y, q.y);
}

bool segments_touch(Point p1, Point p2, Point q1, Point q2) {
    const int d1 = sign(cross(q1, q2, p1));
    const int d2 = sign(cross(q1, q2, p2));
    const int d3 = sign(cross(p1, p2, q1));
    const int d4 = sign(cross(p1, p2, q2));
    if (d1 * d2 < 0 && d3 * d4 < 0) return true;
    if (d1 == 0 && on_segment(q1, q2, p1)) return true;
    if (d2 == 0 && on_segment(q1, q2, p2)) return true;
    if (d3 == 0 && on_segment(p1, p2, q1)) return true;
    if (d4 == 0 && on_segment(p1, p2, q2)) return true;
    return false;
}

}  // namespace

std::string_view to_string(GeometryErrorKind k) {
    switch (k) {
        case GeometryErrorKind::InvalidShape: return "InvalidShape";
        case GeometryErrorKind::SelfIntersectingPolygon: return "SelfIntersectingPolygon";
        case GeometryErrorKind::DegenerateLine: return "DegenerateLine";
    }
    return "?";
}

double point_distance(Point p, Point q) { return std::hypot(q.x - p.x, q.y - p.y); }

double shoelace_area(const std::vector<Point>& v) {
    double twice = 0.0;
    for (std::size_t i = 0, n = v.size(); i < n; ++i) {
        const Point& a = v[i];
        const Point& b = v[(i + 1) % n];
        twice += a.x * b.y - b.x * a.y;
    }
    return std::abs(twice) / 2.0;
}

bool is_simple(const std::vector<Point>& v) {
    const std::size_t n = v.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Point a1 = v[i];
        const Point a2 = v[(i + 1) % n];
        for (std::size_t j = i + 1; j < n; ++j) {
            const Point b1 = v[j];
            const Point b2 = v[(j + 1) % n];
            const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if (adjacent) {
                // Adjacent edges share one vertex; they must not fold back onto each other.
                const Point shared = (j == i + 1) ? a2 : a1;
                const Point other_a = (j == i + 1) ? a1 : a2;
                const Point other_b = (j == i + 1) ? b2 : b1;
                if (sign(cross(shared, other_a, other_b)) == 0) {
                    const double dot = (other_a.x - shared.x) * (other_b.x - shared.x) +
                                       (other_a.y - shared.y) * (other_b.y - shared.y);
                    if (dot > 0.0) return false;
                }
                continue;
            }
            if (segments_touch(a1, a2, b1, b2)) return false;
        }
    }
    return true;
}

Measure measure(const Shape2D& shape) {
    return std::visit(
        [](const auto& s) -> Measure {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Polygon>) {
                const auto& v = s.vertices;
                if (v.size() < 3) {
                    throw GeometryError(GeometryErrorKind::InvalidShape,
                                        "polygon needs at least 3 vertices");
                }
                for (std::size_t i = 0; i < v.size(); ++i) {
                    if (v[i] == v[(i + 1) % v.size()]) {
                        throw GeometryError(GeometryErrorKind::InvalidShape,
                                            "polygon has repeated consecutive vertices");
                    }
                }
                if (!is_simple(v)) {
                    throw GeometryError(GeometryErrorKind::SelfIntersectingPolygon,
                                        "polygon is self-intersecting");
                }
                double perimeter = 0.0;
                for (std::size_t i = 0; i < v.size(); ++i) {
                    perimeter += point_distance(v[i], v[(i + 1) % v.size()]);
                }
                return {shoelace_area(v), perimeter};
            } else if constexpr (std::is_same_v<T, Circle>) {
                if (!(s.radius > 0.0)) {
                    throw GeometryError(GeometryErrorKind::InvalidShape,
                                        "circle radius must be positive");
                }
                return {std::numbers::pi * s.radius * s.radius, 2.0 * std::numbers::pi * s.radius};
            } else {
                return {0.0, point_distance(s.p, s.q)};
            }
        },
        shape);
}

Point perpendicular_foot(Point a, Point b, Point p) {
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    if (len2 == 0.0) {
        throw GeometryError(GeometryErrorKind::DegenerateLine, "line endpoints coincide");
    }
    const double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
    return {a.x + t * dx, a.y + t * dy};
}

}  // namespace caporch::geometry
