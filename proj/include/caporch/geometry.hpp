// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <variant>
#include <vector>

#include "caporch/error.hpp"

namespace caporch::geometry {

struct Point {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point&) const = default;
};

struct Polygon {
    std::vector<Point> vertices;
};

struct Circle {
    Point center;
    double radius = 0.0;
};

struct LineSegment {
    Point p;
    Point q;
};

using Shape2D = std::variant<Polygon, Circle, LineSegment>;

struct Measure {
    double area = 0.0;
    double perimeter = 0.0;
};

enum class GeometryErrorKind { InvalidShape, SelfIntersectingPolygon, DegenerateLine };
std::string_view to_string(GeometryErrorKind k);
using GeometryError = KindedError<GeometryErrorKind>;

double point_distance(Point p, Point q);

// Absolute shoelace area (no simplicity check).
double shoelace_area(const std::vector<Point>& vertices);

// True when no two non-adjacent edges touch and adjacent edges meet only at
// their shared vertex.
bool is_simple(const std::vector<Point>& vertices);

// Throws InvalidShape (fewer than 3 vertices, repeated consecutive vertex,
// non-positive radius) or SelfIntersectingPolygon.
Measure measure(const Shape2D& shape);

// Foot of the perpendicular from `p` to the infinite line through `a` and `b`.
// Throws DegenerateLine when a == b.
Point perpendicular_foot(Point a, Point b, Point p);

}  // namespace caporch::geometry
