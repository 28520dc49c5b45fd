#pragma once

#include <array>
#include <vector>

#include "ci/mat2.h"

namespace ci {

struct Triangle {
    Vec2 v0, v1, v2;

    double signed_area() const { return 0.5 * cross(v1 - v0, v2 - v0); }
    double area() const { return std::abs(signed_area()); }
    double perimeter() const { return norm(v1 - v0) + norm(v2 - v1) + norm(v0 - v2); }
    Vec2 centroid() const { return (1.0 / 3.0) * (v0 + v1 + v2); }
    const Vec2& operator[](int i) const { return i == 0 ? v0 : (i == 1 ? v1 : v2); }
    Vec2& operator[](int i) { return i == 0 ? v0 : (i == 1 ? v1 : v2); }
    // counterclockwise copy
    Triangle ccw() const { return signed_area() >= 0.0 ? *this : Triangle{v0, v2, v1}; }
    double diameter() const { return std::max({norm(v1 - v0), norm(v2 - v1), norm(v0 - v2)}); }
};

// affine map x -> G x + o
struct Affine {
    Mat2 G = Mat2::identity();
    Vec2 o;
    Vec2 operator()(Vec2 x) const { return G * x + o; }
};

// offset so that x -> G x + o agrees with `parent` at the point p
inline Vec2 offset_matching(const Mat2& G, const Affine& parent, Vec2 p) { return parent(p) - G * p; }

// point in closed triangle with relative slack
bool triangle_contains(const Triangle& t, Vec2 p, double slack = 1e-12);

// distance of p to segment ab
double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

}  // namespace ci
