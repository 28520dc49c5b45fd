#include "ci/geometry.h"

#include <algorithm>

namespace ci {

bool triangle_contains(const Triangle& t, Vec2 p, double slack)
{
    double a = t.signed_area();
    if (a == 0.0) return false;
    double s = a > 0.0 ? 1.0 : -1.0;
    double tol = slack * std::abs(a) * 2.0;
    double w0 = s * cross(t.v1 - t.v0, p - t.v0);
    double w1 = s * cross(t.v2 - t.v1, p - t.v1);
    double w2 = s * cross(t.v0 - t.v2, p - t.v2);
    return w0 >= -tol && w1 >= -tol && w2 >= -tol;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b)
{
    Vec2 d = b - a;
    double l2 = dot(d, d);
    double t = l2 > 0.0 ? std::clamp(dot(p - a, d) / l2, 0.0, 1.0) : 0.0;
    return norm(p - (a + t * d));
}

}  // namespace ci
