#pragma once

#include <vector>

#include "ci/geometry.h"

namespace ci {

// maximal pieces of the mesh skeleton with the cells on either side (-1: none)
struct EdgeInterval {
    Vec2 a, b;
    int left = -1;
    int right = -1;
    double length() const { return norm(b - a); }
};

struct SkeletonStats {
    int overlaps = 0;  // a side covered twice
};

std::vector<EdgeInterval> mesh_skeleton(const std::vector<Triangle>& tris, double scale, SkeletonStats* stats = nullptr);

}  // namespace ci
