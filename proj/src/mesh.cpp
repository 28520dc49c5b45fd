#include "ci/mesh.h"

#include <algorithm>
#include <cmath>

namespace ci {

namespace {

struct Edge {
    double theta;
    double c;
    double t0, t1;
    Vec2 a, b;
    int cell;
    int side;
    double len;
};

}  // namespace

std::vector<EdgeInterval> mesh_skeleton(const std::vector<Triangle>& tris, double scale, SkeletonStats* stats)
{
    const double tol_theta = 1e-9;
    const double tol_c = 1e-11 * scale;
    const double tol_t = 1e-12 * scale;
    std::vector<Edge> edges;
    edges.reserve(tris.size() * 3);
    for (int i = 0; i < static_cast<int>(tris.size()); ++i) {
        Triangle t = tris[i].ccw();
        for (int j = 0; j < 3; ++j) {
            Vec2 a = t[j], b = t[(j + 1) % 3];
            Vec2 d = b - a;
            double len = norm(d);
            if (len <= 0.0) continue;
            double th = std::atan2(d.y, d.x);
            int side = 1;  // cell on the left of the canonical direction
            if (th < 0.0) {
                th += M_PI;
                side = -1;
            }
            if (th >= M_PI - tol_theta) {
                th -= M_PI;
                side = -side;
            }
            edges.push_back({th, 0.0, 0.0, 0.0, a, b, i, side, len});
        }
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) { return x.theta < y.theta; });

    std::vector<EdgeInterval> out;
    out.reserve(edges.size());
    SkeletonStats st;
    std::size_t g0 = 0;
    while (g0 < edges.size()) {
        std::size_t g1 = g0 + 1;
        while (g1 < edges.size() && edges[g1].theta - edges[g1 - 1].theta <= tol_theta) ++g1;
        // group direction from the longest edge
        std::size_t il = g0;
        for (std::size_t k = g0; k < g1; ++k)
            if (edges[k].len > edges[il].len) il = k;
        double th = edges[il].theta;
        Vec2 d{std::cos(th), std::sin(th)};
        for (std::size_t k = g0; k < g1; ++k) {
            Edge& e = edges[k];
            Vec2 m = 0.5 * (e.a + e.b);
            e.c = cross(d, m);
            double ta = dot(d, e.a), tb = dot(d, e.b);
            e.t0 = std::min(ta, tb);
            e.t1 = std::max(ta, tb);
        }
        std::sort(edges.begin() + g0, edges.begin() + g1, [](const Edge& x, const Edge& y) { return x.c < y.c; });
        std::size_t l0 = g0;
        while (l0 < g1) {
            std::size_t l1 = l0 + 1;
            while (l1 < g1 && edges[l1].c - edges[l1 - 1].c <= tol_c) ++l1;
            double c = 0.0;
            for (std::size_t k = l0; k < l1; ++k) c += edges[k].c;
            c /= static_cast<double>(l1 - l0);
            std::vector<double> bp;
            bp.reserve(2 * (l1 - l0));
            for (std::size_t k = l0; k < l1; ++k) {
                bp.push_back(edges[k].t0);
                bp.push_back(edges[k].t1);
            }
            std::sort(bp.begin(), bp.end());
            std::vector<double> pts;
            for (double t : bp)
                if (pts.empty() || t - pts.back() > tol_t) pts.push_back(t);
            std::sort(edges.begin() + l0, edges.begin() + l1, [](const Edge& x, const Edge& y) { return x.t0 < y.t0; });
            std::vector<std::size_t> active;
            std::size_t next = l0;
            Vec2 nrm = perp(d);
            for (std::size_t p = 0; p + 1 < pts.size(); ++p) {
                double ta = pts[p], tb = pts[p + 1];
                while (next < l1 && edges[next].t0 <= ta + tol_t) active.push_back(next++);
                int left = -1, right = -1;
                std::size_t w = 0;
                for (std::size_t k = 0; k < active.size(); ++k) {
                    const Edge& e = edges[active[k]];
                    if (e.t1 < tb - tol_t) continue;  // ended
                    active[w++] = active[k];
                    if (e.side > 0) {
                        if (left >= 0) ++st.overlaps;
                        left = e.cell;
                    } else {
                        if (right >= 0) ++st.overlaps;
                        right = e.cell;
                    }
                }
                active.resize(w);
                if (left < 0 && right < 0) continue;
                out.push_back({ta * d + c * nrm, tb * d + c * nrm, left, right});
            }
            l0 = l1;
        }
        g0 = g1;
    }
    if (stats) *stats = st;
    return out;
}

}  // namespace ci
