#include "ci/covering.h"

#include <algorithm>

#include "ci/inapprox.h"

namespace ci {

namespace {

struct Builder {
    CoverResult& out;
    const Affine& parent;
    const Gadget& g;
    double min_area;
    bool count_only = false;
    std::size_t count = 0;

    void leftover(Vec2 a, Vec2 b, Vec2 c, ChildKind kind)
    {
        Triangle t = Triangle{a, b, c}.ccw();
        if (t.area() <= min_area) return;
        ++count;
        if (count_only) return;
        CoverChild ch;
        ch.tri = t;
        ch.grad = parent.G;
        ch.offset = parent.o;
        ch.kind = kind;
        out.children.push_back(ch);
    }

    void diamond(Vec2 center, double scale)
    {
        count += 10;
        if (count_only) {
            ++out.diamonds;
            return;
        }
        auto pieces = place_cell(*g.cell, center, scale, parent);
        for (int i = 0; i < 10; ++i) {
            CoverChild ch;
            ch.tri = pieces[i].tri;
            ch.grad = pieces[i].grad;
            ch.offset = pieces[i].offset;
            ch.kind = ChildKind::good;
            ch.region = pieces[i].region;
            ch.star = g.star ? (*g.star)[i] : false;
            out.children.push_back(ch);
        }
        ++out.diamonds;
    }
};

void finish(CoverResult& r)
{
    r.perimeter_good = r.perimeter_rest_iso = r.perimeter_rest_generic = r.good_area = 0.0;
    for (const CoverChild& c : r.children) {
        double p = c.tri.perimeter();
        if (c.kind == ChildKind::good) {
            r.perimeter_good += p;
            r.good_area += c.tri.area();
        } else if (c.kind == ChildKind::iso) {
            r.perimeter_rest_iso += p;
        } else {
            r.perimeter_rest_generic += p;
        }
    }
}

void rectangle_into(Builder& b, Vec2 c, double r, int n)
{
    const Mat2 R = b.g.R();
    const double h = b.g.h();
    auto P = [&](double z1, double z2) { return c + R * Vec2{z1 * r, z2 * r}; };
    for (int i = 0; i < n; ++i) b.diamond(P((i + 0.5) * h, 0.5), 0.5 * r);
    for (int i = 0; i + 1 < n; ++i) {
        b.leftover(P((i + 0.5) * h, 1.0), P((i + 1) * h, 0.5), P((i + 1.5) * h, 1.0), ChildKind::iso);
        b.leftover(P((i + 0.5) * h, 0.0), P((i + 1.5) * h, 0.0), P((i + 1) * h, 0.5), ChildKind::iso);
    }
    b.leftover(P(0.0, 0.0), P(0.5 * h, 0.0), P(0.0, 0.5), ChildKind::generic);
    b.leftover(P(0.0, 0.5), P(0.5 * h, 1.0), P(0.0, 1.0), ChildKind::generic);
    double e = n * h;
    b.leftover(P(e - 0.5 * h, 0.0), P(e, 0.0), P(e, 0.5), ChildKind::generic);
    b.leftover(P(e, 0.5), P(e, 1.0), P(e - 0.5 * h, 1.0), ChildKind::generic);
}

void quad_into(Builder& b, Vec2 p0, Vec2 p1, Vec2 p2, Vec2 p3)
{
    b.leftover(p0, p1, p2, ChildKind::generic);
    b.leftover(p0, p2, p3, ChildKind::generic);
}

// square o + [0,a] u + [0,a] w
void square_into(Builder& b, Vec2 o, Vec2 u, Vec2 w, double a)
{
    const Mat2 R = b.g.R();
    const double h = b.g.h();
    Vec2 e1 = R.col1();
    double ct = dot(u, e1), st = cross(u, e1);
    double r = 1.0 / (std::abs(ct) + std::abs(st));
    double l = r * a;
    Vec2 cs = o + (0.5 * a) * (u + w);
    std::array<Vec2, 4> inner = {cs + R * Vec2{-0.5 * l, -0.5 * l}, cs + R * Vec2{0.5 * l, -0.5 * l},
                                 cs + R * Vec2{0.5 * l, 0.5 * l}, cs + R * Vec2{-0.5 * l, 0.5 * l}};
    std::array<Vec2, 4> outer = {o, o + a * u, o + a * u + a * w, o + a * w};
    for (int i = 0; i < 4; ++i) {
        Vec2 p = inner[i], q = inner[(i + 1) % 4];
        int best = -1;
        double bd = 0.0;
        for (int j = 0; j < 4; ++j) {
            double d = -cross(q - p, outer[j] - p);
            if (d > bd) {
                bd = d;
                best = j;
            }
        }
        if (best >= 0) b.leftover(p, outer[best], q, ChildKind::generic);
    }
    int n = static_cast<int>(std::floor(1.0 / h + 1e-12));
    n = std::max(n, 1);
    rectangle_into(b, inner[0], l, n);
    double used = n * h;
    if (used < 1.0) {
        auto P = [&](double z1, double z2) { return inner[0] + R * Vec2{z1 * l, z2 * l}; };
        quad_into(b, P(used, 0.0), P(1.0, 0.0), P(1.0, 1.0), P(used, 1.0));
    }
    ++b.out.squares;
}

// right angle at o, legs to p1 and p2
void right_into(Builder& b, Vec2 o, Vec2 p1, Vec2 p2)
{
    Vec2 e = p1 - o, f = p2 - o;
    double le = norm(e), lf = norm(f);
    Vec2 me = o + 0.5 * e, mf = o + 0.5 * f, mc = o + 0.5 * (e + f);
    b.leftover(me, p1, mc, ChildKind::generic);
    b.leftover(mf, mc, p2, ChildKind::generic);
    Vec2 us = le <= lf ? (1.0 / le) * e : (1.0 / lf) * f;
    Vec2 ul = le <= lf ? (1.0 / lf) * f : (1.0 / le) * e;
    double l1 = std::min(le, lf), l2 = std::max(le, lf);
    double a = 0.5 * l1;
    int m = static_cast<int>(std::floor(l2 / l1 + 1e-12));
    for (int j = 0; j < m; ++j) square_into(b, o + (j * a) * ul, ul, us, a);
    double rest = 0.5 * l2 - m * a;
    if (rest > 1e-14 * l2) {
        Vec2 s0 = o + (m * a) * ul;
        quad_into(b, s0, s0 + rest * ul, s0 + rest * ul + a * us, s0 + a * us);
    }
}

}  // namespace

IsoscelesTag isosceles_tag(const Triangle& t, const Mat2& R, double h, double tol)
{
    IsoscelesTag tag;
    tag.rotation = R;
    tag.h = h;
    Vec2 e1 = R.col1();
    for (int i = 0; i < 3; ++i) {
        Vec2 a = t[i], b = t[(i + 1) % 3], p = t[(i + 2) % 3];
        Vec2 base = b - a;
        double lb = norm(base);
        if (lb <= 0.0) continue;
        if (std::abs(cross(base, e1)) > tol * lb) continue;
        Vec2 mid = 0.5 * (a + b);
        Vec2 ax = p - mid;
        if (std::abs(dot(ax, e1)) > tol * lb) continue;
        double height = std::abs(cross(e1, ax));
        if (std::abs(height * h - 0.5 * lb) <= tol * lb) {
            tag.member = true;
            return tag;
        }
    }
    return tag;
}

static void isosceles_into(Builder& b, const Triangle& T)
{
    Vec2 e1 = b.g.R().col1();
    for (int i = 0; i < 3; ++i) {
        Vec2 a = T[i], c = T[(i + 1) % 3], p = T[(i + 2) % 3];
        Vec2 base = c - a;
        double lb = norm(base);
        if (std::abs(cross(base, e1)) > 1e-9 * lb) continue;
        Vec2 mid = 0.5 * (a + c);
        if (std::abs(dot(p - mid, e1)) > 1e-9 * lb) continue;
        double s = norm(p - mid);
        b.diamond(0.5 * (mid + p), 0.5 * s);
        b.leftover(a, mid, 0.5 * (a + p), ChildKind::iso);
        b.leftover(mid, c, 0.5 * (c + p), ChildKind::iso);
        break;
    }
}

CoverResult cover_isosceles(const Triangle& T, const Affine& parent, const Gadget& g)
{
    IsoscelesTag tag = isosceles_tag(T, g.R(), g.h());
    if (!tag.member) throw Error(ErrorCode::wrong_coverer, "cover_isosceles: triangle not in the isosceles class");
    CoverResult r;
    r.parent_area = T.area();
    r.parent_perimeter = T.perimeter();
    Builder b{r, parent, g, 1e-14 * r.parent_area};
    isosceles_into(b, T);
    finish(r);
    return r;
}

CoverResult cover_rectangle(Vec2 corner, double r, int n, const Affine& parent, const Gadget& g)
{
    if (n < 1 || n * g.h() > 1.0 + 1e-12) throw Error(ErrorCode::invalid_box, "cover_rectangle: need 1 <= n <= 1/h");
    CoverResult res;
    res.parent_area = n * g.h() * r * r;
    res.parent_perimeter = 2.0 * (n * g.h() * r + r);
    Builder b{res, parent, g, 1e-14 * res.parent_area};
    rectangle_into(b, corner, r, n);
    finish(res);
    return res;
}

static void generic_into(Builder& b, const Triangle& T)
{
    int il = 0;
    double best = -1.0;
    for (int i = 0; i < 3; ++i) {
        double l = norm(T[(i + 1) % 3] - T[i]);
        if (l > best) {
            best = l;
            il = i;
        }
    }
    Vec2 p = T[il], q = T[(il + 1) % 3], o = T[(il + 2) % 3];
    double c = dot(p - o, q - o);
    if (std::abs(c) <= 1e-9 * norm(p - o) * norm(q - o)) {
        right_into(b, o, p, q);
    } else {
        Vec2 d = q - p;
        Vec2 f = p + (dot(o - p, d) / dot(d, d)) * d;
        right_into(b, f, p, o);
        right_into(b, f, o, q);
    }
}

CoverResult cover_generic(const Triangle& T, const Affine& parent, const Gadget& g)
{
    CoverResult r;
    r.parent_area = T.area();
    r.parent_perimeter = T.perimeter();
    Builder b{r, parent, g, 1e-14 * r.parent_area};
    generic_into(b, T);
    finish(r);
    return r;
}

CoverResult cover_auto(const Triangle& T, const Affine& parent, const Gadget& g)
{
    if (isosceles_tag(T, g.R(), g.h()).member) return cover_isosceles(T, parent, g);
    return cover_generic(T, parent, g);
}

std::size_t cover_child_count(const Triangle& T, const Gadget& g)
{
    CoverResult r;
    Affine id;
    Builder b{r, id, g, 1e-14 * T.area()};
    b.count_only = true;
    if (isosceles_tag(T, g.R(), g.h()).member)
        isosceles_into(b, T);
    else
        generic_into(b, T);
    return b.count;
}

ReplacementCell gadget_for(const Mat2& M, const CoverRequest& req)
{
    if (req.rule == StageRule::A3) return replace_low_stage(M, req.delta);
    return replace_dyadic_stage(M, req.delta, req.h0);
}

CoverResult cover_generic(const Triangle& T, const Mat2& M, const CoverRequest& req)
{
    ReplacementCell rc = gadget_for(M, req);
    Gadget g{&rc.cell, &rc.star};
    return cover_generic(T, Affine{M, {}}, g);
}

CoverResult cover_isosceles(const Triangle& T, const Mat2& M, const CoverRequest& req)
{
    ReplacementCell rc = gadget_for(M, req);
    Gadget g{&rc.cell, &rc.star};
    return cover_isosceles(T, Affine{M, {}}, g);
}

PerimeterLedger perimeter_ledger(const CoverResult& r, double h)
{
    PerimeterLedger l;
    for (const CoverChild& c : r.children) {
        double p = c.tri.perimeter();
        if (c.kind == ChildKind::good)
            l.sum_good += p;
        else if (c.kind == ChildKind::iso)
            l.sum_iso += p;
        else
            l.sum_generic += p;
    }
    double per = r.parent_perimeter;
    l.iso_bound_ok = l.sum_iso <= cover_C0(h) * per;
    l.generic_bound_ok = l.sum_generic <= kC2 * per;
    l.total_bound_ok = l.sum_good + l.sum_iso + l.sum_generic <= kC2 * per;
    return l;
}

CoverCheck check_cover(const Triangle& T, const Affine& parent, const CoverResult& r, int samples_per_edge)
{
    CoverCheck ck;
    double sum = 0.0;
    for (const CoverChild& c : r.children) sum += c.tri.area();
    ck.area_error = std::abs(sum - T.area());
    double scale = T.diameter();
    for (int e = 0; e < 3; ++e) {
        for (int s = 0; s <= samples_per_edge; ++s) {
            double t = static_cast<double>(s) / samples_per_edge;
            Vec2 x = (1.0 - t) * T[e] + t * T[(e + 1) % 3];
            Vec2 ref = parent(x);
            for (const CoverChild& c : r.children) {
                bool on = false;
                for (int k = 0; k < 3 && !on; ++k)
                    on = point_segment_distance(x, c.tri[k], c.tri[(k + 1) % 3]) <= 1e-12 * scale;
                if (!on) continue;
                ck.trace_error = std::max(ck.trace_error, norm(c.grad * x + c.offset - ref));
            }
        }
    }
    return ck;
}

}  // namespace ci
