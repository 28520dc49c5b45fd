#include "ci/analysis.h"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "ci/inapprox.h"
#include "ci/mesh.h"

namespace ci {

const char* field_name(Field f)
{
    switch (f) {
    case Field::chi1: return "chi1";
    case Field::chi2: return "chi2";
    case Field::grad: return "grad";
    case Field::g11: return "g11";
    case Field::g12: return "g12";
    case Field::g21: return "g21";
    case Field::g22: return "g22";
    }
    return "?";
}

Field parse_field(const std::string& s)
{
    for (Field f : {Field::chi1, Field::chi2, Field::grad, Field::g11, Field::g12, Field::g21, Field::g22})
        if (s == field_name(f)) return f;
    throw Error(ErrorCode::invalid_parameter, "unknown field '" + s + "'");
}

namespace {

int dim_of(Field f) { return f == Field::grad ? 4 : 1; }

void values_of(const CellState& c, Field f, double delta, double* out)
{
    switch (f) {
    case Field::chi1: out[0] = nearer_well(c.grad, delta) == 1 ? 1.0 : 0.0; return;
    case Field::chi2: out[0] = nearer_well(c.grad, delta) == 1 ? 0.0 : 1.0; return;
    case Field::grad:
        out[0] = c.grad.a11;
        out[1] = c.grad.a12;
        out[2] = c.grad.a21;
        out[3] = c.grad.a22;
        return;
    case Field::g11: out[0] = c.grad.a11; return;
    case Field::g12: out[0] = c.grad.a12; return;
    case Field::g21: out[0] = c.grad.a21; return;
    case Field::g22: out[0] = c.grad.a22; return;
    }
}

double domain_scale(const IterationState& s)
{
    double d = 0.0;
    for (const Triangle& t : s.domain) d = std::max(d, t.diameter());
    return d > 0.0 ? d : 1.0;
}

PiecewiseField field_of(const IterationState& s, Field f)
{
    PiecewiseField pf;
    pf.dim = dim_of(f);
    pf.scale = domain_scale(s);
    pf.tris.resize(s.cells.size());
    pf.values.resize(s.cells.size() * pf.dim);
    for (std::size_t i = 0; i < s.cells.size(); ++i) {
        pf.tris[i] = s.cells[i].tri;
        values_of(s.cells[i], f, s.delta, &pf.values[i * pf.dim]);
    }
    return pf;
}

// index in prev of the cell each next cell came from
std::vector<std::size_t> ancestry(const IterationState& prev, const IterationState& next)
{
    std::unordered_map<std::int64_t, std::size_t> at;
    at.reserve(prev.cells.size() * 2);
    for (std::size_t i = 0; i < prev.cells.size(); ++i) at[prev.cells[i].id] = i;
    std::vector<std::size_t> src(next.cells.size());
    for (std::size_t i = 0; i < next.cells.size(); ++i) {
        const CellState& c = next.cells[i];
        auto it = at.find(c.id);
        if (it == at.end()) it = at.find(c.parent);
        if (it == at.end())
            throw Error(ErrorCode::invalid_pair, "cell " + std::to_string(c.id) + " has no ancestor in the earlier state");
        src[i] = it->second;
    }
    return src;
}

}  // namespace

double field_value(const CellState& c, Field f, double delta)
{
    if (f == Field::grad) return c.grad.frob();
    double v = 0.0;
    values_of(c, f, delta, &v);
    return v;
}

double field_distance(const CellState& a, const CellState& b, Field f, double delta)
{
    double va[4], vb[4];
    values_of(a, f, delta, va);
    values_of(b, f, delta, vb);
    double s = 0.0;
    for (int k = 0; k < dim_of(f); ++k) s += (va[k] - vb[k]) * (va[k] - vb[k]);
    return std::sqrt(s);
}

double PiecewiseField::norm_at(std::size_t i) const
{
    double s = 0.0;
    for (int k = 0; k < dim; ++k) s += values[i * dim + k] * values[i * dim + k];
    return std::sqrt(s);
}

double PiecewiseField::jump(std::size_t i, std::size_t j) const
{
    double s = 0.0;
    for (int k = 0; k < dim; ++k) {
        double d = values[i * dim + k] - values[j * dim + k];
        s += d * d;
    }
    return std::sqrt(s);
}

double l1_norm(const PiecewiseField& f)
{
    double s = 0.0;
    for (std::size_t i = 0; i < f.tris.size(); ++i) s += f.tris[i].area() * f.norm_at(i);
    return s;
}

double linf_norm(const PiecewiseField& f)
{
    double m = 0.0;
    for (std::size_t i = 0; i < f.tris.size(); ++i) m = std::max(m, f.norm_at(i));
    return m;
}

double bv_seminorm(const PiecewiseField& f, bool with_boundary)
{
    double s = 0.0;
    for (const EdgeInterval& e : mesh_skeleton(f.tris, f.scale)) {
        if (e.left >= 0 && e.right >= 0)
            s += e.length() * f.jump(e.left, e.right);
        else if (with_boundary)
            s += e.length() * f.norm_at(e.left >= 0 ? e.left : e.right);
    }
    return s;
}

double l1_diff(const IterationState& prev, const IterationState& next, Field f)
{
    std::vector<std::size_t> src = ancestry(prev, next);
    double s = 0.0;
    for (std::size_t i = 0; i < next.cells.size(); ++i)
        s += next.cells[i].tri.area() * field_distance(next.cells[i], prev.cells[src[i]], f, next.delta);
    return s;
}

double bv_seminorm(const IterationState& s, Field f) { return bv_seminorm(field_of(s, f), false); }

DiffStats step_difference(const IterationState& prev, const IterationState& next, Field f)
{
    std::vector<std::size_t> src = ancestry(prev, next);
    PiecewiseField pf;
    pf.dim = dim_of(f);
    pf.scale = domain_scale(next);
    pf.tris.resize(next.cells.size());
    pf.values.resize(next.cells.size() * pf.dim);
    for (std::size_t i = 0; i < next.cells.size(); ++i) {
        pf.tris[i] = next.cells[i].tri;
        double a[4], b[4];
        values_of(next.cells[i], f, next.delta, a);
        values_of(prev.cells[src[i]], f, next.delta, b);
        for (int k = 0; k < pf.dim; ++k) pf.values[i * pf.dim + k] = a[k] - b[k];
    }
    return {l1_norm(pf), linf_norm(pf), bv_seminorm(pf, true)};
}

double wsp_interpolated_norm(double linf, double l1, double bv, double s, double p)
{
    if (!(s > 0.0) || !(p > 1.0) || !std::isfinite(p))
        throw Error(ErrorCode::out_of_range, "wsp_interpolated_norm: need s > 0, p in (1,inf)");
    double sp = s * p;
    if (sp >= 1.0) throw Error(ErrorCode::out_of_range, "wsp_interpolated_norm: s*p must be < 1");
    if (linf == 0.0 || l1 == 0.0) return 0.0;
    return std::pow(linf, 1.0 - 1.0 / p) * std::pow(std::pow(l1, 1.0 - sp) * std::pow(bv, sp), 1.0 / p);
}

double wsp_interpolated_norm(const DiffStats& d, double s, double p)
{
    return wsp_interpolated_norm(d.linf, d.l1, d.bv, s, p);
}

double solve_theta0(double c_tilde, double growth)
{
    if (!(c_tilde > 0.0 && c_tilde < 1.0)) throw Error(ErrorCode::out_of_range, "solve_theta0: c_tilde must lie in (0,1)");
    if (!(growth > 1.0)) throw Error(ErrorCode::out_of_range, "solve_theta0: growth must exceed 1");
    double a = std::log(1.0 / c_tilde);
    return a / (std::log(growth) + a);
}

double alpha_of(double c_tilde, double growth, double s, double p)
{
    double sp = s * p;
    return -((1.0 - sp) * std::log2(c_tilde) + sp * std::log2(growth)) / p;
}

GeometricFit fit_geometric(const std::vector<double>& series, int lo, int hi)
{
    GeometricFit g;
    if (lo < 0 || hi >= static_cast<int>(series.size()) || hi - lo + 1 < 3)
        throw Error(ErrorCode::out_of_range, "fit_geometric: window must hold at least 3 entries");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    int n = 0;
    for (int i = lo; i <= hi; ++i) {
        double v = series[i];
        if (!(v > 0.0) || !std::isfinite(v)) {
            g.skipped_nonpositive = true;
            continue;
        }
        double x = i, y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        ++n;
    }
    g.used = n;
    if (n < 2) return g;
    double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
    double slope = cxy / vx;
    double icpt = (sy - slope * sx) / n;
    g.rate = std::exp(slope);
    g.amplitude = std::exp(icpt);
    g.r_squared = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
    g.ok = n >= 3;
    return g;
}

GeometricFit fit_geometric(const std::vector<double>& series)
{
    return fit_geometric(series, 0, static_cast<int>(series.size()) - 1);
}

std::vector<Segment> interface_segments(const IterationState& s)
{
    std::vector<unsigned char> ch = chi(s, 1);
    std::vector<Triangle> tris(s.cells.size());
    for (std::size_t i = 0; i < s.cells.size(); ++i) tris[i] = s.cells[i].tri;
    std::vector<Segment> out;
    for (const EdgeInterval& e : mesh_skeleton(tris, domain_scale(s)))
        if (e.left >= 0 && e.right >= 0 && ch[e.left] != ch[e.right]) out.push_back({e.a, e.b});
    return out;
}

std::vector<Segment> raster_interfaces(const std::vector<unsigned char>& r, int n)
{
    if (n <= 0 || r.size() != static_cast<std::size_t>(n) * n)
        throw Error(ErrorCode::invalid_input, "raster_interfaces: raster must be n x n");
    double h = 1.0 / n;
    std::vector<Segment> out;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            unsigned char v = r[static_cast<std::size_t>(y) * n + x];
            if (x + 1 < n && r[static_cast<std::size_t>(y) * n + x + 1] != v)
                out.push_back({{(x + 1) * h, y * h}, {(x + 1) * h, (y + 1) * h}});
            if (y + 1 < n && r[static_cast<std::size_t>(y + 1) * n + x] != v)
                out.push_back({{x * h, (y + 1) * h}, {(x + 1) * h, (y + 1) * h}});
        }
    return out;
}

namespace {

struct CellHash {
    std::size_t operator()(std::int64_t k) const { return std::hash<std::int64_t>()(k * 0x9E3779B97F4A7C15LL); }
};

std::int64_t pack(std::int64_t i, std::int64_t j) { return (i << 32) ^ (j & 0xffffffffLL); }

// grid cells [i eps, (i+1) eps) x [j eps, (j+1) eps) met by the segment
void walk(const Segment& s, double eps, std::unordered_set<std::int64_t, CellHash>& hit)
{
    double x0 = s.a.x / eps, y0 = s.a.y / eps, x1 = s.b.x / eps, y1 = s.b.y / eps;
    std::int64_t i = static_cast<std::int64_t>(std::floor(x0)), j = static_cast<std::int64_t>(std::floor(y0));
    std::int64_t ie = static_cast<std::int64_t>(std::floor(x1)), je = static_cast<std::int64_t>(std::floor(y1));
    double dx = x1 - x0, dy = y1 - y0;
    int si = dx > 0 ? 1 : (dx < 0 ? -1 : 0), sj = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
    double tmx = si > 0 ? (i + 1 - x0) / dx : si < 0 ? (x0 - i) / -dx : INFINITY;
    double tmy = sj > 0 ? (j + 1 - y0) / dy : sj < 0 ? (y0 - j) / -dy : INFINITY;
    double tdx = si != 0 ? 1.0 / std::abs(dx) : INFINITY, tdy = sj != 0 ? 1.0 / std::abs(dy) : INFINITY;
    hit.insert(pack(i, j));
    std::int64_t guard = std::abs(ie - i) + std::abs(je - j) + 2;
    while ((i != ie || j != je) && guard-- > 0) {
        if (tmx < tmy) {
            i += si;
            tmx += tdx;
        } else {
            j += sj;
            tmy += tdy;
        }
        hit.insert(pack(i, j));
    }
}

}  // namespace

std::size_t box_count(const std::vector<Segment>& segs, double eps)
{
    std::unordered_set<std::int64_t, CellHash> hit;
    hit.reserve(segs.size() * 2);
    for (const Segment& s : segs) walk(s, eps, hit);
    return hit.size();
}

BoxDimension box_dimension(const std::vector<Segment>& segs, int j_min, int j_max, double d)
{
    if (segs.empty()) throw Error(ErrorCode::undefined_dimension, "box_dimension: empty interface");
    if (j_max - j_min < 1) throw Error(ErrorCode::out_of_range, "box_dimension: need at least two scales");
    BoxDimension r;
    r.d = d;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    int n = 0;
    for (int j = j_min; j <= j_max; ++j) {
        double eps = std::ldexp(1.0, -j);
        std::size_t c = box_count(segs, eps);
        r.table.push_back({eps, c});
        double x = std::log(1.0 / eps), y = std::log(static_cast<double>(c));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        ++n;
    }
    double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
    r.estimate = cxy / vx;
    r.r_squared = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
    const BoxCount& last = r.table.back();
    r.m_d = static_cast<double>(last.count) * std::pow(last.eps, d);
    return r;
}

RegularityReport regularity_report(const MetricsSeries& m, double area, int lo, int hi, double frozen_cap)
{
    RegularityReport r;
    for (const StepMetrics& s : m) r.c1_per = std::max(r.c1_per, s.max_cover_ratio);
    std::vector<double> l1, per;
    for (const StepMetrics& s : m) {
        if (s.k < lo || s.k > hi) continue;
        if (s.frozen > frozen_cap * area) {
            r.note = "rows with frozen measure above the cap dropped from the window";
            continue;
        }
        l1.push_back(s.l1_chi);
        per.push_back(s.perim_sum);
        r.frozen_in_window = std::max(r.frozen_in_window, s.frozen);
        if (l1.size() == 1) r.window_lo = s.k;
        r.window_hi = s.k;
    }
    if (l1.size() < 3) {
        r.note = "fewer than 3 usable rows in the window";
        return r;
    }
    r.l1_fit = fit_geometric(l1);
    r.bv_fit = fit_geometric(per);
    r.c_tilde = r.l1_fit.rate;
    r.rho_bv = r.bv_fit.rate;
    if (r.c_tilde > 0.0 && r.c_tilde < 1.0 && r.rho_bv > 1.0) r.theta0_measured = solve_theta0(r.c_tilde, r.rho_bv);
    if (r.c_tilde > 0.0 && r.c_tilde < 1.0)
        r.theta0_covering_constants = solve_theta0(r.c_tilde, 3.0 * std::max(r.c1_per, kC2));
    return r;
}

}  // namespace ci
