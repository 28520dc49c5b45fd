#include "ci/ci_engine.h"

#include <algorithm>
#include <map>
#include <memory>
#include <numeric>

#include <omp.h>

#include "ci/inapprox.h"
#include "ci/mesh.h"

namespace ci {

std::vector<Triangle> unit_square()
{
    return {Triangle{{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}}, Triangle{{0.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}};
}

IterationState init(const std::vector<Triangle>& domain, const Mat2& M, double delta, double h0)
{
    if (domain.empty()) throw Error(ErrorCode::invalid_domain, "init: empty domain");
    Mat2 C = cauchy_green(M);
    C.a12 = C.a21 = 0.5 * (C.a12 + C.a21);
    Membership m;
    try {
        m = cg_membership(C, delta);
    } catch (const Error&) {
        m = Membership::outside;
    }
    if (m != Membership::interior)
        throw Error(ErrorCode::hull_violation,
                    std::string("init: boundary datum is ") + membership_name(m) + " of the attainable set");
    IterationState s;
    s.M = M;
    s.delta = delta;
    double area = 0.0;
    for (const Triangle& t : domain) {
        if (!(t.area() > 0.0)) throw Error(ErrorCode::invalid_domain, "init: degenerate triangle");
        area += t.area();
        s.domain.push_back(t.ccw());
    }
    // pairwise interior overlap check via the skeleton
    SkeletonStats st;
    double scale = 0.0;
    for (const Triangle& t : s.domain) scale = std::max(scale, t.diameter());
    mesh_skeleton(s.domain, scale, &st);
    if (st.overlaps > 0) throw Error(ErrorCode::invalid_domain, "init: overlapping triangles");
    for (std::size_t i = 0; i < s.domain.size(); ++i) {
        for (std::size_t j = 0; j < s.domain.size(); ++j) {
            if (i == j) continue;
            if (triangle_contains(s.domain[j], s.domain[i].centroid(), -1e-12))
                throw Error(ErrorCode::invalid_domain, "init: overlapping triangles");
        }
    }
    s.area = area;
    s.h0 = h0 > 0.0 ? h0 : calibrate_h0(delta);
    int stage = classify(M, delta);
    for (const Triangle& t : s.domain) {
        CellState c;
        c.tri = t;
        c.grad = M;
        c.stage = stage;
        c.id = s.next_id++;
        s.cells.push_back(c);
    }
    StepMetrics m0 = state_metrics(s);
    m0.k = 0;
    s.metrics.push_back(m0);
    return s;
}

IterationState init(const std::vector<Triangle>&, const DiagonalWellPair& wells, double lambda)
{
    throw Error(ErrorCode::wrong_entry_point,
                "init: diagonal well pair (delta " + std::to_string(wells.delta) + ", lambda " + std::to_string(lambda) +
                    ") has a single rank-one connection; only simple laminates exist");
}

std::vector<unsigned char> chi(const IterationState& s, int which)
{
    std::vector<unsigned char> out(s.cells.size());
    for (std::size_t i = 0; i < s.cells.size(); ++i) {
        unsigned char c = nearer_well(s.cells[i].grad, s.delta) == 1 ? 1 : 0;
        out[i] = which == 1 ? c : static_cast<unsigned char>(1 - c);
    }
    return out;
}

namespace {

struct GradKey {
    double a, b, c, d;
    bool a4;
    bool operator<(const GradKey& o) const
    {
        if (a4 != o.a4) return a4 < o.a4;
        if (a != o.a) return a < o.a;
        if (b != o.b) return b < o.b;
        if (c != o.c) return c < o.c;
        return d < o.d;
    }
};

GradKey key_of(const CellState& c) { return {c.grad.a11, c.grad.a12, c.grad.a21, c.grad.a22, c.stage >= 2}; }

ReplacementCell make_gadget(const CellState& c, double delta, double h0)
{
    if (c.stage >= 2) return replace_dyadic_stage(c.grad, delta, h0);
    return replace_low_stage(c.grad, delta);
}

struct Plan {
    std::vector<std::size_t> candidates;  // indices into s.cells
    std::vector<const ReplacementCell*> gadget;  // per candidate
    std::vector<std::size_t> counts;
    std::vector<char> refine;
    std::vector<char> freeze;  // per cell
};

[[noreturn]] void rethrow_for_cell(const CellState& c, const std::string& what, ErrorCode code)
{
    throw Error(code, "cell " + std::to_string(c.id) + ": " + what);
}

// largest cells first; the first one that does not fit freezes itself and everything smaller.
// prepare(lo, hi) fills gadget and count for candidates order[lo..hi)
template <class Prepare>
void choose(const IterationState& s, const EngineConfig& cfg, Plan& p, Prepare&& prepare)
{
    const std::size_t nc = p.candidates.size();
    std::vector<std::size_t> order(nc);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return s.cells[p.candidates[x]].tri.area() > s.cells[p.candidates[y]].tri.area();
    });
    p.refine.assign(nc, 0);
    p.gadget.assign(nc, nullptr);
    p.counts.assign(nc, 0);
    double allowed = static_cast<double>(cfg.cell_budget);
    double total = static_cast<double>(s.cells.size());
    std::size_t pos = 0;
    bool full = false;
    std::size_t chunk = 64;
    while (pos < nc && !full) {
        std::size_t hi = std::min(nc, pos + chunk);
        prepare(order, pos, hi);
        for (; pos < hi; ++pos) {
            std::size_t o = order[pos];
            double next = total - 1.0 + static_cast<double>(p.counts[o]);
            if (next > allowed) {
                full = true;
                break;
            }
            p.refine[o] = 1;
            total = next;
        }
        chunk = std::min<std::size_t>(chunk * 2, 1 << 16);
    }
    for (; pos < nc; ++pos) p.freeze[p.candidates[order[pos]]] = 1;
}

IterationState assemble(const IterationState& s, const EngineConfig& cfg, const Plan& p,
                        std::vector<CoverResult>& covers)
{
    (void)cfg;
    IterationState out;
    out.step = s.step + 1;
    out.domain = s.domain;
    out.M = s.M;
    out.offset = s.offset;
    out.delta = s.delta;
    out.area = s.area;
    out.h0 = s.h0;
    out.next_id = s.next_id;
    out.metrics = s.metrics;
    out.a4_h_values = s.a4_h_values;
    out.a3_h_values = s.a3_h_values;

    std::vector<long> cand_of(s.cells.size(), -1);
    for (std::size_t j = 0; j < p.candidates.size(); ++j)
        if (p.refine[j]) cand_of[p.candidates[j]] = static_cast<long>(j);

    StepMetrics m;
    m.k = out.step;
    std::size_t total = 0;
    for (std::size_t i = 0; i < s.cells.size(); ++i) total += cand_of[i] >= 0 ? covers[cand_of[i]].children.size() : 1;
    out.cells.reserve(total);
    for (std::size_t i = 0; i < s.cells.size(); ++i) {
        const CellState& c = s.cells[i];
        long j = cand_of[i];
        if (j < 0) {
            CellState cc = c;
            if (p.freeze[i]) {
                cc.frozen = true;
                ++m.frozen_now;
            }
            out.cells.push_back(cc);
            continue;
        }
        const ReplacementCell& g = *p.gadget[j];
        const CoverResult& cr = covers[j];
        int chi_parent = nearer_well(c.grad, s.delta);
        double child_per = 0.0;
        for (const CoverChild& ch : cr.children) {
            CellState nc;
            nc.tri = ch.tri;
            nc.grad = ch.grad;
            nc.offset = ch.offset;
            nc.stage = ch.kind == ChildKind::good ? g.target_stage : c.stage;
            nc.id = out.next_id++;
            nc.parent = c.id;
            double a = ch.tri.area();
            if (ch.kind == ChildKind::good) {
                m.l1_chi += a * std::abs(nearer_well(ch.grad, s.delta) - chi_parent);
                m.l1_grad += a * dist(ch.grad, c.grad);
                m.good_area += a;
            }
            double per = ch.tri.perimeter();
            child_per += per;
            m.new_perimeter += per;
            out.cells.push_back(nc);
        }
        m.max_cover_ratio = std::max(m.max_cover_ratio, child_per / c.tri.perimeter());
        m.min_good_fraction = std::min(m.min_good_fraction, cr.good_area / c.tri.area());
        m.refined_area += c.tri.area();
        ++m.refined;
        if (c.stage >= 2) {
            out.a4_h_values.insert(g.h_phys);
            m.h_retries += g.retries;
        } else {
            out.a3_h_values.insert(g.h_phys);
        }
        covers[j] = CoverResult{};
    }
    if (m.refined == 0) m.min_good_fraction = 0.0;
    StepMetrics sm = state_metrics(out);
    sm.k = m.k;
    sm.l1_chi = m.l1_chi;
    sm.l1_grad = m.l1_grad;
    sm.refined = m.refined;
    sm.frozen_now = m.frozen_now;
    sm.good_area = m.good_area;
    sm.refined_area = m.refined_area;
    sm.new_perimeter = m.new_perimeter;
    sm.max_cover_ratio = m.max_cover_ratio;
    sm.min_good_fraction = m.min_good_fraction;
    sm.h_retries = m.h_retries;
    out.metrics.push_back(sm);
    return out;
}

std::vector<std::size_t> candidates_of(const IterationState& s, const EngineConfig& cfg, Plan& p)
{
    double min_area = cfg.min_area_rel * s.area;
    p.freeze.assign(s.cells.size(), 0);
    std::vector<std::size_t> cand;
    for (std::size_t i = 0; i < s.cells.size(); ++i) {
        const CellState& c = s.cells[i];
        if (c.frozen) continue;
        if (c.tri.area() < min_area) {
            p.freeze[i] = 1;
            continue;
        }
        cand.push_back(i);
    }
    return cand;
}

}  // namespace

IterationState step(const IterationState& s, const EngineConfig& cfg)
{
    Plan p;
    p.candidates = candidates_of(s, cfg, p);
    const std::size_t nc = p.candidates.size();

    // one gadget per distinct gradient
    std::map<GradKey, std::unique_ptr<ReplacementCell>> cache;
    auto prepare = [&](const std::vector<std::size_t>& order, std::size_t lo, std::size_t hi) {
        std::vector<std::size_t> fresh;
        for (std::size_t q = lo; q < hi; ++q) {
            std::size_t i = p.candidates[order[q]];
            auto [it, added] = cache.try_emplace(key_of(s.cells[i]));
            if (added) fresh.push_back(i);
        }
        std::vector<std::unique_ptr<ReplacementCell>> made(fresh.size());
        std::vector<std::string> err(fresh.size());
        std::vector<int> code(fresh.size(), -1);
        const long nf = static_cast<long>(fresh.size());
#pragma omp parallel for schedule(dynamic)
        for (long f = 0; f < nf; ++f) {
            try {
                made[f] = std::make_unique<ReplacementCell>(make_gadget(s.cells[fresh[f]], s.delta, s.h0));
            } catch (const Error& e) {
                err[f] = e.what();
                code[f] = static_cast<int>(e.code());
            }
        }
        for (long f = 0; f < nf; ++f) {
            if (code[f] >= 0) rethrow_for_cell(s.cells[fresh[f]], err[f], static_cast<ErrorCode>(code[f]));
            cache[key_of(s.cells[fresh[f]])] = std::move(made[f]);
        }
        for (std::size_t q = lo; q < hi; ++q) p.gadget[order[q]] = cache[key_of(s.cells[p.candidates[order[q]]])].get();
        const long l = static_cast<long>(lo), h = static_cast<long>(hi);
#pragma omp parallel for schedule(dynamic, 16)
        for (long q = l; q < h; ++q) {
            std::size_t j = order[q];
            const ReplacementCell* g = p.gadget[j];
            p.counts[j] = cover_child_count(s.cells[p.candidates[j]].tri, Gadget{&g->cell, &g->star});
        }
    };
    choose(s, cfg, p, prepare);

    std::vector<CoverResult> covers(nc);
    const long lnc = static_cast<long>(nc);
#pragma omp parallel for schedule(dynamic, 16)
    for (long j = 0; j < lnc; ++j) {
        if (!p.refine[j]) continue;
        const CellState& c = s.cells[p.candidates[j]];
        const ReplacementCell* g = p.gadget[j];
        covers[j] = cover_auto(c.tri, c.map(), Gadget{&g->cell, &g->star});
    }
    return assemble(s, cfg, p, covers);
}

IterationState step_serial(const IterationState& s, const EngineConfig& cfg)
{
    Plan p;
    p.candidates = candidates_of(s, cfg, p);
    const std::size_t nc = p.candidates.size();
    std::vector<std::unique_ptr<ReplacementCell>> own(nc);
    auto prepare = [&](const std::vector<std::size_t>& order, std::size_t lo, std::size_t hi) {
        for (std::size_t q = lo; q < hi; ++q) {
            std::size_t j = order[q];
            const CellState& c = s.cells[p.candidates[j]];
            try {
                own[j] = std::make_unique<ReplacementCell>(make_gadget(c, s.delta, s.h0));
            } catch (const Error& e) {
                rethrow_for_cell(c, e.what(), e.code());
            }
            p.gadget[j] = own[j].get();
            p.counts[j] = cover_child_count(c.tri, Gadget{&own[j]->cell, &own[j]->star});
        }
    };
    choose(s, cfg, p, prepare);
    std::vector<CoverResult> covers(nc);
    for (std::size_t j = 0; j < nc; ++j) {
        if (!p.refine[j]) continue;
        const CellState& c = s.cells[p.candidates[j]];
        covers[j] = cover_auto(c.tri, c.map(), Gadget{&own[j]->cell, &own[j]->star});
    }
    return assemble(s, cfg, p, covers);
}

RunResult run(const EngineConfig& cfg, const std::vector<Triangle>& domain)
{
    return run(cfg, domain, [](const IterationState&) {});
}

StepMetrics state_metrics(const IterationState& s)
{
    StepMetrics m;
    m.k = s.step;
    m.cells = s.cells.size();
    std::vector<unsigned char> ch = chi(s, 1);
    double dsum = 0.0;
    for (std::size_t i = 0; i < s.cells.size(); ++i) {
        const CellState& c = s.cells[i];
        double a = c.tri.area();
        m.perim_sum += c.tri.perimeter();
        if (c.frozen) m.frozen += a;
        dsum += a * dist_to_K(c.grad, s.delta);
        if (c.stage >= static_cast<int>(m.stage_hist.size())) m.stage_hist.resize(c.stage + 1, 0.0);
        m.stage_hist[c.stage] += a;
        if (!c.frozen) m.energy += a * std::pow(2.0, -0.5 * c.stage);
    }
    m.mean_dist = dsum / s.area;
    double scale = 0.0;
    for (const Triangle& t : s.domain) scale = std::max(scale, t.diameter());
    std::vector<Triangle> tris(s.cells.size());
    for (std::size_t i = 0; i < s.cells.size(); ++i) tris[i] = s.cells[i].tri;
    for (const EdgeInterval& e : mesh_skeleton(tris, scale)) {
        if (e.left < 0 || e.right < 0) continue;
        double len = e.length();
        m.bv_chi += len * (ch[e.left] != ch[e.right] ? 1.0 : 0.0);
        m.bv_grad += len * dist(s.cells[e.left].grad, s.cells[e.right].grad);
    }
    return m;
}

InvariantReport check_invariants(const IterationState& s)
{
    InvariantReport r;
    double sum = 0.0;
    std::vector<Triangle> tris(s.cells.size());
    for (std::size_t i = 0; i < s.cells.size(); ++i) {
        const CellState& c = s.cells[i];
        tris[i] = c.tri;
        sum += c.tri.area();
        r.det_error = std::max(r.det_error, std::abs(c.grad.det() - 1.0));
        int k = -1;
        try {
            k = classify(c.grad, s.delta);
        } catch (const Error&) {
        }
        if (k != c.stage) ++r.stage_violations;
    }
    r.area_error = std::abs(sum - s.area);
    double scale = 0.0;
    for (const Triangle& t : s.domain) scale = std::max(scale, t.diameter());
    SkeletonStats st;
    auto sk = mesh_skeleton(tris, scale, &st);
    r.overlaps = st.overlaps;
    Affine bdry{s.M, s.offset};
    for (const EdgeInterval& e : sk) {
        for (Vec2 p : {e.a, e.b}) {
            if (e.left >= 0 && e.right >= 0) {
                Vec2 ul = s.cells[e.left].map()(p), ur = s.cells[e.right].map()(p);
                r.continuity_error = std::max(r.continuity_error, norm(ul - ur));
            } else {
                int c = e.left >= 0 ? e.left : e.right;
                r.trace_error = std::max(r.trace_error, norm(s.cells[c].map()(p) - bdry(p)));
            }
        }
    }
    return r;
}

int stage_monotonicity_violations(const IterationState& prev, const IterationState& next)
{
    std::map<std::int64_t, std::size_t> at;
    for (std::size_t i = 0; i < prev.cells.size(); ++i) at[prev.cells[i].id] = i;
    int v = 0;
    for (const CellState& c : next.cells) {
        auto same = at.find(c.id);
        if (same != at.end()) {
            if (c.stage != prev.cells[same->second].stage) ++v;
            continue;
        }
        auto par = at.find(c.parent);
        if (par == at.end()) {
            ++v;
            continue;
        }
        const CellState& pc = prev.cells[par->second];
        if (c.stage < pc.stage) ++v;
        // replacement children either keep the parent's map or move up a stage
        if (c.stage == pc.stage && dist(pc.grad, c.grad) != 0.0) ++v;
    }
    return v;
}

}  // namespace ci
