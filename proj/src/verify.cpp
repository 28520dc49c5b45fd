#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include "ci/cli_export.h"
#include "ci/covering.h"
#include "ci/inapprox.h"
#include "ci/matgeo.h"
#include "ci/onewell.h"

namespace ci {

bool SuiteReport::passed() const
{
    for (const SuiteCheck& c : checks)
        if (!c.passed) return false;
    return !checks.empty();
}

void SuiteReport::print(std::ostream& os) const
{
    for (const SuiteCheck& c : checks)
        os << c.suite << '\t' << c.name << '\t' << (c.passed ? "PASS" : "FAIL") << '\t' << format_real(c.value) << '\t'
           << format_real(c.limit) << '\n';
}

const std::vector<std::string>& suite_names()
{
    static const std::vector<std::string> n{"matgeo", "inapprox", "cell", "covering", "onewell"};
    return n;
}

namespace {

const double kTwoPi = 2.0 * std::numbers::pi;

struct Recorder {
    SuiteReport& r;
    std::string suite;
    // value must not exceed limit
    void below(const std::string& name, double value, double limit)
    {
        r.checks.push_back({suite, name, value <= limit && std::isfinite(value), value, limit});
    }
    void above(const std::string& name, double value, double limit)
    {
        r.checks.push_back({suite, name, value >= limit, value, limit});
    }
    void flag(const std::string& name, bool ok) { r.checks.push_back({suite, name, ok, ok ? 1.0 : 0.0, 1.0}); }
};

// A, B rank-one connected with det 1, rotated at random
void random_pair(std::mt19937_64& rng, double delta, Mat2& A, Mat2& B)
{
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int b = U(rng) < 0.5 ? 1 : 2;
    double l = 0.05 + 0.9 * U(rng);
    RankOneParams p = rank_one_params(b, l, delta);
    Mat2 R = Mat2::rotation(kTwoPi * U(rng));
    A = R * p.Q * laminate_base(b, 1.0 - l, delta);
    B = R * laminate_base(b, l, delta);
}

void suite_matgeo(const SuiteOptions& o, SuiteReport& rep)
{
    Recorder r{rep, "matgeo"};
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double e_rank = 0, e_cg = 0, e_sum = 0, e_r1 = 0, e_det = 0, e_eps = 0, e_round = 0;
    int splits = 0;
    for (int i = 0; i < o.samples; ++i) {
        int b = 1 + i % 2;
        double l = 0.01 + 0.98 * U(rng), mu = 0.01 + 0.98 * U(rng);
        RankOneParams p = rank_one_params(b, l, o.delta);
        e_rank = std::max(e_rank, dist(p.Q * laminate_base(b, 1.0 - l, o.delta), laminate_base(b, l, o.delta) + outer(p.w, p.u)));
        LaminateCoords c{b, mu, l, Mat2::rotation(kTwoPi * U(rng))};
        Mat2 F = coords_to_matrix(c, o.delta);
        e_cg = std::max(e_cg, dist(coords_to_cg(c, o.delta), cauchy_green(F)));
        LaminateCoords back = matrix_to_coords(F, b, o.delta);
        e_round = std::max(e_round, dist(coords_to_matrix(back, o.delta), F));
        Mat2 C = cauchy_green(F);
        C.a12 = C.a21 = 0.5 * (C.a12 + C.a21);
        if (cg_membership(C, o.delta) != Membership::interior) continue;
        double eps = (0.1 + 0.8 * U(rng)) * split_eps0(F, b, o.delta);
        SplitResult s = split(F, b, eps, o.delta);
        ++splits;
        e_sum = std::max(e_sum, dist(s.rho * s.Fplus + (1.0 - s.rho) * s.Fminus, F));
        e_r1 = std::max(e_r1, std::abs((s.Fplus - s.Fminus).det()));
        e_det = std::max({e_det, std::abs(s.Fplus.det() - 1.0), std::abs(s.Fminus.det() - 1.0)});
        e_eps = std::max(e_eps, std::abs(split_eps0(s.Fplus, b, o.delta) - eps));
    }
    r.below("rank_one_identity", e_rank, 1e-10);
    r.below("cg_closed_form", e_cg, 1e-10);
    r.below("coords_round_trip", e_round, 1e-9);
    r.below("split_barycenter", e_sum, 1e-10);
    r.below("split_rank_one", e_r1, 1e-10);
    r.below("split_det", e_det, 1e-10);
    r.below("split_target_eps", e_eps, 1e-10);
    r.above("split_samples", splits, o.samples / 4);
    WellPair w = make_wells(o.delta);
    r.below("well_normal_form", dist(w.D * w.Q * w.F0, w.tilde_plus), 1e-12);
}

void suite_inapprox(const SuiteOptions& o, SuiteReport& rep)
{
    Recorder r{rep, "inapprox"};
    InApproxReport ia = verify_in_approximation(o.delta, o.samples, 2, 14, o.seed);
    r.below("children_in_next_stage", ia.total_failures(), 0);
    double prev = INFINITY;
    bool mono = true;
    for (const InApproxStage& s : ia.stages) {
        if (s.sup_dist > prev * (1.0 + 1e-12)) mono = false;
        prev = std::min(prev, s.sup_dist);
    }
    r.flag("sup_dist_nonincreasing", mono);
}

void suite_cell(const SuiteOptions& o, SuiteReport& rep)
{
    Recorder r{rep, "cell"};
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double e_area = 0, e_frac = 0, e_det = 0, e_trace = 0, e_cont = 0;
    for (int i = 0; i < o.samples; ++i) {
        Mat2 A, B;
        random_pair(rng, o.delta, A, B);
        double lam = 0.02 + 0.96 * U(rng);
        double h = 0.125 * (0.02 + 0.96 * U(rng));
        Mat2 C = lam * A + (1.0 - lam) * B;
        CellConstruction cell = build_cell(A, B, C, lam, h);
        double tot = 0, a_side = 0;
        for (int t = 0; t < 10; ++t) {
            double a = cell.triangles[t].area();
            tot += a;
            if (cell.a_side(t)) a_side += a;
        }
        double da = cell.diamond.area();
        e_area = std::max(e_area, std::abs(tot - da) / da);
        e_frac = std::max(e_frac, std::abs(a_side / tot - cell.lambda * (1.0 + (1.0 - cell.lambda) * cell.h)));
        for (const Mat2& g : cell.gradients) e_det = std::max(e_det, std::abs(g.det() - 1.0));
        double sc = cell.diamond.scale;
        for (int k = 0; k < 100; ++k) {
            Vec2 y = cell_boundary_point(cell, 0.04 * k);
            e_trace = std::max(e_trace, norm(cell_eval(cell, y) - C * y) / sc);
        }
        // shared vertices: maps of every triangle through a vertex agree there
        for (int t = 0; t < 10; ++t)
            for (int v = 0; v < 3; ++v) {
                Vec2 x = cell.triangles[t][v];
                for (int s = 0; s < 10; ++s)
                    for (int w = 0; w < 3; ++w)
                        if (norm(cell.triangles[s][w] - x) < 1e-13 * sc)
                            e_cont = std::max(e_cont, norm(cell.map(t)(x) - cell.map(s)(x)) / sc);
            }
    }
    r.below("partition_area", e_area, 1e-12);
    r.below("volume_fraction", e_frac, 1e-12);
    r.below("determinants", e_det, 1e-10);
    r.below("boundary_trace", e_trace, 1e-10);
    r.below("vertex_continuity", e_cont, 1e-10);

    // error self-improvement along the dyadic stages at a fixed h0
    double h0 = calibrate_h0(o.delta);
    std::vector<double> err;
    int retries = 0;
    for (int k = 2; k <= 12; ++k) {
        double e = 0.0;
        for (int j = 0; j < 4; ++j) {
            Mat2 M = sample_stage_matrix(k, o.delta, rng, j == 0);
            ReplacementCell rc = replace_dyadic_stage(M, o.delta, h0);
            retries += rc.retries;
            for (const Mat2& g : rc.cell.gradients)
                e = std::max(e, std::min(dist(g, rc.cell.A), dist(g, rc.cell.B)));
        }
        err.push_back(e);
    }
    GeometricFit f = fit_geometric(err);
    double slope = std::log(f.rate), want = -0.5 * std::log(2.0);
    r.below("error_decay_slope_rel", std::abs(slope - want) / std::abs(want), 0.2);
    r.below("dyadic_retries_after_calibration", retries, 0);
}

void suite_covering(const SuiteOptions& o, SuiteReport& rep)
{
    Recorder r{rep, "covering"};
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<Triangle> tris{
        {{0, 0}, {1, 0}, {0, 1}},
        {{0, 0}, {1, 0}, {0.5, std::sqrt(0.75)}},
        {{0, 0}, {1, 0}, {0, 3}},
        {{0.2, 0.1}, {1.3, 0.4}, {0.1, 0.9}},
    };
    double e_area = 0, e_trace = 0, good = 1.0;
    bool ledger_ok = true;
    double h0 = calibrate_h0(o.delta);
    for (int rule = 0; rule < 2; ++rule) {
        // stage 3 for the dyadic rule, a V0 datum from laminate coordinates for the low-stage rule
        Mat2 M = rule == 0 ? sample_stage_matrix(3, o.delta, rng, true)
                           : coords_to_matrix({1, 0.3, 0.2, Mat2::identity()}, o.delta);
        ReplacementCell g = gadget_for(M, {o.delta, rule == 0 ? StageRule::A4 : StageRule::A3, h0});
        Gadget gd{&g.cell, &g.star};
        for (const Triangle& T : tris) {
            Affine parent{M, {U(rng), U(rng)}};
            CoverResult cr = cover_auto(T, parent, gd);
            CoverCheck cc = check_cover(T, parent, cr);
            e_area = std::max(e_area, cc.area_error / T.area());
            e_trace = std::max(e_trace, cc.trace_error);
            good = std::min(good, cr.good_area / T.area());
            PerimeterLedger pl = perimeter_ledger(cr, g.h_phys);
            ledger_ok = ledger_ok && pl.iso_bound_ok && pl.generic_bound_ok;
            if (cr.children.size() != cover_child_count(T, gd)) ledger_ok = false;
        }
    }
    r.below("partition_area", e_area, 1e-12);
    r.below("boundary_trace", e_trace, 1e-10);
    r.above("good_fraction", good, kGoodFraction);
    r.flag("perimeter_ledger", ledger_ok);
}

void suite_onewell(const SuiteOptions& o, SuiteReport& rep)
{
    Recorder r{rep, "onewell"};
    double d = std::min(std::abs(o.delta), 0.9);
    QcReport q = verify_qc_bounds(d, static_cast<std::size_t>(o.samples) * 10, o.seed);
    r.below("qc_violations", static_cast<double>(q.violations.size()), 0);
    std::mt19937_64 rng(o.seed + 1);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double e_round = 0, conv = 0;
    for (int i = 0; i < o.samples; ++i) {
        double lam = U(rng), ang = kTwoPi * U(rng);
        Mat2 Q = Mat2::rotation(ang);
        LcMembership m = lc_membership(Q * Mat2::diag(1.0, 1.0 - d + 2.0 * lam * d), d);
        e_round = std::max(e_round, m.member ? std::max(std::abs(m.lambda - lam), dist(m.Q, Q)) : INFINITY);
        double d1 = 2.0 * U(rng), d2 = 2.0 * U(rng) + 1e-3;
        Mat2 A = Mat2::diag(1.0, d1 + 1e-3), B = Mat2::diag(1.0, d2);
        double fm = polyconvex_witness(Mat2::diag(1.0, 0.5 * (d1 + 1e-3 + d2)), d);
        conv = std::max(conv, fm - 0.5 * (polyconvex_witness(A, d) + polyconvex_witness(B, d)));
    }
    r.below("lc_round_trip", e_round, 1e-9);
    r.below("witness_midpoint_convexity", conv, 1e-12);
}

}  // namespace

SuiteReport run_suite(const std::string& name, const SuiteOptions& opt)
{
    SuiteReport r;
    if (name == "all") {
        for (const std::string& n : suite_names()) {
            SuiteReport s = run_suite(n, opt);
            r.checks.insert(r.checks.end(), s.checks.begin(), s.checks.end());
        }
        return r;
    }
    if (name == "matgeo") suite_matgeo(opt, r);
    else if (name == "inapprox") suite_inapprox(opt, r);
    else if (name == "cell") suite_cell(opt, r);
    else if (name == "covering") suite_covering(opt, r);
    else if (name == "onewell") suite_onewell(opt, r);
    else throw Error(ErrorCode::invalid_parameter, "unknown suite '" + name + "'");
    return r;
}

}  // namespace ci
