#include "ci/onewell.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace ci {

DiagonalWellPair make_diagonal_wells(double delta)
{
    if (!(delta > -1.0 && delta < 1.0) || delta == 0.0)
        throw Error(ErrorCode::invalid_parameter, "diagonal wells need delta in (-1,1), nonzero");
    return {delta, Mat2::diag(1.0, 1.0 + delta), Mat2::diag(1.0, 1.0 - delta)};
}

LcMembership lc_membership(const Mat2& F, double delta, double tol)
{
    LcMembership r;
    double d = std::abs(delta);
    if (!(F.det() > 0.0)) return r;
    Mat2 C = cauchy_green(F);
    double b = C.a22;
    if (std::abs(C.a11 - 1.0) > tol || std::abs(C.a12) > tol || std::abs(C.a21) > tol) return r;
    double sb = std::sqrt(b);
    double lo = 1.0 - d, hi = 1.0 + d;
    if (sb < lo - tol || sb > hi + tol) return r;
    r.member = true;
    r.lambda = d > 0.0 ? (sb - lo) / (2.0 * d) : 0.5;
    r.lambda = std::clamp(r.lambda, 0.0, 1.0);
    r.Q = F * Mat2::diag(1.0, 1.0 / sb);
    return r;
}

double polyconvex_witness(const Mat2& F, double delta)
{
    double d = std::abs(delta);
    double det = F.det();
    if (det > 1.0 - d) return 1.0 / det;
    return -det / ((1.0 - d) * (1.0 - d)) + 2.0 / (1.0 - d);
}

namespace {

double smallest_sv(const Mat2& A) { return singular_values(A).s2; }

}  // namespace

QcReport verify_qc_bounds(double delta, std::size_t samples, std::uint64_t seed, double tol)
{
    if (samples < 1) throw Error(ErrorCode::invalid_parameter, "verify_qc_bounds: samples >= 1");
    DiagonalWellPair w = make_diagonal_wells(delta);
    double d = std::abs(delta);
    QcReport r;
    r.delta = delta;
    r.samples = samples;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double two_pi = 2.0 * std::numbers::pi;
    Vec2 e1{1.0, 0.0};
    auto flag = [&](const char* what, double lam, double ang, double v) {
        r.violations.push_back({what, lam, ang, v});
    };

    for (std::size_t i = 0; i < samples; ++i) {
        // endpoints get hit explicitly
        double lam = i == 0 ? 0.0 : i == 1 ? 1.0 : U(rng);
        double ang = two_pi * U(rng);
        Mat2 Q = Mat2::rotation(ang);
        Mat2 F = Q * Mat2::diag(1.0, 1.0 - delta + 2.0 * lam * delta);
        double det = F.det();
        double ex = std::max(0.0, std::max((1.0 - d) - det, det - (1.0 + d)));
        r.max_det_excess = std::max(r.max_det_excess, ex);
        if (ex > tol) flag("det", lam, ang, det);
        double fe1 = norm(F * e1);
        double fte1 = norm(F.inverse().transpose() * e1);
        double e1x = std::max(fe1, fte1) - 1.0;
        r.max_e1_excess = std::max(r.max_e1_excess, e1x);
        if (e1x > tol) flag("e1", lam, ang, e1x);
        double cg = norm(cauchy_green(F) * e1 - e1);
        r.max_cg_e1_error = std::max(r.max_cg_e1_error, cg);
        if (cg > tol) flag("cg_e1", lam, ang, cg);
        double fx = polyconvex_witness(F, delta) - 1.0 / (1.0 - d);
        r.max_f_excess = std::max(r.max_f_excess, fx);
        if (fx > tol) flag("witness", lam, ang, fx);
        if ((i == 0 || i == 1)) {
            const Mat2& W = i == 0 ? (delta > 0 ? w.F2 : w.F1) : (delta > 0 ? w.F1 : w.F2);
            if (dist(F, Q * W) > tol) flag("endpoint", lam, ang, dist(F, Q * W));
        }
    }

    // rank-one connections between hull elements: only Q = Id, along e2
    r.min_sv_off_identity = INFINITY;
    const int nq = 720;
    for (int a = 0; a < 40; ++a) {
        double l1 = U(rng), l2 = U(rng);
        if (std::abs(l1 - l2) < 1e-3) continue;
        Mat2 A = Mat2::diag(1.0, 1.0 - delta + 2.0 * l1 * delta);
        Mat2 B = Mat2::diag(1.0, 1.0 - delta + 2.0 * l2 * delta);
        double s0 = smallest_sv(A - B);
        r.max_sv_identity = std::max(r.max_sv_identity, s0);
        Mat2 D = A - B;
        if (std::abs(D.a11) + std::abs(D.a12) + std::abs(D.a21) > tol) flag("direction", l1, 0.0, s0);
        for (int q = 1; q < nq; ++q) {
            double ang = two_pi * q / nq;
            double s = smallest_sv(Mat2::rotation(ang) * A - B);
            r.min_sv_off_identity = std::min(r.min_sv_off_identity, s);
            ++r.rank_scan_points;
            if (s < tol) flag("rank_one_off_identity", l1, ang, s);
        }
    }
    if (r.max_sv_identity > tol) flag("rank_one_identity", 0.0, 0.0, r.max_sv_identity);

    // first-order laminates stay in the hull
    for (int i = 0; i < 1000; ++i) {
        double l1 = U(rng), l2 = U(rng), t = U(rng), ang = two_pi * U(rng);
        Mat2 Q = Mat2::rotation(ang);
        Mat2 A = Q * Mat2::diag(1.0, 1.0 - delta + 2.0 * l1 * delta);
        Mat2 B = Q * Mat2::diag(1.0, 1.0 - delta + 2.0 * l2 * delta);
        Mat2 bary = A * t + B * (1.0 - t);
        LcMembership m = lc_membership(bary, delta, tol);
        ++r.laminates;
        if (!m.member) {
            flag("laminate", t, ang, cauchy_green(bary).a12);
            continue;
        }
        double want = t * l1 + (1.0 - t) * l2;
        if (std::abs(m.lambda - want) > tol) flag("laminate_lambda", t, ang, m.lambda - want);
    }
    return r;
}

}  // namespace ci
