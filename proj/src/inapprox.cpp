#include "ci/inapprox.h"

#include <algorithm>

#include "ci/matgeo.h"

namespace ci {

StageBands stage_bands(int k, double delta)
{
    if (k < 2) throw Error(ErrorCode::invalid_parameter, "bands exist for k >= 2");
    StageBands b;
    b.delta = delta;
    b.zeta0 = zeta0(delta);
    int j = k / 2;
    double z = b.zeta0;
    if (k % 2 == 0) {
        b.d1 = {5.0 * std::ldexp(z, -(j + 3)), 7.0 * std::ldexp(z, -(j + 3))};
        b.d2 = {std::ldexp(z, -j), 2.0 * std::ldexp(z, -j)};
    } else {
        b.d1 = {std::ldexp(z, -(j + 1)), 2.0 * std::ldexp(z, -(j + 1))};
        b.d2 = {5.0 * std::ldexp(z, -(j + 3)), 7.0 * std::ldexp(z, -(j + 3))};
    }
    return b;
}

static constexpr int kMaxScan = 60;

int v1_index(const Mat2& C, double delta)
{
    double z = zeta0(delta);
    double d1 = std::abs(C.a11 - 1.0);
    double d2 = std::abs(C.a22 - (1.0 + delta * delta));
    for (int m = 1; m <= kMaxScan; ++m) {
        double lo = std::ldexp(z, -(m + 1));
        if (d1 > lo && d1 < 2.0 * lo && d2 >= 7.0 * std::ldexp(z, -(m + 3))) return m;
    }
    return 0;
}

int classify_cg(const Mat2& C, double delta)
{
    double z = zeta0(delta);
    double d1 = std::abs(C.a11 - 1.0);
    double d2 = std::abs(C.a22 - (1.0 + delta * delta));
    for (int j = 1; j <= kMaxScan; ++j) {
        double a = std::ldexp(z, -(j + 3));
        double e = std::ldexp(z, -j);
        if (d1 > 5.0 * a && d1 < 7.0 * a && d2 > e && d2 < 2.0 * e) return 2 * j;
        double o = std::ldexp(z, -(j + 1));
        if (d1 > o && d1 < 2.0 * o && d2 > 5.0 * a && d2 < 7.0 * a) return 2 * j + 1;
    }
    return v1_index(C, delta) > 0 ? 1 : 0;
}

int classify(const Mat2& F, double delta)
{
    Mat2 C = cauchy_green(F);
    C.a12 = C.a21 = 0.5 * (C.a12 + C.a21);
    if (cg_membership(C, delta) != Membership::interior)
        throw Error(ErrorCode::not_classifiable, "classify: matrix not in the hull interior");
    return classify_cg(C, delta);
}

double dyadic_eps(int k, double delta)
{
    if (k < 2) throw Error(ErrorCode::wrong_entry_point, "dyadic split needs k >= 2");
    return 0.75 * std::ldexp(zeta0(delta), -((k + 1) / 2));
}

double dist_to_well(const Mat2& F, const Mat2& G)
{
    Mat2 M = G * F.transpose();
    double s = std::hypot(M.a11 + M.a22, M.a12 - M.a21);
    return std::sqrt(std::max(0.0, F.frob2() + G.frob2() - 2.0 * s));
}

double dist_to_K(const Mat2& F, double delta)
{
    Mat2 F0{1.0, delta, 0.0, 1.0}, F0inv{1.0, -delta, 0.0, 1.0};
    return std::min(dist_to_well(F, F0), dist_to_well(F, F0inv));
}

int nearer_well(const Mat2& F, double delta)
{
    Mat2 F0{1.0, delta, 0.0, 1.0}, F0inv{1.0, -delta, 0.0, 1.0};
    return dist_to_well(F, F0) <= dist_to_well(F, F0inv) ? 1 : 0;
}

Mat2 matrix_from_diagonal(double c11, double c22, int sign, double angle)
{
    double r = std::sqrt(std::max(0.0, c11 * c22 - 1.0));
    double c12 = sign >= 0 ? r : -r;
    double s11 = std::sqrt(c11);
    Mat2 U{s11, c12 / s11, 0.0, 1.0 / s11};
    return Mat2::rotation(angle) * U;
}

Mat2 sample_stage_matrix(int k, double delta, std::mt19937_64& rng, bool centre)
{
    StageBands b = stage_bands(k, delta);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto pick = [&](const Interval& iv) {
        if (centre) return 0.5 * (iv.lo + iv.hi);
        double t = 0.0;
        while (t <= 0.0 || t >= 1.0) t = u01(rng);
        return iv.lo + t * (iv.hi - iv.lo);
    };
    double d1 = pick(b.d1);
    double d2 = pick(b.d2);
    int sign = u01(rng) < 0.5 ? 1 : -1;
    double angle = 2.0 * M_PI * u01(rng);
    return matrix_from_diagonal(1.0 - d1, 1.0 + delta * delta - d2, sign, angle);
}

InApproxReport verify_in_approximation(double delta, int samples, int k_min, int k_max, std::uint64_t seed)
{
    if (samples < 1) throw Error(ErrorCode::invalid_parameter, "samples >= 1");
    InApproxReport rep;
    rep.delta = delta;
    std::mt19937_64 rng(seed);
    for (int k = std::max(2, k_min); k <= k_max; ++k) {
        InApproxStage st;
        st.k = k;
        double eps = dyadic_eps(k, delta);
        int br = dyadic_branch(k);
        for (int i = 0; i < samples; ++i) {
            Mat2 F = sample_stage_matrix(k, delta, rng);
            ++st.samples;
            st.sup_dist = std::max(st.sup_dist, dist_to_K(F, delta));
            bool ok = false;
            try {
                if (classify(F, delta) == k) {
                    SplitResult s = split(F, br, eps, delta);
                    ok = classify(s.Fplus, delta) == k + 1 && classify(s.Fminus, delta) == k + 1;
                }
            } catch (const Error&) {
                ok = false;
            }
            if (!ok) ++st.failures;
        }
        rep.stages.push_back(st);
    }
    return rep;
}

}  // namespace ci
