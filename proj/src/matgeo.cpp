#include "ci/matgeo.h"

#include <algorithm>

namespace ci {

const char* error_name(ErrorCode c)
{
    switch (c) {
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::not_attainable: return "not-attainable";
    case ErrorCode::degenerate_coordinates: return "degenerate-coordinates";
    case ErrorCode::invalid_target: return "invalid-target";
    case ErrorCode::not_splittable: return "not-splittable";
    case ErrorCode::not_classifiable: return "not-classifiable";
    case ErrorCode::invalid_rank: return "invalid-rank";
    case ErrorCode::invalid_input: return "invalid-input";
    case ErrorCode::wrong_entry_point: return "wrong-entry-point";
    case ErrorCode::construction_failure: return "construction-failure";
    case ErrorCode::wrong_coverer: return "wrong-coverer";
    case ErrorCode::invalid_box: return "invalid-box";
    case ErrorCode::invalid_domain: return "invalid-domain";
    case ErrorCode::hull_violation: return "hull-violation";
    case ErrorCode::out_of_range: return "out-of-range";
    case ErrorCode::invalid_pair: return "invalid-pair";
    case ErrorCode::undefined_dimension: return "undefined-dimension";
    case ErrorCode::config_error: return "config-error";
    }
    return "unknown";
}

Tolerances& tolerances()
{
    static Tolerances t;
    return t;
}

static void check_delta(double delta)
{
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw Error(ErrorCode::invalid_parameter, "delta must be positive");
}

static void check_branch(int branch)
{
    if (branch != 1 && branch != 2) throw Error(ErrorCode::invalid_parameter, "branch must be 1 or 2");
}

WellPair make_wells(double delta)
{
    check_delta(delta);
    WellPair w;
    w.delta = delta;
    w.F0 = {1.0, delta, 0.0, 1.0};
    w.F0inv = {1.0, -delta, 0.0, 1.0};
    double s = 1.0 + delta * delta;
    w.delta_bar = delta / s;
    w.Q = {1.0, -delta, delta, 1.0};
    w.D = Mat2::diag(1.0, 1.0 / s);
    // the minus well needs the reflection-free rotation R F0inv
    Mat2 R = (1.0 / s) * Mat2{1.0 - delta * delta, 2.0 * delta, -2.0 * delta, 1.0 - delta * delta};
    w.tilde_plus = w.D * w.Q * w.F0;
    w.tilde_minus = w.D * w.Q * R * w.F0inv;
    return w;
}

double well_distance(double delta)
{
    check_delta(delta);
    double d2 = delta * delta;
    return std::sqrt(std::max(0.0, 4.0 + 2.0 * d2 - 2.0 * std::sqrt(d2 * d2 + 4.0)));
}

Mat2 laminate_base(int branch, double lambda, double delta)
{
    check_branch(branch);
    if (branch == 1) return {1.0, delta * (1.0 - 2.0 * lambda), 0.0, 1.0};
    double s = 1.0 + delta * delta;
    Vec2 v{delta / s, 1.0 / s};
    Mat2 F0{1.0, delta, 0.0, 1.0};
    return F0 - (2.0 * lambda * delta) * outer(v, {1.0, 0.0});
}

RankOneParams rank_one_params(int branch, double lambda, double delta)
{
    check_branch(branch);
    check_delta(delta);
    double t = delta * (1.0 - 2.0 * lambda);
    double den = 1.0 + t * t;
    double gamma = 2.0 * delta * (2.0 * lambda - 1.0) / den;
    RankOneParams p;
    p.gamma = gamma;
    if (branch == 1) {
        p.Q = (1.0 / den) * Mat2{1.0 - t * t, 2.0 * t, -2.0 * t, 1.0 - t * t};
        p.w = {gamma * t, gamma};
        p.u = {1.0, 0.0};
    } else {
        p.Q = (1.0 / den) * Mat2{1.0 - t * t, -2.0 * t, 2.0 * t, 1.0 - t * t};
        p.w = {gamma * ((1.0 - 2.0 * lambda) * delta * delta + 1.0), gamma * (-2.0 * lambda * delta)};
        p.u = {0.0, 1.0};
    }
    return p;
}

Mat2 coords_to_matrix(const LaminateCoords& c, double delta)
{
    RankOneParams p = rank_one_params(c.branch, c.lambda, delta);
    Mat2 F = laminate_base(c.branch, c.lambda, delta) + c.mu * outer(p.w, p.u);
    return c.rotation * F;
}

Mat2 coords_to_cg(const LaminateCoords& c, double delta)
{
    check_branch(c.branch);
    double d2 = delta * delta;
    double l = c.lambda, mu = c.mu;
    double q = (2.0 * l - 1.0) * (2.0 * l - 1.0);
    double c12 = delta * (1.0 - 2.0 * l) * (1.0 - 2.0 * mu);
    if (c.branch == 1) {
        double c11 = 1.0 + 4.0 * d2 * q * (mu * mu - mu) / (d2 * q + 1.0);
        double c22 = 1.0 + d2 * q;
        return {c11, c12, c12, c22};
    }
    double c11 = 1.0 + 4.0 * d2 * (l * l - l) / (1.0 + d2);
    double c22 = 1.0 + d2 + 4.0 * d2 * (1.0 + d2) * q * (mu * mu - mu) / (d2 * q + 1.0);
    return {c11, c12, c12, c22};
}

const char* membership_name(Membership m)
{
    switch (m) {
    case Membership::interior: return "interior";
    case Membership::boundary: return "boundary";
    case Membership::outside: return "outside";
    }
    return "?";
}

Membership cg_membership(const Mat2& C, double delta, double margin)
{
    check_delta(delta);
    double tol = tolerances().pipeline;
    double scale = std::max(1.0, C.frob());
    if (std::abs(C.a12 - C.a21) > tol * scale) throw Error(ErrorCode::invalid_input, "C not symmetric");
    if (!(C.a11 > 0.0) || !(C.det() > 0.0)) throw Error(ErrorCode::invalid_input, "C not positive definite");
    double g1 = 1.0 - C.a11;
    double g2 = 1.0 + delta * delta - C.a22;
    double g3 = C.a11 * C.a22 - 1.0;
    double ddet = std::abs(C.det() - 1.0);
    if (ddet > tol || g1 < -tol || g2 < -tol || g3 < -tol) return Membership::outside;
    if (g1 > margin && g2 > margin && g3 > margin) return Membership::interior;
    return Membership::boundary;
}

Membership cg_membership(const Mat2& C, double delta) { return cg_membership(C, delta, tolerances().margin); }

LaminateCoords matrix_to_coords(const Mat2& F, int branch, double delta)
{
    check_branch(branch);
    check_delta(delta);
    double tol = tolerances().pipeline;
    if (std::abs(F.det() - 1.0) > tol) throw Error(ErrorCode::not_attainable, "det F != 1");
    Mat2 C = cauchy_green(F);
    C.a12 = C.a21 = 0.5 * (C.a12 + C.a21);
    if (cg_membership(C, delta, 0.0) == Membership::outside)
        throw Error(ErrorCode::not_attainable, "Cauchy-Green tensor outside the attainable set");
    double d2 = delta * delta;
    // s = (1 - 2 lambda)^2
    double s;
    if (branch == 1) {
        s = (C.a22 - 1.0) / d2;
    } else {
        // 4 (l^2 - l) = (c11 - 1)(1 + d^2)/d^2 and (1-2l)^2 = 1 + 4(l^2 - l)
        s = 1.0 + (C.a11 - 1.0) * (1.0 + d2) / d2;
    }
    s = std::clamp(s, 0.0, 1.0);
    double one_m_2l = std::sqrt(s);
    if (one_m_2l <= 1e-14) throw Error(ErrorCode::degenerate_coordinates, "lambda = 1/2");
    LaminateCoords c;
    c.branch = branch;
    c.lambda = 0.5 * (1.0 - one_m_2l);
    c.mu = std::clamp(0.5 * (1.0 - C.a12 / (delta * one_m_2l)), 0.0, 1.0);
    LaminateCoords base = c;
    base.rotation = Mat2::identity();
    Mat2 Fb = coords_to_matrix(base, delta);
    Mat2 R = F * Fb.inverse();
    // polish: nearest rotation
    double a = 0.5 * (R.a11 + R.a22), b = 0.5 * (R.a21 - R.a12);
    double r = std::hypot(a, b);
    if (r == 0.0) throw Error(ErrorCode::not_attainable, "no rotation");
    c.rotation = {a / r, -b / r, b / r, a / r};
    return c;
}

static double kappa(int branch, double lambda, double delta)
{
    double t = delta * (1.0 - 2.0 * lambda);
    double k1 = 4.0 * t * t / (1.0 + t * t);
    return branch == 1 ? k1 : k1 * (1.0 + delta * delta);
}

double split_eps0(const Mat2& F, int branch, double delta)
{
    check_branch(branch);
    Mat2 C = cauchy_green(F);
    return branch == 1 ? 1.0 - C.a11 : 1.0 + delta * delta - C.a22;
}

SplitResult split(const Mat2& F, int branch, double eps, double delta)
{
    check_branch(branch);
    check_delta(delta);
    Mat2 C = cauchy_green(F);
    C.a12 = C.a21 = 0.5 * (C.a12 + C.a21);
    Membership m = cg_membership(C, delta);
    if (m == Membership::outside) throw Error(ErrorCode::not_attainable, "split: F outside hull");
    if (m == Membership::boundary) throw Error(ErrorCode::not_splittable, "split: F on the hull boundary");
    LaminateCoords c = matrix_to_coords(F, branch, delta);
    double k = kappa(branch, c.lambda, delta);
    double mm = c.mu - c.mu * c.mu;
    double eps0 = k * mm;
    if (!(eps > 0.0)) throw Error(ErrorCode::invalid_target, "split: eps must be positive");
    if (eps > eps0 * (1.0 + 1e-12)) throw Error(ErrorCode::invalid_target, "split: eps exceeds eps0");
    double beta = std::min(1.0, eps / eps0);
    double root = std::sqrt(std::max(0.0, 1.0 - 4.0 * beta * mm));
    SplitResult r;
    r.branch = branch;
    r.lambda = c.lambda;
    r.mu = c.mu;
    r.eps0 = eps0;
    r.chi = 1;
    if (c.mu == 0.5) {
        r.mu_star = 0.5 * (1.0 + root);
        r.rho = 0.5;
    } else {
        r.mu_star = c.mu > 0.5 ? 0.5 * (1.0 + root) : 0.5 * (1.0 - root);
        r.rho = 1.0 + (c.mu - r.mu_star) / (2.0 * r.mu_star - 1.0);
    }
    LaminateCoords cp = c, cm = c;
    cp.mu = r.mu_star;
    cm.mu = 1.0 - r.mu_star;
    r.Fplus = coords_to_matrix(cp, delta);
    r.Fminus = coords_to_matrix(cm, delta);
    return r;
}

}  // namespace ci
