#include "ci/conti_cell.h"

#include <algorithm>
#include <random>

#include "ci/inapprox.h"

namespace ci {

std::array<Vec2, 4> Diamond::vertices() const
{
    return {center + scale * (rotation * Vec2{h, 0.0}), center + scale * (rotation * Vec2{0.0, 1.0}),
            center + scale * (rotation * Vec2{-h, 0.0}), center + scale * (rotation * Vec2{0.0, -1.0})};
}

double frame_stretch(const Mat2& A, const Mat2& B, const Mat2& C) { return (C.inverse() * (A - B)).frob(); }

namespace {

struct Normalized {
    std::array<Triangle, 10> tri;
    std::array<std::array<Vec2, 3>, 10> img;  // v at the vertices
    std::array<int, 10> region;
    std::array<Mat2, 5> grad;
    double q, mu;
};

// laminate map of the normalized cell, lambda <= 1/2
Vec2 laminate_map(Vec2 x, double lambda, double h, double q, double mu)
{
    double s;
    if (std::abs(x.y) <= mu)
        s = -q * (1.0 - mu) * x.y;
    else if (x.y > mu)
        s = q * mu * (x.y - 1.0);
    else
        s = q * mu * (x.y + 1.0);
    double y1 = x.x + s;
    double t;
    if (std::abs(y1) <= lambda * h)
        t = (1.0 - lambda) * y1;
    else if (y1 > lambda * h)
        t = lambda * (h - y1);
    else
        t = -lambda * (h + y1);
    return {y1, x.y + t};
}

Normalized normalized_cell(double lambda, double h)
{
    Normalized n;
    double mu = (1.0 - lambda) * h;
    double q = h * lambda / (1.0 - mu);
    double c = q * mu * (1.0 - mu);
    n.q = q;
    n.mu = mu;
    Vec2 xa{-lambda * h + c, mu}, xb{lambda * h + c, mu}, xc{lambda * h - c, -mu}, xd{-lambda * h - c, -mu};
    Vec2 N{0.0, 1.0}, S{0.0, -1.0}, E{h, 0.0}, W{-h, 0.0};
    n.tri = {Triangle{xa, xb, xc}, Triangle{xa, xc, xd}, Triangle{xa, W, xd}, Triangle{xb, E, xc},
             Triangle{xa, xb, N},  Triangle{xd, xc, S},  Triangle{xb, E, N},  Triangle{xd, W, S},
             Triangle{xa, W, N},   Triangle{xc, E, S}};
    n.region = {kBlue, kBlue, kGreen, kGreen, kOrange, kOrange, kRed, kRed, kYellow, kYellow};
    for (auto& t : n.tri) t = t.ccw();
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 3; ++j) n.img[i][j] = laminate_map(n.tri[i][j], lambda, h, q, mu);

    Mat2 At{1.0, 0.0, 1.0 - lambda, 1.0};
    Mat2 Bt{1.0, 0.0, -lambda, 1.0};
    Mat2 Em{1.0, -q * (1.0 - mu), 0.0, 1.0};
    Mat2 Fm{1.0, q * mu, 0.0, 1.0};
    double l1 = lambda * (1.0 - lambda);
    double pG = l1 / ((1.0 - lambda) * (1.0 - h * lambda) - mu);
    double pH = l1 / ((1.0 - lambda) * (1.0 + h * lambda) - mu);
    Mat2 G = Mat2::identity() - pG * outer({-h, 1.0}, {1.0, h});
    Mat2 H = Mat2::identity() - pH * outer({h, 1.0}, {1.0, -h});
    n.grad = {At * Em, Bt * Em, At * Fm, G, H};
    return n;
}

Mat2 interpolated_gradient(const Triangle& t, const std::array<Vec2, 3>& v)
{
    Mat2 X = Mat2::from_cols(t.v1 - t.v0, t.v2 - t.v0);
    Mat2 V = Mat2::from_cols(v[1] - v[0], v[2] - v[0]);
    return V * X.inverse();
}

}  // namespace

CellConstruction build_cell(const Mat2& Ain, const Mat2& Bin, const Mat2& C, double lambda_in, double h)
{
    const Tolerances& tol = tolerances();
    if (!(h > 0.0 && h < 0.125)) throw Error(ErrorCode::invalid_parameter, "build_cell: h must lie in (0, 1/8)");
    if (!(lambda_in >= 0.0 && lambda_in <= 1.0)) throw Error(ErrorCode::invalid_parameter, "build_cell: lambda");
    for (const Mat2* m : {&Ain, &Bin, &C})
        if (std::abs(m->det() - 1.0) > tol.pipeline) throw Error(ErrorCode::invalid_input, "build_cell: det != 1");
    double scale = std::max({1.0, Ain.frob(), Bin.frob()});
    if ((lambda_in * Ain + (1.0 - lambda_in) * Bin - C).frob() > tol.pipeline * scale)
        throw Error(ErrorCode::invalid_input, "build_cell: C is not the lambda-average of A and B");
    Mat2 D = Ain - Bin;
    SingularValues sv = singular_values(D);
    if (sv.s2 > tol.rank * std::max(1.0, sv.s1)) throw Error(ErrorCode::invalid_rank, "build_cell: rank(A-B) = 2");

    CellConstruction cell;
    cell.C = C;
    cell.h = h;
    bool trivial = sv.s1 <= tol.algebraic || lambda_in <= 0.0 || lambda_in >= 1.0;
    cell.swapped = lambda_in > 0.5;
    cell.A = cell.swapped ? Bin : Ain;
    cell.B = cell.swapped ? Ain : Bin;
    double lambda = cell.swapped ? 1.0 - lambda_in : lambda_in;

    Vec2 nh{1.0, 0.0};
    double alpha = 1.0;
    Vec2 bh{0.0, 1.0};
    if (!trivial) {
        Vec2 r1 = D.row1(), r2 = D.row2();
        Vec2 r = norm(r1) >= norm(r2) ? r1 : r2;
        nh = (1.0 / norm(r)) * r;
        if (cell.swapped) nh = -nh;  // A - B with the internal labels
        Vec2 a = (cell.A - cell.B) * nh;
        Vec2 b = C.inverse() * a;
        bh = perp(nh);
        if (dot(bh, b) < 0.0) bh = -bh;
        alpha = 1.0 / dot(b, bh);
    }
    cell.trivial = trivial;
    cell.Pinv = Mat2::from_cols(alpha * nh, bh);
    cell.P = cell.Pinv.inverse();
    Mat2 L = C * cell.Pinv;

    double lam_geom = trivial ? 0.5 : lambda;
    Normalized n = normalized_cell(lam_geom, h);
    cell.lambda = trivial ? (lambda_in <= 0.5 ? lambda : lambda) : lambda;
    cell.q = n.q;
    cell.mu_geom = n.mu;
    cell.region = n.region;

    double resid = 0.0;
    for (int i = 0; i < 10; ++i) {
        Mat2 gi = interpolated_gradient(n.tri[i], n.img[i]);
        resid = std::max(resid, (gi - n.grad[n.region[i]]).frob());
    }
    cell.interp_residual = resid;
    if (resid > 1e-9) throw Error(ErrorCode::construction_failure, "build_cell: interpolation mismatch");

    for (int r = 0; r < 5; ++r) cell.gradients[r] = trivial ? C : L * n.grad[r] * cell.P;
    for (int i = 0; i < 10; ++i) {
        Triangle t{cell.Pinv * n.tri[i].v0, cell.Pinv * n.tri[i].v1, cell.Pinv * n.tri[i].v2};
        cell.triangles[i] = t.ccw();
        Vec2 o = n.img[i][0] - n.grad[n.region[i]] * n.tri[i].v0;
        cell.offsets[i] = trivial ? Vec2{} : L * o;
    }
    cell.diamond.center = {};
    cell.diamond.scale = 1.0;
    cell.diamond.h = h * alpha;
    cell.diamond.rotation = Mat2::from_cols(nh, perp(nh));
    return cell;
}

std::array<PlacedPiece, 10> place_cell(const CellConstruction& cell, Vec2 center, double scale, const Affine& parent)
{
    std::array<PlacedPiece, 10> out;
    Vec2 uc = parent(center);
    for (int i = 0; i < 10; ++i) {
        const Triangle& t = cell.triangles[i];
        Mat2 G = cell.gradient(i);
        out[i].tri = {center + scale * t.v0, center + scale * t.v1, center + scale * t.v2};
        out[i].grad = G;
        out[i].offset = uc + scale * cell.offsets[i] - G * center;
        out[i].region = cell.region[i];
    }
    return out;
}

Vec2 cell_boundary_point(const CellConstruction& cell, double t)
{
    auto v = cell.diamond.vertices();
    int e = static_cast<int>(std::floor(t)) % 4;
    if (e < 0) e += 4;
    double s = t - std::floor(t);
    return (1.0 - s) * v[e] + s * v[(e + 1) % 4];
}

Vec2 cell_eval(const CellConstruction& cell, Vec2 y)
{
    int best = 0;
    double best_slack = -1e300;
    for (int i = 0; i < 10; ++i) {
        const Triangle& t = cell.triangles[i];
        double a = 2.0 * t.signed_area();
        double w = std::min({cross(t.v1 - t.v0, y - t.v0), cross(t.v2 - t.v1, y - t.v1), cross(t.v0 - t.v2, y - t.v2)}) / a;
        if (w > best_slack) {
            best_slack = w;
            best = i;
        }
    }
    return cell.map(best)(y);
}

namespace {

bool all_gradients_in(const CellConstruction& cell, double delta, int stage, bool exact)
{
    for (const Mat2& g : cell.gradients) {
        int s;
        try {
            s = classify(g, delta);
        } catch (const Error&) {
            return false;
        }
        if (exact ? s != stage : s < stage) return false;
    }
    return true;
}

void fill_star(ReplacementCell& rc, const Mat2& M)
{
    const CellConstruction& c = rc.cell;
    const Mat2& major = rc.split.Fplus;  // rho >= 1/2
    const Mat2& minor = rc.split.Fminus;
    double area = 0.0, total = 0.0, err = 0.0;
    for (int i = 0; i < 10; ++i) {
        Mat2 g = c.gradient(i);
        double a = c.triangles[i].area();
        total += a;
        rc.star[i] = dist(g, major) <= dist(g, minor);
        if (rc.star[i]) {
            area += a;
            err = std::max(err, dist(g, M));
        }
    }
    rc.star_fraction = total > 0.0 ? area / total : 0.0;
    rc.star_error = err;
}

ReplacementCell shrink_loop(const Mat2& M, double delta, const SplitResult& s, int input_stage, int target,
                            bool exact, double h_phys, const ReplaceOptions& opt)
{
    ReplacementCell rc;
    rc.split = s;
    rc.input_stage = input_stage;
    double stretch = frame_stretch(s.Fplus, s.Fminus, M);
    for (int tries = 0; tries <= opt.max_retries && h_phys >= opt.h_floor; ++tries, h_phys *= 0.5) {
        double hf = h_phys * stretch;
        if (stretch <= tolerances().algebraic) hf = h_phys;
        if (hf >= 0.125) {
            ++rc.retries;
            continue;
        }
        CellConstruction cell = build_cell(s.Fplus, s.Fminus, M, s.rho, hf);
        if (all_gradients_in(cell, delta, target, exact)) {
            rc.cell = cell;
            rc.h_phys = h_phys;
            rc.target_stage = target;
            fill_star(rc, M);
            return rc;
        }
        ++rc.retries;
    }
    throw Error(ErrorCode::construction_failure, "replacement: h underflow");
}

}  // namespace

ReplacementCell replace_low_stage(const Mat2& M, double delta, const ReplaceOptions& opt)
{
    int k = classify(M, delta);
    if (k >= 2) throw Error(ErrorCode::wrong_entry_point, "replace_low_stage: stage >= 2");
    Mat2 C = cauchy_green(M);
    double z = zeta0(delta);
    SplitResult s;
    int target;
    if (k == 1) {
        int m = v1_index(C, delta);
        s = split(M, 2, 0.75 * std::ldexp(z, -m), delta);
        target = 2 * m + 1;
        return shrink_loop(M, delta, s, k, target, true, opt.h_start, opt);
    }
    double d1 = std::abs(C.a11 - 1.0), d2 = std::abs(C.a22 - (1.0 + delta * delta));
    // d_i in zeta0 [2^-(m_i+1), 2^-m_i]
    int m1 = static_cast<int>(std::floor(std::log2(z / d1)));
    int m2 = static_cast<int>(std::floor(std::log2(z / d2)));
    int m = std::max(1, std::max(m1, m2) + 1);
    s = split(M, 1, 0.75 * std::ldexp(z, -m), delta);
    target = classify(s.Fplus, delta);
    if (target < 1) throw Error(ErrorCode::construction_failure, "replace_low_stage: split children not in V1");
    return shrink_loop(M, delta, s, k, target, true, opt.h_start, opt);
}

ReplacementCell replace_dyadic_stage(const Mat2& M, double delta, double h0, const ReplaceOptions& opt)
{
    int k = classify(M, delta);
    if (k < 2) throw Error(ErrorCode::wrong_entry_point, "replace_dyadic_stage: stage < 2");
    SplitResult s = split(M, dyadic_branch(k), dyadic_eps(k, delta), delta);
    return shrink_loop(M, delta, s, k, k + 1, true, h0, opt);
}

double calibrate_h0(double delta, int k_min, int k_max, int per_stage, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::vector<Mat2> grid;
    for (int k = k_min; k <= k_max; ++k) {
        StageBands b = stage_bands(k, delta);
        const double f[2] = {0.01, 0.99};
        for (double f1 : f)
            for (double f2 : f)
                for (int sg : {1, -1}) {
                    double d1 = b.d1.lo + f1 * (b.d1.hi - b.d1.lo);
                    double d2 = b.d2.lo + f2 * (b.d2.hi - b.d2.lo);
                    grid.push_back(matrix_from_diagonal(1.0 - d1, 1.0 + delta * delta - d2, sg, 0.3 * k));
                }
        for (int i = 0; i < per_stage; ++i) grid.push_back(sample_stage_matrix(k, delta, rng));
    }
    ReplaceOptions opt;
    opt.max_retries = 0;
    for (double h = 0.125; h >= opt.h_floor; h *= 0.5) {
        bool ok = true;
        for (const Mat2& M : grid) {
            try {
                replace_dyadic_stage(M, delta, h, opt);
            } catch (const Error&) {
                ok = false;
                break;
            }
        }
        if (ok) return h;
    }
    throw Error(ErrorCode::construction_failure, "calibrate_h0: no admissible h");
}

}  // namespace ci
