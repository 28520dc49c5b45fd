#pragma once

#include "ci/mat2.h"

namespace ci {

struct WellPair {
    double delta;
    Mat2 F0;
    Mat2 F0inv;
    // D Q F0 = [[1,0],[dbar,1]] and D Q F0inv = [[1,0],[-dbar,1]]
    double delta_bar;
    Mat2 Q;
    Mat2 D;
    Mat2 tilde_plus;
    Mat2 tilde_minus;
};

WellPair make_wells(double delta);

// distance between the wells SO(2)F0 and SO(2)F0^-1
double well_distance(double delta);

// A_1(l) = [[1, d(1-2l)],[0,1]],  A_2(l) = F0 - 2 l d v (x) e1
Mat2 laminate_base(int branch, double lambda, double delta);

struct RankOneParams {
    Mat2 Q;
    Vec2 w;
    Vec2 u;
    double gamma;
};

// Q A_b(1-l) = A_b(l) + w (x) u
RankOneParams rank_one_params(int branch, double lambda, double delta);

struct LaminateCoords {
    int branch = 1;
    double mu = 0.0;
    double lambda = 0.0;
    Mat2 rotation = Mat2::identity();
};

// R F_b(mu, l)
Mat2 coords_to_matrix(const LaminateCoords& c, double delta);
// C_b(mu, l) from the closed-form entries
Mat2 coords_to_cg(const LaminateCoords& c, double delta);

LaminateCoords matrix_to_coords(const Mat2& F, int branch, double delta);

enum class Membership { interior, boundary, outside };
const char* membership_name(Membership m);

// c11 <= 1, c22 <= 1 + d^2, c11 c22 >= 1, det C = 1
Membership cg_membership(const Mat2& C, double delta, double margin);
Membership cg_membership(const Mat2& C, double delta);

struct SplitResult {
    double rho = 1.0;
    double mu_star = 0.0;
    Mat2 Fplus;
    Mat2 Fminus;
    int chi = 1;
    // diagnostics
    int branch = 1;
    double lambda = 0.0;
    double mu = 0.0;
    double eps0 = 0.0;
};

// eps0 of F for the given branch: 1 - c11 (branch 1), 1 + d^2 - c22 (branch 2)
double split_eps0(const Mat2& F, int branch, double delta);

SplitResult split(const Mat2& F, int branch, double eps, double delta);

// Lipschitz constant of C(.) on the hull
inline double cg_lipschitz(double delta) { return 2.0 * std::sqrt(2.0 + delta * delta); }

}  // namespace ci
