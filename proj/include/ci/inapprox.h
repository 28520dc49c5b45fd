#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ci/mat2.h"

namespace ci {

inline double zeta0(double delta) { return std::ldexp(std::min(delta * delta, 1.0), -4); }

struct Interval {
    double lo, hi;  // open
    bool contains(double x) const { return x > lo && x < hi; }
};

// Bands of V_k for k >= 2: d1 = |c11 - 1|, d2 = |c22 - (1 + d^2)|
struct StageBands {
    double delta;
    double zeta0;
    Interval d1;
    Interval d2;
};

StageBands stage_bands(int k, double delta);

// stage of a Cauchy-Green tensor assumed to be in the hull interior
int classify_cg(const Mat2& C, double delta);
// checks interior membership first
int classify(const Mat2& F, double delta);

// m of V1 membership, 0 if none
int v1_index(const Mat2& C, double delta);

// split size that moves a V_k matrix (k >= 2) into V_{k+1}
double dyadic_eps(int k, double delta);
// branch improving the entry that V_{k+1} tightens
inline int dyadic_branch(int k) { return k % 2 == 0 ? 2 : 1; }

double dist_to_well(const Mat2& F, const Mat2& G);
double dist_to_K(const Mat2& F, double delta);
// 1 if F is at least as close to SO(2)F0 as to SO(2)F0^-1
int nearer_well(const Mat2& F, double delta);

// F = Q U with U upper triangular, det F = 1, C(F) = [[c11, s r],[s r, c22]], r = sqrt(c11 c22 - 1)
Mat2 matrix_from_diagonal(double c11, double c22, int sign, double angle);

// random F in V_k (k >= 2); centre = true puts both deviations at the band centres
Mat2 sample_stage_matrix(int k, double delta, std::mt19937_64& rng, bool centre = false);

struct InApproxStage {
    int k = 0;
    int samples = 0;
    int failures = 0;
    double sup_dist = 0.0;
};

struct InApproxReport {
    double delta = 0.0;
    std::vector<InApproxStage> stages;
    int total_failures() const
    {
        int f = 0;
        for (auto& s : stages) f += s.failures;
        return f;
    }
};

InApproxReport verify_in_approximation(double delta, int samples, int k_min = 2, int k_max = 14,
                                       std::uint64_t seed = 1);

}  // namespace ci
