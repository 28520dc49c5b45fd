#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ci/mat2.h"

namespace ci {

// wells diag(1, 1+delta) and diag(1, 1-delta), one rank-one connection along e2 x e2
struct DiagonalWellPair {
    double delta = 0.5;
    Mat2 F1, F2;
};
DiagonalWellPair make_diagonal_wells(double delta);

struct LcMembership {
    bool member = false;
    double lambda = 0.0;
    Mat2 Q;
};
// hull is SO(2) diag(1, 1 - delta + 2 lambda delta), lambda in [0,1]
LcMembership lc_membership(const Mat2& F, double delta, double tol = 1e-9);

double polyconvex_witness(const Mat2& F, double delta);

struct QcViolation {
    std::string what;
    double lambda = 0.0;
    double angle = 0.0;
    double value = 0.0;
};

struct QcReport {
    double delta = 0.0;
    std::size_t samples = 0;
    std::size_t laminates = 0;
    std::size_t rank_scan_points = 0;
    double max_det_excess = 0.0;
    double max_e1_excess = 0.0;
    double max_cg_e1_error = 0.0;
    double max_f_excess = 0.0;
    double min_sv_off_identity = 0.0;  // over the Q scan away from Id
    double max_sv_identity = 0.0;      // at Q = Id
    std::vector<QcViolation> violations;
    bool ok() const { return violations.empty(); }
};
QcReport verify_qc_bounds(double delta, std::size_t samples, std::uint64_t seed = 1, double tol = 1e-9);

}  // namespace ci
