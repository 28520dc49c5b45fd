#pragma once

#include <array>
#include <vector>

#include "ci/geometry.h"
#include "ci/matgeo.h"

namespace ci {

// center + scale R {+-h e1, +-e2}
struct Diamond {
    Vec2 center;
    double scale = 1.0;
    double h = 0.1;
    Mat2 rotation = Mat2::identity();

    std::array<Vec2, 4> vertices() const;  // E, N, W, S
    double area() const { return 2.0 * h * scale * scale; }
    double perimeter() const { return 4.0 * scale * std::hypot(h, 1.0); }
};

enum Region { kBlue = 0, kGreen = 1, kOrange = 2, kRed = 3, kYellow = 4 };

struct CellConstruction {
    Diamond diamond;
    std::array<Triangle, 10> triangles{};
    std::array<int, 10> region{};
    // A~E, B~E, A~F, G, H in the physical frame
    std::array<Mat2, 5> gradients{};
    std::array<Vec2, 10> offsets{};
    double lambda = 0.0;  // weight of A, <= 1/2
    double h = 0.0;       // frame h
    double q = 0.0;
    double mu_geom = 0.0;
    Mat2 A, B, C;
    bool swapped = false;  // input A and B exchanged to get lambda <= 1/2
    bool trivial = false;
    Mat2 P = Mat2::identity();
    Mat2 Pinv = Mat2::identity();
    double interp_residual = 0.0;

    Mat2 gradient(int tri) const { return gradients[region[tri]]; }
    bool a_side(int tri) const { return region[tri] == kBlue || region[tri] == kOrange; }
    Affine map(int tri) const { return {gradient(tri), offsets[tri]}; }
};

// |C^-1 (A - B)| for the aspect conversion
double frame_stretch(const Mat2& A, const Mat2& B, const Mat2& C);

CellConstruction build_cell(const Mat2& A, const Mat2& B, const Mat2& C, double lambda, double h);

// copy of the cell at center + scale * y, with the parent map x -> C x + o outside
struct PlacedPiece {
    Triangle tri;
    Mat2 grad;
    Vec2 offset;
    int region;
};
std::array<PlacedPiece, 10> place_cell(const CellConstruction& cell, Vec2 center, double scale,
                                       const Affine& parent);

// boundary point of the unit-placed cell, t in [0,4)
Vec2 cell_boundary_point(const CellConstruction& cell, double t);
// evaluate the unit-placed cell map at y (nearest triangle containing y)
Vec2 cell_eval(const CellConstruction& cell, Vec2 y);

struct ReplacementCell {
    CellConstruction cell;
    double h_phys = 0.0;  // physical aspect used
    int input_stage = 0;
    int target_stage = 0;
    int retries = 0;  // h halvings
    SplitResult split;
    // star region: triangles closer to the majority child
    std::array<bool, 10> star{};
    double star_fraction = 0.0;
    double star_error = 0.0;  // max |grad u - M| on the star region
};

struct ReplaceOptions {
    double h_start = 0.125;
    double h_floor = std::ldexp(1.0, -24);
    int max_retries = 24;
};

ReplacementCell replace_low_stage(const Mat2& M, double delta, const ReplaceOptions& opt = {});
ReplacementCell replace_dyadic_stage(const Mat2& M, double delta, double h0, const ReplaceOptions& opt = {});

// largest h in {1/8, 1/16, ...} for which the dyadic replacement succeeds without retries
// on band-extremal inputs of stages k_min..k_max
double calibrate_h0(double delta, int k_min = 2, int k_max = 16, int per_stage = 24, unsigned seed = 7);

}  // namespace ci
