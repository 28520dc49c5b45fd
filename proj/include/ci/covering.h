#pragma once

#include <vector>

#include "ci/conti_cell.h"

namespace ci {

// covering constants
inline constexpr double kGoodFraction = 1.0 / 32.0;  // v
inline constexpr double kC2 = 42.0;
inline double cover_C0(double h) { return 10.0 * std::floor(1.0 / h); }

// isosceles triangles with base along R e1, height/half-base = 1/h
struct IsoscelesTag {
    Mat2 rotation = Mat2::identity();
    double h = 0.0;
    bool member = false;
};

IsoscelesTag isosceles_tag(const Triangle& t, const Mat2& R, double h, double tol = 1e-9);

enum class ChildKind { good, iso, generic };

struct CoverChild {
    Triangle tri;
    Mat2 grad;
    Vec2 offset;
    ChildKind kind = ChildKind::generic;
    bool star = false;
    int region = -1;  // cell region for good children
};

struct CoverResult {
    std::vector<CoverChild> children;
    double perimeter_good = 0.0;
    double perimeter_rest_iso = 0.0;
    double perimeter_rest_generic = 0.0;
    double parent_area = 0.0;
    double parent_perimeter = 0.0;
    double good_area = 0.0;
    int diamonds = 0;
    int squares = 0;
};

// replacement gadget used by a cover: unit cell plus the star flags
struct Gadget {
    const CellConstruction* cell = nullptr;
    const std::array<bool, 10>* star = nullptr;
    Mat2 R() const { return cell->diamond.rotation; }
    double h() const { return cell->diamond.h; }
};

CoverResult cover_isosceles(const Triangle& T, const Affine& parent, const Gadget& g);
// box corner + R [(0, n h r) x (0, r)]
CoverResult cover_rectangle(Vec2 corner, double r, int n, const Affine& parent, const Gadget& g);
CoverResult cover_generic(const Triangle& T, const Affine& parent, const Gadget& g);
// isosceles cover when T is in the class of the gadget's diamond, generic otherwise
CoverResult cover_auto(const Triangle& T, const Affine& parent, const Gadget& g);
// number of children cover_auto would produce
std::size_t cover_child_count(const Triangle& T, const Gadget& g);

// convenience forms that build the gadget from M
enum class StageRule { A3, A4 };
struct CoverRequest {
    double delta = 0.5;
    StageRule rule = StageRule::A4;
    double h0 = 1.0 / 64.0;
};
ReplacementCell gadget_for(const Mat2& M, const CoverRequest& req);
CoverResult cover_generic(const Triangle& T, const Mat2& M, const CoverRequest& req);
CoverResult cover_isosceles(const Triangle& T, const Mat2& M, const CoverRequest& req);

struct PerimeterLedger {
    double sum_good = 0.0;
    double sum_iso = 0.0;
    double sum_generic = 0.0;
    bool iso_bound_ok = true;      // sum_iso <= C0 Per(T)
    bool generic_bound_ok = true;  // sum_generic <= C2 Per(T)
    bool total_bound_ok = true;    // for cover_isosceles: total <= C2 Per(T)
};

PerimeterLedger perimeter_ledger(const CoverResult& r, double h);

// children areas sum to the parent area and the field agrees with `parent` on the parent's boundary
struct CoverCheck {
    double area_error = 0.0;
    double trace_error = 0.0;
};
CoverCheck check_cover(const Triangle& T, const Affine& parent, const CoverResult& r, int samples_per_edge = 16);

}  // namespace ci
