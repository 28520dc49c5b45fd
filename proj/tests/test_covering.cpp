#include <doctest.h>

#include <cmath>
#include <random>

#include "ci/covering.h"
#include "ci/inapprox.h"

using namespace ci;

namespace {

struct Fixture {
    ReplacementCell rc;
    Gadget g;
    Mat2 M;
    explicit Fixture(int k = 4)
    {
        std::mt19937_64 rng(21);
        M = sample_stage_matrix(k, 0.5, rng);
        rc = replace_dyadic_stage(M, 0.5, 1.0 / 64.0);
        g = Gadget{&rc.cell, &rc.star};
    }
};

}  // namespace

TEST_CASE("isosceles cover: one diamond and two half-size copies")
{
    Fixture f;
    double h = f.g.h();
    Mat2 R = f.g.R();
    Triangle T{R * Vec2{-h, 0.0}, R * Vec2{h, 0.0}, R * Vec2{0.0, -1.0}};
    REQUIRE(isosceles_tag(T, R, h).member);
    CoverResult r = cover_isosceles(T, Affine{f.M, {}}, f.g);
    CHECK(r.diamonds == 1);
    CHECK(r.children.size() == 12);
    int iso = 0;
    for (const CoverChild& c : r.children) {
        if (c.kind != ChildKind::iso) continue;
        ++iso;
        CHECK(isosceles_tag(c.tri, R, h).member);
        CHECK(c.tri.area() == doctest::Approx(0.25 * T.area()).epsilon(1e-12));
        // one of conv{(-h,0),(0,0),(-h/2,-1/2)} and its mirror
        Triangle L{R * Vec2{-h, 0.0}, R * Vec2{0.0, 0.0}, R * Vec2{-0.5 * h, -0.5}};
        Triangle Rr{R * Vec2{h, 0.0}, R * Vec2{0.0, 0.0}, R * Vec2{0.5 * h, -0.5}};
        auto same = [](const Triangle& a, const Triangle& b) {
            int hit = 0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    if (norm(a[i] - b[j]) < 1e-12) ++hit;
            return hit == 3;
        };
        CHECK((same(c.tri, L) || same(c.tri, Rr)));
    }
    CHECK(iso == 2);
    CHECK(r.good_area == doctest::Approx(0.5 * T.area()).epsilon(1e-12));
    CoverCheck ck = check_cover(T, Affine{f.M, {}}, r);
    CHECK(ck.area_error < 1e-14);
    CHECK(ck.trace_error < 1e-12);
    PerimeterLedger l = perimeter_ledger(r, h);
    CHECK(l.iso_bound_ok);
    CHECK(l.total_bound_ok);
    Triangle wrong{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    CHECK_THROWS_AS(cover_isosceles(wrong, Affine{f.M, {}}, f.g), Error);
}

TEST_CASE("rectangle cover child counts")
{
    Fixture f;
    Affine P{f.M, {}};
    CoverResult one = cover_rectangle({0.0, 0.0}, 1.0, 1, P, f.g);
    CHECK(one.diamonds == 1);
    CHECK(one.children.size() == 14);
    int iso = 0;
    for (const CoverChild& c : one.children) iso += c.kind == ChildKind::iso;
    CHECK(iso == 0);

    CoverResult three = cover_rectangle({0.0, 0.0}, 1.0, 3, P, f.g);
    CHECK(three.children.size() == 38);
    double area = 0.0;
    for (const CoverChild& c : three.children) area += c.tri.area();
    CHECK(area == doctest::Approx(3.0 * f.g.h()).epsilon(1e-12));
    CHECK(three.good_area == doctest::Approx(1.5 * f.g.h()).epsilon(1e-12));
    CHECK_THROWS_AS(cover_rectangle({0.0, 0.0}, 1.0, 0, P, f.g), Error);
    CHECK_THROWS_AS(cover_rectangle({0.0, 0.0}, 1.0, 1000000, P, f.g), Error);
}

TEST_CASE("generic cover: right triangle and equilateral")
{
    Fixture f;
    Affine P{f.M, {0.1, -0.2}};
    Triangle T{{0.0, 0.0}, {1.0, 0.0}, {0.0, 3.0}};
    CoverResult r = cover_generic(T, P, f.g);
    CHECK(r.squares == 3);
    CHECK(r.good_area / T.area() >= kGoodFraction);
    CoverCheck ck = check_cover(T, P, r, 64);
    CHECK(ck.area_error < 1e-13);
    CHECK(ck.trace_error < 1e-12);
    PerimeterLedger l = perimeter_ledger(r, f.g.h());
    CHECK(l.generic_bound_ok);
    CHECK(l.iso_bound_ok);

    Triangle E{{0.0, 0.0}, {1.0, 0.0}, {0.5, 0.5 * std::sqrt(3.0)}};
    CoverResult e = cover_generic(E, P, f.g);
    CHECK(e.squares == 2);
    CHECK(e.good_area / E.area() >= kGoodFraction);
    CoverCheck ce = check_cover(E, P, e, 64);
    CHECK(ce.area_error < 1e-13);
    CHECK(ce.trace_error < 1e-12);
    CHECK(cover_child_count(E, f.g) == e.children.size());
}

TEST_CASE("good fraction on random triangles and both rules")
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Fixture a4(6);
    ReplacementCell a3 = replace_low_stage(coords_to_matrix({1, 0.3, 0.2, Mat2::identity()}, 0.5), 0.5);
    Gadget g3{&a3.cell, &a3.star};
    for (int i = 0; i < 60; ++i) {
        Triangle T{{U(rng), U(rng)}, {U(rng), U(rng)}, {U(rng), U(rng)}};
        if (T.area() < 1e-3) continue;
        for (const Gadget* g : {&a4.g, &g3}) {
            CoverResult r = cover_auto(T, Affine{Mat2::identity(), {}}, *g);
            CHECK(r.good_area / T.area() >= kGoodFraction);
            CHECK(check_cover(T, Affine{Mat2::identity(), {}}, r).area_error < 1e-12);
            CHECK(perimeter_ledger(r, g->h()).generic_bound_ok);
        }
    }
}

TEST_CASE("empty cover ledger")
{
    CoverResult r;
    PerimeterLedger l = perimeter_ledger(r, 0.1);
    CHECK(l.sum_good == 0.0);
    CHECK(l.sum_iso == 0.0);
    CHECK(l.sum_generic == 0.0);
}
