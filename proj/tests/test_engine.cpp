#include <doctest.h>

#include <random>

#include "ci/ci_engine.h"
#include "ci/inapprox.h"
#include "raster_oracle.h"

using namespace ci;

namespace {

EngineConfig small_config(int k, std::size_t budget = 5000)
{
    std::mt19937_64 rng(5);
    EngineConfig cfg;
    cfg.delta = 0.5;
    cfg.M = sample_stage_matrix(k, 0.5, rng, true);
    cfg.max_steps = 3;
    cfg.cell_budget = budget;
    cfg.h0 = 1.0 / 8.0;
    return cfg;
}

bool same_cells(const IterationState& a, const IterationState& b)
{
    if (a.cells.size() != b.cells.size()) return false;
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        const CellState &x = a.cells[i], &y = b.cells[i];
        for (int c = 0; c < 3; ++c)
            if (x.tri[c].x != y.tri[c].x || x.tri[c].y != y.tri[c].y) return false;
        if (dist(x.grad, y.grad) != 0.0 || x.offset.x != y.offset.x || x.offset.y != y.offset.y) return false;
        if (x.stage != y.stage || x.frozen != y.frozen || x.id != y.id || x.parent != y.parent) return false;
    }
    return true;
}

IterationState uniform_state(const Mat2& G, double delta)
{
    IterationState s;
    s.delta = delta;
    s.domain = unit_square();
    for (std::size_t i = 0; i < s.domain.size(); ++i) {
        CellState c;
        c.tri = s.domain[i];
        c.grad = G;
        c.id = static_cast<std::int64_t>(i);
        s.cells.push_back(c);
    }
    return s;
}

}  // namespace

TEST_CASE("initialisation")
{
    double delta = 0.5;
    Mat2 M = coords_to_matrix({1, 0.3, 0.2, Mat2::identity()}, delta);
    IterationState s = init(unit_square(), M, delta, 1.0 / 64.0);
    REQUIRE(s.cells.size() == 2);
    for (const CellState& c : s.cells) CHECK(c.stage == classify(M, delta));
    CHECK(s.area == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.metrics.size() == 1);

    CHECK_THROWS_AS(init(unit_square(), Mat2{1.0, delta, 0.0, 1.0}, delta), Error);
    CHECK_THROWS_AS(init(unit_square(), Mat2::identity(), delta), Error);
    std::vector<Triangle> overlap = {{{0, 0}, {1, 0}, {0, 1}}, {{0.1, 0.1}, {1, 0.1}, {0.1, 1}}};
    CHECK_THROWS_AS(init(overlap, M, delta, 1.0 / 64.0), Error);
    try {
        init(unit_square(), make_diagonal_wells(0.5), 0.5);
        FAIL("expected wrong_entry_point");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::wrong_entry_point);
    }
}

TEST_CASE("zero steps return the affine state")
{
    EngineConfig cfg = small_config(4);
    cfg.max_steps = 0;
    RunResult r = run(cfg, unit_square());
    CHECK(r.final_state.cells.size() == 2);
    CHECK(r.metrics.size() == 1);
    for (const CellState& c : r.final_state.cells) CHECK(dist(c.grad, cfg.M) == 0.0);
}

TEST_CASE("a step from a stage-0 triangle keeps the good fraction")
{
    double delta = 0.5;
    Mat2 M = coords_to_matrix({1, 0.3, 0.2, Mat2::identity()}, delta);
    std::vector<Triangle> T = {{{0.0, 0.0}, {1.0, 0.0}, {0.3, 0.8}}};
    IterationState s = init(T, M, delta, 1.0 / 64.0);
    EngineConfig cfg;
    cfg.delta = delta;
    cfg.M = M;
    IterationState n = step(s, cfg);
    const StepMetrics& m = n.metrics.back();
    CHECK(m.refined == 1);
    CHECK(m.good_area / m.refined_area >= 1.0 / 32.0);
    CHECK(m.min_good_fraction >= 1.0 / 32.0);
    CHECK(n.a3_h_values.size() == 1);
    InvariantReport inv = check_invariants(n);
    CHECK(inv.area_error < 1e-12);
    CHECK(inv.continuity_error < 1e-10);
    CHECK(inv.trace_error < 1e-12);
    CHECK(inv.stage_violations == 0);
    CHECK(inv.overlaps == 0);
}

TEST_CASE("small runs keep the invariants after every step")
{
    for (int k : {2, 5}) {
        EngineConfig cfg = small_config(k);
        IterationState prev;
        bool first = true;
        run(cfg, unit_square(), [&](const IterationState& s) {
            InvariantReport inv = check_invariants(s);
            CHECK(inv.area_error < 1e-12);
            CHECK(inv.continuity_error < 1e-9);
            CHECK(inv.trace_error < 1e-10);
            CHECK(inv.det_error < 1e-10);
            CHECK(inv.stage_violations == 0);
            CHECK(inv.overlaps == 0);
            CHECK(s.cells.size() <= cfg.cell_budget);
            if (!first) CHECK(stage_monotonicity_violations(prev, s) == 0);
            prev = s;
            first = false;
        });
        CHECK(prev.a4_h_values.size() == 1);
        CHECK(prev.a3_h_values.empty());
        for (std::size_t i = 1; i < prev.metrics.size(); ++i)
            CHECK(prev.metrics[i].mean_dist <= prev.metrics[i - 1].mean_dist + 1e-15);
    }
}

TEST_CASE("determinism and serial equivalence")
{
    EngineConfig cfg = small_config(4);
    RunResult a = run(cfg, unit_square());
    RunResult b = run(cfg, unit_square());
    CHECK(same_cells(a.final_state, b.final_state));
    REQUIRE(a.metrics.size() == b.metrics.size());
    for (std::size_t i = 0; i < a.metrics.size(); ++i) {
        CHECK(a.metrics[i].l1_chi == b.metrics[i].l1_chi);
        CHECK(a.metrics[i].perim_sum == b.metrics[i].perim_sum);
        CHECK(a.metrics[i].cells == b.metrics[i].cells);
    }

    IterationState s = init(unit_square(), cfg.M, cfg.delta, cfg.h0);
    for (int k = 0; k < 3; ++k) {
        IterationState p = step(s, cfg), q = step_serial(s, cfg);
        CHECK(same_cells(p, q));
        s = p;
    }
    cfg.parallel = false;
    RunResult c = run(cfg, unit_square());
    CHECK(same_cells(a.final_state, c.final_state));
}

TEST_CASE("budget exhaustion freezes cells")
{
    EngineConfig cfg = small_config(4, 1000);
    RunResult r = run(cfg, unit_square());
    CHECK(r.final_state.cells.size() <= 1000);
    CHECK(r.metrics.back().frozen > 0.0);
    std::size_t frozen = 0;
    for (const CellState& c : r.final_state.cells) frozen += c.frozen;
    CHECK(frozen > 0);
}

TEST_CASE("phase indicator")
{
    double d = 0.5;
    IterationState a = uniform_state(Mat2::rotation(0.4) * Mat2{1.0, d, 0.0, 1.0}, d);
    for (unsigned char x : chi(a)) CHECK(x == 1);
    for (unsigned char x : chi(a, 2)) CHECK(x == 0);
    IterationState b = uniform_state(Mat2{1.0, -d, 0.0, 1.0}, d);
    for (unsigned char x : chi(b)) CHECK(x == 0);

    EngineConfig cfg = small_config(4);
    cfg.max_steps = 1;
    IterationState s = run(cfg, unit_square()).final_state;
    std::vector<unsigned char> c1 = chi(s), c2 = chi(s, 2);
    double a1 = 0.0, a2 = 0.0, plus = 0.0;
    for (std::size_t i = 0; i < s.cells.size(); ++i) {
        a1 += c1[i] * s.cells[i].tri.area();
        a2 += c2[i] * s.cells[i].tri.area();
        Mat2 G = s.cells[i].grad;
        if (oracle::rot_dist2(G, Mat2{1.0, d, 0.0, 1.0}) <= oracle::rot_dist2(G, Mat2{1.0, -d, 0.0, 1.0})) plus += s.cells[i].tri.area();
    }
    CHECK(a1 + a2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a1 == doctest::Approx(plus).epsilon(1e-12));
    CHECK(a1 > 0.0);
    CHECK(a2 > 0.0);
}
