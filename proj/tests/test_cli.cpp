#include <doctest.h>

#include <sstream>

#include "ci/cli_export.h"

using namespace ci;

TEST_CASE("config parsing and hashing")
{
    RunConfig a = parse_config("# comment\ndelta = 0.5\nmax_steps=4\nboundary=branch=2,mu=0.3,lambda=0.2\n");
    CHECK(a.delta == 0.5);
    CHECK(a.max_steps == 4);
    CHECK(a.boundary == "branch=2,mu=0.3,lambda=0.2");
    RunConfig b = parse_config(a.canonical());
    CHECK(b.canonical() == a.canonical());
    CHECK(b.hash() == a.hash());
    CHECK(a.hash().size() == 16);
    b.seed = 2;
    CHECK(b.hash() != a.hash());

    CHECK_THROWS_AS(parse_config("nonsense=1\n"), Error);
    CHECK_THROWS_AS(parse_config("delta=abc\n"), Error);
    RunConfig c;
    CHECK_THROWS_AS(set_config_value(c, "max_steps", "two"), Error);
    set_config_value(c, "max_steps", "-1");
    CHECK_THROWS_AS(validate(c), Error);
    c.max_steps = 2;
    validate(c);
    c.delta = -1.0;
    CHECK_THROWS_AS(validate(c), Error);
}

TEST_CASE("boundary and domain strings")
{
    Mat2 M = parse_boundary("branch=1,mu=0.3,lambda=0.2", 0.5);
    CHECK(dist(M, coords_to_matrix({1, 0.3, 0.2, Mat2::identity()}, 0.5)) == 0.0);
    Mat2 R = parse_boundary("branch=1,mu=0.3,lambda=0.2,angle=0.5", 0.5);
    CHECK(dist(R, Mat2::rotation(0.5) * M) < 1e-15);
    Mat2 X = parse_boundary("matrix=1,0.2,0,1", 0.5);
    CHECK(X.a12 == 0.2);
    for (const char* bad : {"branch=3,mu=0.3,lambda=0.2", "branch=1,mu=0.3", "mu=0.3,lambda=0.2,branch=x", "matrix=1,2,3", ""})
        CHECK_THROWS_AS(parse_boundary(bad, 0.5), Error);

    CHECK(parse_domain("unit-square").size() == 2);
    std::vector<Triangle> t = parse_domain("0,0,1,0,0,1;1,0,1,1,0,1");
    CHECK(t.size() == 2);
    CHECK(t[1].v1.y == 1.0);
    CHECK_THROWS_AS(parse_domain("0,0,1,0"), Error);
}

TEST_CASE("writers embed the config hash and round trip the mesh")
{
    RunConfig c;
    c.max_steps = 1;
    c.cell_budget = 7000;
    c.h0 = 1.0 / 64.0;
    validate(c);
    std::ostringstream tsv, mesh, svg;
    RunResult r = run(engine_config(c), parse_domain(c.domain));
    CHECK(r.final_state.cells.size() > 2);
    write_metrics_table(tsv, r.metrics, c);
    write_mesh_dump(mesh, r.final_state, c);
    write_phase_svg(svg, r.final_state, c);
    CHECK(tsv.str().find(c.hash()) != std::string::npos);
    CHECK(mesh.str().find(c.hash()) != std::string::npos);
    CHECK(svg.str().find(c.hash()) != std::string::npos);
    std::istringstream in(mesh.str());
    IterationState back = read_mesh_dump(in);
    REQUIRE(back.cells.size() == r.final_state.cells.size());
    for (std::size_t i = 0; i < back.cells.size(); ++i) {
        CHECK(dist(back.cells[i].grad, r.final_state.cells[i].grad) == 0.0);
        CHECK(back.cells[i].tri.v2.x == r.final_state.cells[i].tri.v2.x);
    }
    CHECK(format_real(0.1) == "0.10000000000000001");
}

TEST_CASE("pbm reader")
{
    std::istringstream in("P1\n# c\n3 3\n1 0 1\n0 0 0\n1 1 1\n");
    int n = 0;
    std::vector<unsigned char> r = read_pbm(in, n);
    CHECK(n == 3);
    REQUIRE(r.size() == 9);
    // rows come back from y = 0 upwards
    CHECK(r[0] == 1);
    CHECK(r[1] == 1);
    CHECK(r[6] == 1);
    CHECK(r[7] == 0);
}

TEST_CASE("suites")
{
    CHECK(suite_names().size() == 5);
    SuiteOptions o;
    o.samples = 200;
    SuiteReport r = run_suite("matgeo", o);
    CHECK(r.passed());
    CHECK_FALSE(r.checks.empty());
    CHECK_THROWS_AS(run_suite("nope", o), Error);
}
