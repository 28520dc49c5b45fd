#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <omp.h>

#include "ci/cli_export.h"

namespace fs = std::filesystem;
using namespace ci;

namespace {

int cmd_run(const std::string& config_path, const std::vector<std::string>& sets)
{
    RunConfig c;
    try {
        if (!config_path.empty()) c = load_config(config_path);
        for (const std::string& kv : sets) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) throw Error(ErrorCode::config_error, "--set expects key=value, got '" + kv + "'");
            set_config_value(c, kv.substr(0, eq), kv.substr(eq + 1));
        }
        validate(c);
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    apply_tolerances(c);
    EngineConfig ec = engine_config(c);
    std::vector<Triangle> domain = parse_domain(c.domain);
    RunResult rr;
    try {
        rr = run(ec, domain, [](const IterationState& s) {
            const StepMetrics& m = s.metrics.back();
            std::cerr << "step " << m.k << ": cells " << m.cells << ", refined " << m.refined << ", frozen "
                      << format_real(m.frozen) << "\n";
        });
    } catch (const Error& e) {
        std::cerr << "engine failure [" << error_name(e.code()) << "]: " << e.what() << "\n";
        return 1;
    }
    fs::create_directories(c.out);
    const IterationState& s = rr.final_state;
    if (c.write_metrics) {
        std::ofstream f(fs::path(c.out) / "metrics.tsv");
        write_metrics_table(f, rr.metrics, c);
    }
    if (c.write_report) {
        RegularityReport r = regularity_report(rr.metrics, s.area, 3, c.max_steps);
        std::ofstream f(fs::path(c.out) / "report.txt");
        write_report(f, r, s, c);
    }
    if (c.write_svg) {
        std::ofstream f(fs::path(c.out) / "phase.svg");
        write_phase_svg(f, s, c);
    }
    if (c.write_mesh) {
        std::ofstream f(fs::path(c.out) / "mesh.txt");
        write_mesh_dump(f, s, c);
    }
    std::cout << "config_hash " << c.hash() << " seed " << c.seed << " cells " << s.cells.size() << " -> " << c.out
              << "\n";
    return 0;
}

int cmd_verify(const std::string& suite, const SuiteOptions& o)
{
    if (suite != "all") {
        bool known = false;
        for (const std::string& n : suite_names()) known = known || n == suite;
        if (!known) {
            std::cerr << "unknown suite '" << suite << "' (matgeo, inapprox, cell, covering, onewell, all)\n";
            return 2;
        }
    }
    SuiteReport r;
    try {
        r = run_suite(suite, o);
    } catch (const Error& e) {
        std::cerr << "suite failure [" << error_name(e.code()) << "]: " << e.what() << "\n";
        return 1;
    }
    r.print(std::cout);
    std::cout << (r.passed() ? "PASS" : "FAIL") << "\n";
    return r.passed() ? 0 : 1;
}

int cmd_dim(const std::string& input, int jmin, int jmax, double d)
{
    std::ifstream f(input);
    if (!f) {
        std::cerr << "cannot read '" << input << "'\n";
        return 1;
    }
    std::vector<Segment> segs;
    try {
        std::string first;
        f >> first;
        f.seekg(0);
        if (first == "P1") {
            int n = 0;
            std::vector<unsigned char> r = read_pbm(f, n);
            segs = raster_interfaces(r, n);
        } else {
            segs = interface_segments(read_mesh_dump(f));
        }
        BoxDimension b = box_dimension(segs, jmin, jmax, d);
        std::cout << "eps\tN_eps\n";
        for (const BoxCount& c : b.table) std::cout << format_real(c.eps) << '\t' << c.count << '\n';
        std::cout << "estimate: " << format_real(b.estimate) << "\n";
        std::cout << "r_squared: " << format_real(b.r_squared) << "\n";
        std::cout << "m_d(" << format_real(d) << "): " << format_real(b.m_d) << "\n";
    } catch (const Error& e) {
        std::cerr << "dim: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    if (const char* t = std::getenv("CI_THREADS")) {
        int n = std::atoi(t);
        if (n > 0) omp_set_num_threads(n);
    }
    CLI::App app{"two-well convex integration driver"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "run the refinement engine and write artifacts");
    std::string config_path;
    std::vector<std::string> sets;
    double delta = 0.0;
    std::string boundary, domain, out;
    int steps = -1;
    long long budget = -1, seed = -1;
    double min_area = -1.0, h0 = -1.0;
    bool mesh = false, no_svg = false;
    run_cmd->add_option("-c,--config", config_path, "key=value config file")->check(CLI::ExistingFile);
    run_cmd->add_option("--set", sets, "override, key=value");
    run_cmd->add_option("--delta", delta, "well parameter");
    run_cmd->add_option("--boundary", boundary, "branch=1,mu=..,lambda=.. or matrix=a11,a12,a21,a22");
    run_cmd->add_option("--domain", domain, "unit-square or x0,y0,x1,y1,x2,y2;...");
    run_cmd->add_option("--steps", steps, "refinement steps");
    run_cmd->add_option("--budget", budget, "global cell budget");
    run_cmd->add_option("--min-area", min_area, "freeze cells below this fraction of the domain");
    run_cmd->add_option("--seed", seed, "seed");
    run_cmd->add_option("--h0", h0, "fixed dyadic aspect (0: calibrate)");
    run_cmd->add_option("-o,--out", out, "output directory");
    run_cmd->add_flag("--mesh", mesh, "write the mesh dump");
    run_cmd->add_flag("--no-svg", no_svg, "skip the phase plot");

    auto* verify_cmd = app.add_subcommand("verify", "run a property suite");
    std::string suite = "all";
    SuiteOptions so;
    verify_cmd->add_option("suite", suite, "matgeo, inapprox, cell, covering, onewell or all");
    verify_cmd->add_option("--delta", so.delta, "well parameter");
    verify_cmd->add_option("--seed", so.seed, "seed");
    verify_cmd->add_option("--samples", so.samples, "samples per check")->check(CLI::PositiveNumber);

    auto* dim_cmd = app.add_subcommand("dim", "box-counting dimension of the phase interfaces");
    std::string input;
    int jmin = 4, jmax = 10;
    double dexp = 1.0;
    dim_cmd->add_option("input", input, "mesh dump or plain PBM raster")->required();
    dim_cmd->add_option("--jmin", jmin, "coarsest eps = 2^-jmin");
    dim_cmd->add_option("--jmax", jmax, "finest eps = 2^-jmax");
    dim_cmd->add_option("--d", dexp, "exponent for m_d");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (run_cmd->parsed()) {
        std::vector<std::string> all = sets;
        auto put = [&](const char* k, const std::string& v) { all.push_back(std::string(k) + "=" + v); };
        if (run_cmd->count("--delta")) put("delta", format_real(delta));
        if (!boundary.empty()) put("boundary", boundary);
        if (!domain.empty()) put("domain", domain);
        if (run_cmd->count("--steps")) put("steps", std::to_string(steps));
        if (run_cmd->count("--budget")) put("budget", std::to_string(budget));
        if (run_cmd->count("--min-area")) put("min_area", format_real(min_area));
        if (run_cmd->count("--seed")) put("seed", std::to_string(seed));
        if (run_cmd->count("--h0")) put("h0", format_real(h0));
        if (!out.empty()) put("out", out);
        if (mesh) put("mesh", "1");
        if (no_svg) put("svg", "0");
        return cmd_run(config_path, all);
    }
    if (verify_cmd->parsed()) return cmd_verify(suite, so);
    if (dim_cmd->parsed()) {
        if (jmax - jmin < 1) {
            std::cerr << "dim: need jmax > jmin\n";
            return 2;
        }
        return cmd_dim(input, jmin, jmax, dexp);
    }
    return 2;
}
