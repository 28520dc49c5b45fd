#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ci/analysis.h"
#include "ci/ci_engine.h"

namespace ci {

struct RunConfig {
    double delta = 0.5;
    // boundary datum: "branch=1,mu=0.3,lambda=0.2[,angle=t]" or "matrix=a11,a12,a21,a22"
    std::string boundary = "branch=1,mu=0.3,lambda=0.2";
    // "unit-square" or "x0,y0,x1,y1,x2,y2;..." triangles
    std::string domain = "unit-square";
    int max_steps = 6;
    std::size_t cell_budget = 1000000;
    double min_area = 1e-12;  // relative to |domain|
    std::uint64_t seed = 1;
    double h0 = 0.0;  // 0: calibrate
    std::string out = "out";
    bool write_metrics = true;
    bool write_report = true;
    bool write_svg = true;
    bool write_mesh = false;
    std::map<std::string, double> tolerances;  // tol.<name>

    std::string canonical() const;  // one key=value per line, fixed order
    std::string hash() const;       // 16 hex digits of FNV-1a over canonical()
};

// flat key=value text; '#' starts a comment
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
// sets one key; throws config_error on unknown keys or bad values
void set_config_value(RunConfig& c, const std::string& key, const std::string& value);
void validate(const RunConfig& c);

Mat2 parse_boundary(const std::string& spec, double delta);
std::vector<Triangle> parse_domain(const std::string& spec);
EngineConfig engine_config(const RunConfig& c);
void apply_tolerances(const RunConfig& c);

std::string format_real(double v);  // 17 significant digits

void write_metrics_table(std::ostream& os, const MetricsSeries& m, const RunConfig& c);
void write_mesh_dump(std::ostream& os, const IterationState& s, const RunConfig& c);
void write_phase_svg(std::ostream& os, const IterationState& s, const RunConfig& c);
void write_report(std::ostream& os, const RegularityReport& r, const IterationState& s, const RunConfig& c);

// mesh dump back to a state (cells only; domain taken as the cell union)
IterationState read_mesh_dump(std::istream& is);
// plain PBM (P1) raster, rows top to bottom
std::vector<unsigned char> read_pbm(std::istream& is, int& n);

// algebraic and geometric property suites
struct SuiteCheck {
    std::string suite;
    std::string name;
    bool passed = false;
    double value = 0.0;
    double limit = 0.0;
};
struct SuiteReport {
    std::vector<SuiteCheck> checks;
    bool passed() const;
    void print(std::ostream& os) const;  // suite<TAB>check<TAB>PASS|FAIL<TAB>value<TAB>limit
};
struct SuiteOptions {
    double delta = 0.5;
    std::uint64_t seed = 1;
    int samples = 1000;
};
const std::vector<std::string>& suite_names();  // matgeo inapprox cell covering onewell
SuiteReport run_suite(const std::string& name, const SuiteOptions& opt);  // "all" runs every suite

}  // namespace ci
