#include "ci/cli_export.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "ci/inapprox.h"
#include "ci/matgeo.h"

namespace ci {

namespace {

std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void config_fail(const std::string& msg) { throw Error(ErrorCode::config_error, msg); }

double to_real(const std::string& key, const std::string& v)
{
    std::string t = trim(v);
    double x = 0.0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty())
        config_fail("'" + key + "': expected a number, got '" + v + "'");
    return x;
}

long long to_int(const std::string& key, const std::string& v)
{
    std::string t = trim(v);
    long long x = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty())
        config_fail("'" + key + "': expected an integer, got '" + v + "'");
    return x;
}

bool to_bool(const std::string& key, const std::string& v)
{
    std::string t = trim(v);
    if (t == "1" || t == "true" || t == "on" || t == "yes") return true;
    if (t == "0" || t == "false" || t == "off" || t == "no") return false;
    config_fail("'" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<std::string> split_on(const std::string& s, char c)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, c)) out.push_back(trim(cur));
    return out;
}

double* tolerance_slot(const std::string& name)
{
    Tolerances& t = tolerances();
    if (name == "algebraic") return &t.algebraic;
    if (name == "pipeline") return &t.pipeline;
    if (name == "margin") return &t.margin;
    if (name == "rotation") return &t.rotation;
    if (name == "rank") return &t.rank;
    return nullptr;
}

}  // namespace

std::string format_real(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string RunConfig::canonical() const
{
    std::ostringstream os;
    os << "delta=" << format_real(delta) << "\n";
    os << "boundary=" << boundary << "\n";
    os << "domain=" << domain << "\n";
    os << "steps=" << max_steps << "\n";
    os << "budget=" << cell_budget << "\n";
    os << "min_area=" << format_real(min_area) << "\n";
    os << "seed=" << seed << "\n";
    os << "h0=" << format_real(h0) << "\n";
    for (const auto& [k, v] : tolerances) os << "tol." << k << "=" << format_real(v) << "\n";
    return os.str();
}

std::string RunConfig::hash() const
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : canonical()) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void set_config_value(RunConfig& c, const std::string& key_in, const std::string& value)
{
    std::string key = trim(key_in);
    std::string v = trim(value);
    if (key == "delta") c.delta = to_real(key, v);
    else if (key == "boundary") c.boundary = v;
    else if (key == "domain") c.domain = v;
    else if (key == "steps" || key == "max_steps") c.max_steps = static_cast<int>(to_int(key, v));
    else if (key == "budget" || key == "cell_budget") {
        long long b = to_int(key, v);
        if (b < 1) config_fail("'budget' must be positive");
        c.cell_budget = static_cast<std::size_t>(b);
    }
    else if (key == "min_area") c.min_area = to_real(key, v);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(to_int(key, v));
    else if (key == "h0") c.h0 = to_real(key, v);
    else if (key == "out") c.out = v;
    else if (key == "metrics") c.write_metrics = to_bool(key, v);
    else if (key == "report") c.write_report = to_bool(key, v);
    else if (key == "svg") c.write_svg = to_bool(key, v);
    else if (key == "mesh") c.write_mesh = to_bool(key, v);
    else if (key.rfind("tol.", 0) == 0) {
        std::string name = key.substr(4);
        if (!tolerance_slot(name)) config_fail("unknown tolerance '" + name + "'");
        double t = to_real(key, v);
        if (!(t > 0.0)) config_fail("'" + key + "' must be positive");
        c.tolerances[name] = t;
    }
    else config_fail("unknown key '" + key + "'");
}

RunConfig parse_config(const std::string& text)
{
    RunConfig c;
    std::istringstream is(text);
    std::string line;
    int n = 0;
    while (std::getline(is, line)) {
        ++n;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) config_fail("line " + std::to_string(n) + ": expected key=value");
        set_config_value(c, line.substr(0, eq), line.substr(eq + 1));
    }
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream f(path);
    if (!f) config_fail("cannot read config '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

Mat2 parse_boundary(const std::string& spec, double delta)
{
    std::map<std::string, std::string> kv;
    std::vector<double> matrix;
    bool in_matrix = false;
    for (const std::string& part : split_on(spec, ',')) {
        auto eq = part.find('=');
        if (eq == std::string::npos) {
            if (!in_matrix) config_fail("boundary: expected key=value in '" + spec + "'");
            matrix.push_back(to_real("boundary", part));
            continue;
        }
        std::string k = trim(part.substr(0, eq)), v = trim(part.substr(eq + 1));
        if (k == "matrix") {
            in_matrix = true;
            matrix.push_back(to_real("boundary", v));
            continue;
        }
        in_matrix = false;
        if (kv.count(k)) config_fail("boundary: repeated key '" + k + "'");
        kv[k] = v;
    }
    if (!matrix.empty()) {
        if (matrix.size() != 4 || !kv.empty()) config_fail("boundary: matrix needs exactly 4 entries");
        return {matrix[0], matrix[1], matrix[2], matrix[3]};
    }
    for (const auto& [k, v] : kv)
        if (k != "branch" && k != "mu" && k != "lambda" && k != "angle") config_fail("boundary: unknown key '" + k + "'");
    if (!kv.count("branch") || !kv.count("mu") || !kv.count("lambda"))
        config_fail("boundary: need branch, mu and lambda (or matrix=a11,a12,a21,a22)");
    LaminateCoords lc;
    long long b = to_int("branch", kv["branch"]);
    if (b != 1 && b != 2) config_fail("boundary: branch must be 1 or 2");
    lc.branch = static_cast<int>(b);
    lc.mu = to_real("mu", kv["mu"]);
    lc.lambda = to_real("lambda", kv["lambda"]);
    if (!(lc.mu >= 0.0 && lc.mu <= 1.0 && lc.lambda >= 0.0 && lc.lambda <= 1.0))
        config_fail("boundary: mu and lambda must lie in [0,1]");
    if (kv.count("angle")) lc.rotation = Mat2::rotation(to_real("angle", kv["angle"]));
    return coords_to_matrix(lc, delta);
}

std::vector<Triangle> parse_domain(const std::string& spec)
{
    if (spec == "unit-square") return unit_square();
    std::vector<Triangle> out;
    for (const std::string& t : split_on(spec, ';')) {
        if (t.empty()) continue;
        auto xs = split_on(t, ',');
        if (xs.size() != 6) config_fail("domain: each triangle needs 6 coordinates");
        double v[6];
        for (int i = 0; i < 6; ++i) v[i] = to_real("domain", xs[i]);
        out.push_back({{v[0], v[1]}, {v[2], v[3]}, {v[4], v[5]}});
    }
    if (out.empty()) config_fail("domain: no triangles");
    return out;
}

void validate(const RunConfig& c)
{
    if (!(c.delta > 0.0) || !std::isfinite(c.delta)) config_fail("delta must be positive");
    if (c.max_steps < 0) config_fail("steps must be >= 0");
    if (!(c.min_area >= 0.0 && c.min_area < 1.0)) config_fail("min_area must lie in [0,1)");
    if (c.h0 < 0.0 || c.h0 >= 0.125) config_fail("h0 must be 0 (calibrate) or lie in (0, 1/8)");
    parse_boundary(c.boundary, c.delta);
    parse_domain(c.domain);
}

EngineConfig engine_config(const RunConfig& c)
{
    EngineConfig e;
    e.delta = c.delta;
    e.M = parse_boundary(c.boundary, c.delta);
    e.max_steps = c.max_steps;
    e.cell_budget = c.cell_budget;
    e.min_area_rel = c.min_area;
    e.seed = c.seed;
    e.h0 = c.h0;
    return e;
}

void apply_tolerances(const RunConfig& c)
{
    for (const auto& [k, v] : c.tolerances) *tolerance_slot(k) = v;
}

namespace {

void provenance(std::ostream& os, const RunConfig& c)
{
    os << "# config_hash=" << c.hash() << "\n# seed=" << c.seed << "\n";
    std::istringstream is(c.canonical());
    std::string line;
    while (std::getline(is, line)) os << "# " << line << "\n";
}

}  // namespace

void write_metrics_table(std::ostream& os, const MetricsSeries& m, const RunConfig& c)
{
    provenance(os, c);
    std::size_t stages = 0;
    for (const StepMetrics& s : m) stages = std::max(stages, s.stage_hist.size());
    os << "k\tcells\trefined\tl1_chi\tl1_grad\tbv_chi\tbv_grad\tperim_sum\tfrozen\tmean_dist\tenergy"
          "\tmax_cover_ratio\tmin_good_fraction\th_retries";
    for (std::size_t k = 0; k < stages; ++k) os << "\tstage" << k;
    os << '\n';
    for (const StepMetrics& s : m) {
        os << s.k << '\t' << s.cells << '\t' << s.refined;
        for (double v : {s.l1_chi, s.l1_grad, s.bv_chi, s.bv_grad, s.perim_sum, s.frozen, s.mean_dist, s.energy,
                         s.max_cover_ratio, s.min_good_fraction})
            os << '\t' << format_real(v);
        os << '\t' << s.h_retries;
        for (std::size_t k = 0; k < stages; ++k) os << '\t' << format_real(k < s.stage_hist.size() ? s.stage_hist[k] : 0.0);
        os << '\n';
    }
}

void write_mesh_dump(std::ostream& os, const IterationState& s, const RunConfig& c)
{
    provenance(os, c);
    os << "# step=" << s.step << "\n";
    os << "# id parent stage frozen x0 y0 x1 y1 x2 y2 g11 g12 g21 g22 o1 o2\n";
    for (const CellState& e : s.cells) {
        os << e.id << ' ' << e.parent << ' ' << e.stage << ' ' << (e.frozen ? 1 : 0);
        for (Vec2 v : {e.tri.v0, e.tri.v1, e.tri.v2}) os << ' ' << format_real(v.x) << ' ' << format_real(v.y);
        for (double g : {e.grad.a11, e.grad.a12, e.grad.a21, e.grad.a22}) os << ' ' << format_real(g);
        os << ' ' << format_real(e.offset.x) << ' ' << format_real(e.offset.y) << '\n';
    }
}

void write_phase_svg(std::ostream& os, const IterationState& s, const RunConfig& c)
{
    double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
    for (const Triangle& t : s.domain)
        for (int i = 0; i < 3; ++i) {
            x0 = std::min(x0, t[i].x);
            y0 = std::min(y0, t[i].y);
            x1 = std::max(x1, t[i].x);
            y1 = std::max(y1, t[i].y);
        }
    double w = x1 - x0, h = y1 - y0, px = 1000.0 / std::max(w, h);
    std::vector<unsigned char> ch = chi(s, 1);
    int top = 0;
    for (const CellState& e : s.cells) top = std::max(top, e.stage);
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<!-- config_hash=" << c.hash() << " seed=" << c.seed << " step=" << s.step << " -->\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << std::lround(w * px) << "\" height=\""
       << std::lround(h * px) << "\">\n";
    char buf[160];
    for (std::size_t i = 0; i < s.cells.size(); ++i) {
        const CellState& e = s.cells[i];
        const char* fill = ch[i] ? "#2f5d8a" : "#e3a33b";
        int shade = top > 0 ? 40 + 160 * e.stage / top : 40;
        os << "<polygon points=\"";
        for (int k = 0; k < 3; ++k) {
            std::snprintf(buf, sizeof buf, "%.4f,%.4f ", (e.tri[k].x - x0) * px, (y1 - e.tri[k].y) * px);
            os << buf;
        }
        std::snprintf(buf, sizeof buf, "\" fill=\"%s\" stroke=\"rgb(%d,%d,%d)\" stroke-width=\"0.05\"/>\n", fill,
                      shade, 30, 200 - shade / 2);
        os << buf;
    }
    os << "</svg>\n";
}

void write_report(std::ostream& os, const RegularityReport& r, const IterationState& s, const RunConfig& c)
{
    os << "config_hash: " << c.hash() << "\n";
    os << "seed: " << c.seed << "\n";
    os << "delta: " << format_real(s.delta) << "\n";
    os << "steps: " << s.step << "\n";
    os << "cells: " << s.cells.size() << "\n";
    os << "h0: " << format_real(s.h0) << "\n";
    os << "c_tilde: " << format_real(r.c_tilde) << "\n";
    os << "c_tilde_r2: " << format_real(r.l1_fit.r_squared) << "\n";
    os << "rho_bv: " << format_real(r.rho_bv) << "\n";
    os << "rho_bv_r2: " << format_real(r.bv_fit.r_squared) << "\n";
    os << "c1_per: " << format_real(r.c1_per) << "\n";
    os << "theta0_measured: " << format_real(r.theta0_measured) << "\n";
    os << "theta0_covering_constants: " << format_real(r.theta0_covering_constants) << "\n";
    if (r.theta0_measured > 0.0) {
        double sp = 0.5 * r.theta0_measured;
        os << "alpha_at_half_theta0_p2: " << format_real(alpha_of(r.c_tilde, r.rho_bv, sp / 2.0, 2.0)) << "\n";
    }
    os << "window: " << r.window_lo << ".." << r.window_hi << "\n";
    os << "frozen_in_window: " << format_real(r.frozen_in_window) << "\n";
    os << "frozen_final: " << format_real(s.metrics.empty() ? 0.0 : s.metrics.back().frozen) << "\n";
    os << "a4_h_values:";
    for (double h : s.a4_h_values) os << ' ' << format_real(h);
    os << "\n";
    if (!r.note.empty()) os << "note: " << r.note << "\n";
}

IterationState read_mesh_dump(std::istream& is)
{
    IterationState s;
    std::string line;
    double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
    int n = 0;
    while (std::getline(is, line)) {
        ++n;
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto p = line.find("delta=");
            if (p != std::string::npos) s.delta = std::stod(line.substr(p + 6));
            p = line.find("step=");
            if (p != std::string::npos && line.find("steps=") == std::string::npos) s.step = std::stoi(line.substr(p + 5));
            continue;
        }
        std::istringstream ls(line);
        CellState c;
        int frozen = 0;
        double v[12];
        ls >> c.id >> c.parent >> c.stage >> frozen;
        for (double& x : v) ls >> x;
        if (!ls) throw Error(ErrorCode::invalid_input, "mesh dump line " + std::to_string(n) + ": malformed");
        c.frozen = frozen != 0;
        c.tri = {{v[0], v[1]}, {v[2], v[3]}, {v[4], v[5]}};
        c.grad = {v[6], v[7], v[8], v[9]};
        c.offset = {v[10], v[11]};
        for (int k = 0; k < 3; ++k) {
            x0 = std::min(x0, c.tri[k].x);
            y0 = std::min(y0, c.tri[k].y);
            x1 = std::max(x1, c.tri[k].x);
            y1 = std::max(y1, c.tri[k].y);
        }
        s.area += c.tri.area();
        s.next_id = std::max(s.next_id, c.id + 1);
        s.cells.push_back(c);
    }
    if (!s.cells.empty())
        s.domain = {Triangle{{x0, y0}, {x1, y0}, {x1, y1}}, Triangle{{x0, y0}, {x1, y1}, {x0, y1}}};
    return s;
}

std::vector<unsigned char> read_pbm(std::istream& is, int& n)
{
    auto token = [&]() {
        std::string t;
        while (is >> t) {
            if (t[0] == '#') {
                std::string rest;
                std::getline(is, rest);
                continue;
            }
            return t;
        }
        return std::string();
    };
    if (token() != "P1") throw Error(ErrorCode::invalid_input, "raster: expected plain PBM (P1)");
    int w = 0, h = 0;
    try {
        w = std::stoi(token());
        h = std::stoi(token());
    } catch (const std::exception&) {
        throw Error(ErrorCode::invalid_input, "raster: bad size");
    }
    if (w <= 0 || w != h) throw Error(ErrorCode::invalid_input, "raster: must be square");
    n = w;
    std::vector<unsigned char> r(static_cast<std::size_t>(n) * n);
    std::size_t filled = 0;
    char ch;
    while (filled < r.size() && is.get(ch)) {
        if (ch == '#') {
            std::string rest;
            std::getline(is, rest);
        } else if (ch == '0' || ch == '1') {
            std::size_t row = filled / n, col = filled % n;
            // PBM rows run top to bottom; raster rows run from y = 0
            r[(n - 1 - row) * n + col] = static_cast<unsigned char>(ch - '0');
            ++filled;
        }
    }
    if (filled != r.size()) throw Error(ErrorCode::invalid_input, "raster: truncated");
    return r;
}

}  // namespace ci
