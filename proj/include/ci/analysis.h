#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ci/ci_engine.h"

namespace ci {

enum class Field { chi1, chi2, grad, g11, g12, g21, g22 };
const char* field_name(Field f);
Field parse_field(const std::string& s);

// value of a scalar field on one cell; grad is the Frobenius norm of the difference when compared
double field_value(const CellState& c, Field f, double delta);
double field_distance(const CellState& a, const CellState& b, Field f, double delta);

// piecewise-constant field on a triangulation, dim components per cell (Euclidean norm)
struct PiecewiseField {
    std::vector<Triangle> tris;
    std::vector<double> values;  // tris.size() * dim
    int dim = 1;
    double scale = 1.0;  // diameter of the region, sets the matching tolerances
    double norm_at(std::size_t i) const;
    double jump(std::size_t i, std::size_t j) const;
};
double l1_norm(const PiecewiseField& f);
double linf_norm(const PiecewiseField& f);
// edge-jump integral; with_boundary adds the jump to zero outside the region
double bv_seminorm(const PiecewiseField& f, bool with_boundary);

// exact integral of |f(next) - f(prev)|; every cell of next must be a cell of prev or a child of one
double l1_diff(const IterationState& prev, const IterationState& next, Field f);
// |f|_BV over interior edges of the state
double bv_seminorm(const IterationState& s, Field f);

struct DiffStats {
    double l1 = 0.0;
    double linf = 0.0;
    double bv = 0.0;  // of the difference extended by zero
};
DiffStats step_difference(const IterationState& prev, const IterationState& next, Field f);

// |u|_inf^{1-1/p} (|u|_1^{1-sp} |u|_BV^{sp})^{1/p}
double wsp_interpolated_norm(double linf, double l1, double bv, double s, double p);
double wsp_interpolated_norm(const DiffStats& d, double s, double p);

double solve_theta0(double c_tilde, double growth);
// decay exponent of the interpolated bound per step, base 2
double alpha_of(double c_tilde, double growth, double s, double p);

struct GeometricFit {
    double rate = 0.0;
    double amplitude = 0.0;
    double r_squared = 0.0;
    int used = 0;
    bool skipped_nonpositive = false;
    bool ok = false;
};
// least squares of log(series[i]) against i over [lo, hi]
GeometricFit fit_geometric(const std::vector<double>& series, int lo, int hi);
GeometricFit fit_geometric(const std::vector<double>& series);

struct Segment {
    Vec2 a, b;
};
// phase boundary inside the domain
std::vector<Segment> interface_segments(const IterationState& s);
// pixel-edge interfaces of an n x n raster on [0,1]^2, row-major from y = 0
std::vector<Segment> raster_interfaces(const std::vector<unsigned char>& raster, int n);

struct BoxCount {
    double eps = 0.0;
    std::size_t count = 0;
};
struct BoxDimension {
    double estimate = 0.0;
    double r_squared = 0.0;
    std::vector<BoxCount> table;
    double m_d = 0.0;  // N_eps eps^d at the finest eps
    double d = 1.0;
};
// eps values 2^-j for j in [j_min, j_max]
BoxDimension box_dimension(const std::vector<Segment>& segs, int j_min, int j_max, double d = 1.0);
std::size_t box_count(const std::vector<Segment>& segs, double eps);

struct RegularityReport {
    GeometricFit l1_fit;
    GeometricFit bv_fit;
    double c_tilde = 0.0;
    double rho_bv = 0.0;
    double c1_per = 0.0;
    double theta0_measured = 0.0;
    double theta0_covering_constants = 0.0;
    int window_lo = 0;
    int window_hi = 0;
    double frozen_in_window = 0.0;
    std::string note;
};
// fits rows k in [lo, hi] that have frozen measure <= frozen_cap * area
RegularityReport regularity_report(const MetricsSeries& m, double area, int lo, int hi, double frozen_cap = 0.01);

}  // namespace ci
