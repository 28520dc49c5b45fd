#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "ci/covering.h"
#include "ci/onewell.h"

namespace ci {

struct CellState {
    Triangle tri;
    Mat2 grad;
    Vec2 offset;
    int stage = 0;
    bool frozen = false;
    std::int64_t id = 0;
    std::int64_t parent = -1;

    Affine map() const { return {grad, offset}; }
};

struct StepMetrics {
    int k = 0;
    double l1_chi = 0.0;   // |chi_{k-1} - chi_k|_1
    double l1_grad = 0.0;  // |grad u_{k-1} - grad u_k|_1
    double bv_chi = 0.0;
    double bv_grad = 0.0;
    double perim_sum = 0.0;
    double frozen = 0.0;  // frozen measure
    double mean_dist = 0.0;
    std::vector<double> stage_hist;  // measure per stage
    std::size_t cells = 0;
    std::size_t refined = 0;
    std::size_t frozen_now = 0;
    double good_area = 0.0;
    double refined_area = 0.0;
    double new_perimeter = 0.0;  // perimeter of the cells created in this step
    double energy = 0.0;         // sum 2^{-stage/2} |cell| over active cells
    double max_cover_ratio = 0.0;  // max over covers of children perimeter / parent perimeter
    double min_good_fraction = 1.0;
    int h_retries = 0;
};

using MetricsSeries = std::vector<StepMetrics>;

struct EngineConfig {
    double delta = 0.5;
    Mat2 M = Mat2::identity();
    int max_steps = 8;
    std::size_t cell_budget = 1000000;
    double min_area_rel = 1e-12;
    std::uint64_t seed = 1;
    double h0 = 0.0;  // 0: calibrate
    bool parallel = true;
};

struct IterationState {
    int step = 0;
    std::vector<CellState> cells;
    std::vector<Triangle> domain;
    Mat2 M;
    Vec2 offset;  // u_0 = M x + offset
    double delta = 0.5;
    double area = 0.0;
    double h0 = 0.0;
    std::int64_t next_id = 0;
    MetricsSeries metrics;
    std::set<double> a4_h_values;
    std::set<double> a3_h_values;
};

std::vector<Triangle> unit_square();

IterationState init(const std::vector<Triangle>& domain, const Mat2& M, double delta, double h0 = 0.0);
// the one-connection problem has no convex integration solutions: always throws wrong_entry_point
IterationState init(const std::vector<Triangle>& domain, const DiagonalWellPair& wells, double lambda);
IterationState step(const IterationState& s, const EngineConfig& cfg);
IterationState step_serial(const IterationState& s, const EngineConfig& cfg);

// per-cell phase: 1 closer to SO(2)F0 (ties included), 0 otherwise; which = 2 gives 1 - chi1
std::vector<unsigned char> chi(const IterationState& s, int which = 1);

struct RunResult {
    IterationState final_state;
    MetricsSeries metrics;
};
// observer sees the state after every step (including step 0)
template <class F>
RunResult run(const EngineConfig& cfg, const std::vector<Triangle>& domain, F&& observer);
RunResult run(const EngineConfig& cfg, const std::vector<Triangle>& domain);

// metrics of a single state (l1 fields left to the caller)
StepMetrics state_metrics(const IterationState& s);

// invariant checks
struct InvariantReport {
    double area_error = 0.0;
    double continuity_error = 0.0;
    double trace_error = 0.0;
    double det_error = 0.0;
    int stage_violations = 0;
    int overlaps = 0;
};
InvariantReport check_invariants(const IterationState& s);
// stage(child) >= stage(parent), strict for cells created by a replacement
int stage_monotonicity_violations(const IterationState& prev, const IterationState& next);

template <class F>
RunResult run(const EngineConfig& cfg, const std::vector<Triangle>& domain, F&& observer)
{
    RunResult r;
    IterationState s = init(domain, cfg.M, cfg.delta, cfg.h0);
    observer(s);
    for (int k = 0; k < cfg.max_steps; ++k) {
        s = cfg.parallel ? step(s, cfg) : step_serial(s, cfg);
        observer(s);
    }
    r.metrics = s.metrics;
    r.final_state = std::move(s);
    return r;
}

}  // namespace ci
