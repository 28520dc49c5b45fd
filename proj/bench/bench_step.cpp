// wall time of one engine step, OpenMP kernel against the serial reference

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "ci/ci_engine.h"

using namespace ci;

namespace {

bool same(const IterationState& a, const IterationState& b)
{
    if (a.cells.size() != b.cells.size()) return false;
    for (std::size_t i = 0; i < a.cells.size(); ++i)
        if (dist(a.cells[i].grad, b.cells[i].grad) != 0.0 || a.cells[i].id != b.cells[i].id ||
            a.cells[i].tri.v0.x != b.cells[i].tri.v0.x)
            return false;
    return true;
}

template <class F>
double best_of(int reps, F&& f)
{
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

}  // namespace

int main(int argc, char** argv)
{
    std::size_t budget = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 200000;
    int reps = argc > 2 ? std::atoi(argv[2]) : 3;
    EngineConfig cfg;
    cfg.delta = 0.5;
    cfg.M = coords_to_matrix({1, 0.3, 0.2, Mat2::identity()}, 0.5);
    cfg.cell_budget = budget;
    IterationState s = step(init(unit_square(), cfg.M, cfg.delta), cfg);
    std::printf("input: %zu cells, budget %zu, %d OpenMP threads\n", s.cells.size(), budget, omp_get_max_threads());

    IterationState p, q;
    double tp = best_of(reps, [&] { p = step(s, cfg); });
    double ts = best_of(reps, [&] { q = step_serial(s, cfg); });
    std::printf("step (OpenMP)  %8.3f s  -> %zu cells\n", tp, p.cells.size());
    std::printf("step_serial    %8.3f s  -> %zu cells\n", ts, q.cells.size());
    std::printf("ratio serial/parallel %.2f, results identical: %s\n", ts / tp, same(p, q) ? "yes" : "no");
    return same(p, q) ? 0 : 1;
}
