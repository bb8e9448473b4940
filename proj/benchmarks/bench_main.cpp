#include <benchmark/benchmark.h>

#include <random>

#include "cmot/envelope.hpp"
#include "cmot/lp.hpp"
#include "cmot/transport.hpp"

namespace {

using cmot::ConstraintSpec;
using cmot::CostSpec;
using cmot::DiscreteMeasure;
using cmot::Point;
using cmot::RadiusTable;

std::vector<Point> grid_points(int n, double lo, double hi) {
    std::vector<Point> pts;
    for (int i = 0; i < n; ++i) pts.emplace_back(lo + (hi - lo) * i / (n - 1));
    return pts;
}

void bench_envelope_hull(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    auto ys = grid_points(n, -5, 5);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unit(-1, 1);
    std::vector<double> f(ys.size());
    for (double& v : f) v = unit(rng);
    auto constraint = ConstraintSpec::martingale_ball(RadiusTable::uniform(3.0), ys);
    for (auto _ : state) {
        auto r = cmot::f_gamma(f, Point(0.25), constraint);
        benchmark::DoNotOptimize(r.value);
    }
}
BENCHMARK(bench_envelope_hull)->Arg(16)->Arg(64)->Arg(256)->Arg(1024);

void bench_transport_solve(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unit(0.1, 1.0);
    std::vector<Point> src = grid_points(n, -2, 2);
    std::vector<Point> tgt = grid_points(2 * n, -4, 4);
    std::vector<double> sw, tw;
    for (int i = 0; i < n; ++i) sw.push_back(unit(rng));
    for (int i = 0; i < 2 * n; ++i) tw.push_back(unit(rng));
    DiscreteMeasure alpha(src, sw), beta(tgt, tw);
    auto constraint = ConstraintSpec::unconstrained(beta.atoms());
    CostSpec cost = CostSpec::power_difference(1.0);
    for (auto _ : state) {
        auto report = cmot::solve_primal(alpha, beta, constraint, cost);
        benchmark::DoNotOptimize(report.primal_value);
    }
}
BENCHMARK(bench_transport_solve)->Arg(4)->Arg(8)->Arg(16);

void bench_martingale_solve(benchmark::State& state) {
    DiscreteMeasure alpha({Point(0.0), Point(5.0)}, {0.5, 0.5});
    DiscreteMeasure beta({Point(-2.0), Point(0.0), Point(2.0), Point(10.0)},
                         {0.25, 0.25, 0.25, 0.25});
    auto constraint = ConstraintSpec::martingale_ball(RadiusTable::uniform(6.0), beta.atoms());
    CostSpec cost = CostSpec::exp_difference();
    for (auto _ : state) {
        auto report = cmot::solve_dual(alpha, beta, constraint, cost);
        benchmark::DoNotOptimize(report.gap);
    }
}
BENCHMARK(bench_martingale_solve);

}  // namespace

BENCHMARK_MAIN();
