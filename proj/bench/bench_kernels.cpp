// Parallel vs serial IB restarts, plus the TP/FP driver with and without the config-level loop.

#include <benchmark/benchmark.h>

#include <omp.h>

#include "suffstat/bench.hpp"
#include "suffstat/ib.hpp"
#include "suffstat/simgen.hpp"

using namespace suffstat;

namespace {

// Joint input space of 2 * 2 * 17 states from a dormant-family table.
const IBProblem& wide_problem() {
    static const IBProblem p = [] {
        SuiteOptions o;
        o.k = 1;
        o.full_grid = false;
        o.seed = 3;
        GlmSpec s = generate_suite(Family::Dormant, o).front().spec;
        return make_ib_problem(dormant_identified_table(s, 1), {"X", "V1", "V2"}, "Z");
    }();
    return p;
}

const IBProblem& sum_problem() {
    static const IBProblem p = [] {
        GlmSpec s;
        s.a = {-0.4, 0.9, 1.3, -0.7, 0.5, 0.8};
        return make_ib_problem(analysis_table(s), {"X", "V1", "V2"}, "Z");
    }();
    return p;
}

IBOptions options(const IBProblem& p, int restarts) {
    IBOptions o;
    o.beta = scale_beta(p, 50.0);
    o.max_cardinality = std::min(p.nx, 8);
    o.restarts = restarts;
    o.seed = 11;
    return o;
}

void BM_IbSerial(benchmark::State& st, const IBProblem& (*problem)()) {
    IBOptions o = options(problem(), static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(ib_optimize_serial(problem(), o).objective);
    st.SetItemsProcessed(st.iterations() * o.restarts);
}

void BM_IbParallel(benchmark::State& st, const IBProblem& (*problem)()) {
    IBOptions o = options(problem(), static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(ib_optimize(problem(), o).objective);
    st.SetItemsProcessed(st.iterations() * o.restarts);
    st.counters["threads"] = omp_get_max_threads();
}

void BM_TpFp(benchmark::State& st) {
    ExperimentPlan plan;
    plan.families = {Family::Sum};
    plan.n_grid = {0};
    plan.beta_sets = {default_beta_sets()[1]};
    plan.k = 4;
    plan.restarts = 50;
    const int threads = omp_get_max_threads();
    if (st.range(0) == 0) omp_set_num_threads(1);
    for (auto _ : st) benchmark::DoNotOptimize(run_tpfp(plan).rows.size());
    omp_set_num_threads(threads);
}

}  // namespace

BENCHMARK_CAPTURE(BM_IbSerial, sum, sum_problem)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_IbParallel, sum, sum_problem)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_IbSerial, wide, wide_problem)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_IbParallel, wide, wide_problem)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TpFp)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
