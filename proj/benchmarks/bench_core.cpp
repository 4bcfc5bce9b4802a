// Hot paths: the energy/gradient kernel, one minimizing-movements step,
// anisotropy evaluation and the order-independent reduction.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "wulffflow/anisotropy.hpp"
#include "wulffflow/energy.hpp"
#include "wulffflow/parallel.hpp"
#include "wulffflow/potential.hpp"
#include "wulffflow/solver.hpp"

using namespace wulffflow;

namespace {

Anisotropy make_sigma(int kind)
{
    if (kind == 0) return Anisotropy::euclidean(2);
    Mat G(2, 2);
    G << 4.0, 0.0, 0.0, 1.0;
    return Anisotropy::bgn(2.0, {G});
}

}  // namespace

// args: n, anisotropy (0 euclidean, 1 BGN diag(4,1))
static void BM_EnergyGradient(benchmark::State& st)
{
    const int n = static_cast<int>(st.range(0));
    const Anisotropy a = make_sigma(static_cast<int>(st.range(1)));
    const DoubleWell w = standard_well();
    const Grid g(2, n);
    const double eps = 4.0 / n;
    const PeriodicField u = initial_wulff(a, Profile(w), vec({0.5, 0.5}), 0.15, eps, g);
    EnergyKernel k(g, eps, a, w);
    std::vector<double> grad(g.size());
    for (auto _ : st) {
        const EnergyReport r = k.evaluate(u.data(), grad.data());
        benchmark::DoNotOptimize(r.total);
    }
    st.SetItemsProcessed(st.iterations() * static_cast<long>(g.size()));
}
BENCHMARK(BM_EnergyGradient)->ArgsProduct({{128, 256, 512}, {0, 1}})->Unit(benchmark::kMicrosecond);

static void BM_MinimizeStep(benchmark::State& st)
{
    const int n = static_cast<int>(st.range(0));
    const Anisotropy a = make_sigma(static_cast<int>(st.range(1)));
    const Model m(a, a, standard_well());
    const Grid g(2, n);
    const double eps = 4.0 / n;
    const PeriodicField u = initial_wulff(a, Profile(m.well()), vec({0.5, 0.5}), 0.15, eps, g);
    const SolverConfig cfg = SolverConfig::make(m, eps, 0.0);
    Stepper s(g, cfg, m);
    long iters = 0;
    for (auto _ : st) {
        const StepResult r = s.step(u);
        iters += r.record.inner_iters;
        benchmark::DoNotOptimize(r.u.data());
    }
    st.counters["inner_iters"] = benchmark::Counter(static_cast<double>(iters), benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_MinimizeStep)->ArgsProduct({{128, 256}, {0, 1}})->Unit(benchmark::kMillisecond);

// args: 0 euclidean, 1 BGN single matrix, 2 BGN two matrices (q = 3)
static void BM_SigmaAndGradient(benchmark::State& st)
{
    Anisotropy a = make_sigma(static_cast<int>(st.range(0) > 0));
    if (st.range(0) == 2) {
        Mat G1(2, 2), G2(2, 2);
        G1 << 3.0, 0.5, 0.5, 1.0;
        G2 << 1.0, -0.3, -0.3, 2.0;
        a = Anisotropy::bgn(3.0, {G1, G2});
    }
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    std::vector<Vec> p(1024, Vec(2));
    for (auto& v : p) v << nd(rng), nd(rng);
    for (auto _ : st)
        for (const Vec& v : p) {
            benchmark::DoNotOptimize(a.sigma(v));
            benchmark::DoNotOptimize(a.dsigma(v));
        }
    st.SetItemsProcessed(st.iterations() * static_cast<long>(p.size()));
}
BENCHMARK(BM_SigmaAndGradient)->DenseRange(0, 2);

static std::vector<double> bench_values(std::size_t n)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    std::vector<double> x(n);
    for (auto& v : x) v = ud(rng);
    return x;
}

static void BM_ReproducibleSum(benchmark::State& st)
{
    const std::vector<double> x = bench_values(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(reproducible_sum(x.size(), [&](std::size_t k) { return x[k]; }));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_ReproducibleSum)->Arg(1 << 16)->Arg(1 << 20);

static void BM_BlockedSum(benchmark::State& st)
{
    const std::vector<double> x = bench_values(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(blocked_sum(x.size(), [&](std::size_t b, std::size_t e) {
        return pairwise_sum(x.data() + b, e - b);
    }));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_BlockedSum)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK_MAIN();
