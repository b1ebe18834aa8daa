#include <benchmark/benchmark.h>

#include "hsca/kernels.hpp"
#include "hsca/suites.hpp"

using namespace hsca;

namespace {

suites::SuiteConfig config(int m, int k) {
    suites::SuiteConfig c;
    c.m = m;
    c.k = k;
    return c;
}

clifford::Paravector<double> probe(int m) { return clifford::Paravector<double>(std::vector<double>(std::size_t(m), 0.5 + 1.0 / 97)); }

}  // namespace

static void BM_TeodorescuPoint(benchmark::State& st) {
    const int m = int(st.range(0)), k = int(st.range(1)), N = int(st.range(2));
    auto ctx = suites::make_context(config(m, k), N);
    auto f = disc::sample(suites::polynomial_field(ctx, +1, 2, 1), ctx->grid);
    const auto y = probe(m);
    for (auto _ : st) benchmark::DoNotOptimize(ops::teodorescu(f, y, ctx));
    st.counters["node_pairs/s"] = benchmark::Counter(double(ctx->grid->num_nodes()), benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_TeodorescuPoint)->Args({3, 1, 8})->Args({3, 1, 16})->Args({3, 2, 16})->Args({4, 1, 8})->Unit(benchmark::kMillisecond);

static void BM_TeodorescuAllNodes(benchmark::State& st) {
    const int m = int(st.range(0)), k = int(st.range(1)), N = int(st.range(2));
    auto ctx = suites::make_context(config(m, k), N);
    auto f = disc::sample(suites::polynomial_field(ctx, +1, 2, 1), ctx->grid);
    const double nn = ctx->grid->num_nodes();
    for (auto _ : st) benchmark::DoNotOptimize(ops::teodorescu(f, ctx));
    st.counters["node_pairs/s"] = benchmark::Counter(nn * nn, benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_TeodorescuAllNodes)->Args({3, 1, 8})->Args({3, 1, 12})->Unit(benchmark::kMillisecond);

static void BM_PiCompose(benchmark::State& st) {
    const int m = int(st.range(0)), k = int(st.range(1)), N = int(st.range(2));
    auto ctx = suites::make_context(config(m, k), N);
    auto g = suites::bump_field(ctx, -1, std::vector<double>(std::size_t(m), 0.5), 0.4, 1);
    auto f = ops::apply_Rk(g, ctx);
    const auto y = probe(m);
    for (auto _ : st) benchmark::DoNotOptimize(ops::pi_compose(f, y, ctx));
}
BENCHMARK(BM_PiCompose)->Args({3, 1, 8})->Args({3, 1, 16})->Unit(benchmark::kMillisecond);

static void BM_FundamentalKernel(benchmark::State& st) {
    const int m = int(st.range(0)), k = int(st.range(1));
    const auto kp = kernels::KernelParams::make(m, k);
    const auto x = probe(m);
    std::vector<double> a(std::size_t(m), 0.0), b(std::size_t(m), 0.0);
    a[0] = 0.6;
    a[1] = 0.8;
    b[std::size_t(m - 1)] = 1.0;
    const clifford::Paravector<double> u(a), v(b);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::fundamental(kp, x, u, v, +1));
}
BENCHMARK(BM_FundamentalKernel)->Args({3, 1})->Args({3, 3})->Args({5, 2});

BENCHMARK_MAIN();
