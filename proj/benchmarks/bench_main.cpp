#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "skewfield/fft.hpp"
#include "skewfield/model.hpp"
#include "skewfield/special.hpp"
#include "skewfield/stats.hpp"
#include "skewfield/synth.hpp"

using namespace skewfield;

namespace {

ModelParams sized(std::uint64_t N)
{
    ModelParams p = turbulence_preset();
    p.N = N;
    p.epsilon = 2.0 / static_cast<double>(N);
    return p;
}

void BM_circular_convolve(benchmark::State& st)
{
    const auto n = static_cast<std::size_t>(st.range(0));
    std::vector<double> k(n), f(n);
    for (std::size_t i = 0; i < n; ++i) {
        k[i] = std::exp(-0.01 * static_cast<double>(std::min(i, n - i)));
        f[i] = std::sin(0.1 * static_cast<double>(i));
    }
    for (auto _ : st) benchmark::DoNotOptimize(circular_convolve(k, f, Semantics::Density));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_circular_convolve)->RangeMultiplier(4)->Range(1 << 12, 1 << 20)->Unit(benchmark::kMillisecond);

void BM_synthesize(benchmark::State& st)
{
    const ModelParams p = sized(static_cast<std::uint64_t>(st.range(0)));
    std::uint64_t rep = 0;
    for (auto _ : st) benchmark::DoNotOptimize(synthesize(p, rep++));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_synthesize)->RangeMultiplier(4)->Range(1 << 12, 1 << 20)->Unit(benchmark::kMillisecond);

void BM_moment_table(benchmark::State& st)
{
    const ModelParams p = sized(static_cast<std::uint64_t>(st.range(0)));
    const FieldRealization f = synthesize(p, 0);
    const auto scales = dyadic_scales(p);
    const std::vector<double> q{1, 2, 3, 4, 5, 6};
    for (auto _ : st) benchmark::DoNotOptimize(moment_table(f, scales, q));
    st.SetItemsProcessed(st.iterations() * st.range(0) * static_cast<std::int64_t>(scales.size()));
}
BENCHMARK(BM_moment_table)->RangeMultiplier(4)->Range(1 << 12, 1 << 20)->Unit(benchmark::kMillisecond);

void BM_f_H_eval(benchmark::State& st)
{
    const double H = static_cast<double>(st.range(0)) / 100.0;
    double h = 1e-3;
    for (auto _ : st) {
        benchmark::DoNotOptimize(f_H_eval(H, h));
        h = h < 1e3 ? h * 1.7 : 1e-3;
    }
}
BENCHMARK(BM_f_H_eval)->Arg(10)->Arg(33)->Arg(70)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
