// Serial reference vs OpenMP kernels on a phantom-sized volume.
#include <benchmark/benchmark.h>

#include <random>

#include "bel/kernels/kernels.hpp"
#include "bel/phantom.hpp"

using namespace bel;
namespace k = bel::kernels;

namespace {

const PhantomTruth& tree() {
    static const PhantomTruth t = [] {
        TreeSpec s;
        s.dims = {128, 128, 128};
        s.depth = 4;
        s.root_length = 30.0;
        return generate(s);
    }();
    return t;
}

const RealVolume& prob() {
    static const RealVolume p = [] {
        RealVolume v = to_real(tree().mask);
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(0.0, 0.3);
        for (auto& x : v.values()) x = x > 0.0 ? 1.0 - u(rng) : u(rng);
        return v;
    }();
    return p;
}

const LabelVolume& seeds() {
    static const LabelVolume s = [] {
        LabelVolume l = LabelVolume::like(tree().mask);
        for (std::int64_t i = 0; i < l.size(); ++i) l[i] = tree().mask[i] ? 0 : 1;
        return l;
    }();
    return s;
}

template <class F>
void run(benchmark::State& state, F f) {
    for (auto _ : state) benchmark::DoNotOptimize(f());
    state.SetItemsProcessed(state.iterations() * tree().mask.size());
}

}  // namespace

static void BM_erode26_serial(benchmark::State& s) { run(s, [] { return k::serial::erode(tree().mask, k::Stencil::cube26); }); }
static void BM_erode26_omp(benchmark::State& s) { run(s, [] { return k::omp::erode(tree().mask, k::Stencil::cube26); }); }
static void BM_minpool_serial(benchmark::State& s) { run(s, [] { return k::serial::min_pool6(prob()); }); }
static void BM_minpool_omp(benchmark::State& s) { run(s, [] { return k::omp::min_pool6(prob()); }); }
static void BM_edt_serial(benchmark::State& s) { run(s, [] { return k::serial::labeled_sqdist(seeds(), {1, 1, 1}); }); }
static void BM_edt_omp(benchmark::State& s) { run(s, [] { return k::omp::labeled_sqdist(seeds(), {1, 1, 1}); }); }

static k::LossSumArgs loss_args() {
    k::LossSumArgs a;
    a.p = prob().values();
    a.g = tree().mask.values();
    a.r = 0.7;
    a.alpha = 0.2;
    a.beta = 0.8;
    return a;
}
static void BM_losssums_serial(benchmark::State& s) { run(s, [] { return k::serial::loss_sums(loss_args()).numerator; }); }
static void BM_losssums_omp(benchmark::State& s) { run(s, [] { return k::omp::loss_sums(loss_args()).numerator; }); }

BENCHMARK(BM_erode26_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_erode26_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_minpool_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_minpool_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_edt_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_edt_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_losssums_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_losssums_omp)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
