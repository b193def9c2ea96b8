#include "nrcid/datagen.hpp"
#include "nrcid/kernels.hpp"

#include <benchmark/benchmark.h>

#include <omp.h>

#include <map>
#include <utility>

using namespace nrcid;

namespace {

const Matrix& cloud(std::size_t rows, std::size_t cols) {
    static std::map<std::pair<std::size_t, std::size_t>, Matrix> cache;
    auto it = cache.find({rows, cols});
    if (it == cache.end()) {
        it = cache.emplace(std::pair{rows, cols}, gen_hypercube(std::min<std::size_t>(cols, 5), cols, rows, 1)).first;
    }
    return it->second;
}

void BM_TwoNnSerial(benchmark::State& state) {
    const Matrix& p = cloud(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernels::two_nn_serial(p));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_TwoNnBlocked(benchmark::State& state) {
    const Matrix& p = cloud(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
    kernels::BlockOptions opts;
    opts.threads = static_cast<int>(state.range(2));
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernels::two_nn_blocked(p, opts));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
    state.counters["threads"] = static_cast<double>(opts.threads);
}

void serial_args(benchmark::internal::Benchmark* b) {
    for (long rows : {1000, 4000}) {
        for (long cols : {2, 20, 64}) {
            b->Args({rows, cols});
        }
    }
}

void blocked_args(benchmark::internal::Benchmark* b) {
    const long max_threads = omp_get_max_threads();
    for (long rows : {1000, 4000}) {
        for (long cols : {2, 20, 64}) {
            for (long t = 1; t <= max_threads; t *= 2) {
                b->Args({rows, cols, t});
            }
        }
    }
}

} // namespace

BENCHMARK(BM_TwoNnSerial)->Apply(serial_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TwoNnBlocked)->Apply(blocked_args)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
