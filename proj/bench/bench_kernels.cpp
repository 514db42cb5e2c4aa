// Serial reference vs OpenMP kernels. Run with OMP_NUM_THREADS to vary threads.

#include <benchmark/benchmark.h>

#include <vector>

#include "flocksim/kernels.hpp"
#include "flocksim/rng.hpp"
#include "flocksim/simulation.hpp"

using namespace flocksim;

namespace {

void pair_scan_bench(benchmark::State& state, ExecPolicy policy) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    std::vector<Vec2> pos(n), vel(n);
    for (std::size_t i = 0; i < n; ++i) {
        pos[i] = {rng.uniform(0, 300), rng.uniform(0, 300)};
        vel[i] = {rng.normal(), rng.normal()};
    }
    for (auto _ : state) {
        auto scan = pair_scan(pos, vel, 40.0, 1.5, policy);
        benchmark::DoNotOptimize(scan.align_sum);
    }
    state.SetComplexityN(state.range(0));
    state.counters["threads"] = policy == ExecPolicy::Serial ? 1 : max_threads();
}

// One simulated second of the communication-range sweep world.
void step_bench(benchmark::State& state, ExecPolicy policy) {
    auto cfg = range_sweep_scenario(32.0, 1);
    cfg.n_agents = static_cast<std::size_t>(state.range(0));
    cfg.duration = 1e6;
    cfg.log_every = 1000000;
    Simulation sim(cfg, policy);
    for (int k = 0; k < 400; ++k) sim.step();  // past the start-up transient
    for (auto _ : state) {
        for (int k = 0; k < 40; ++k) sim.step();
    }
    state.counters["agent_steps/s"] =
        benchmark::Counter(40.0 * static_cast<double>(cfg.n_agents), benchmark::Counter::kIsIterationInvariantRate);
    state.counters["threads"] = policy == ExecPolicy::Serial ? 1 : max_threads();
}

}  // namespace

BENCHMARK_CAPTURE(pair_scan_bench, serial, ExecPolicy::Serial)->RangeMultiplier(4)->Range(64, 4096)->Complexity();
BENCHMARK_CAPTURE(pair_scan_bench, parallel, ExecPolicy::Parallel)->RangeMultiplier(4)->Range(64, 4096)->Complexity();
BENCHMARK_CAPTURE(step_bench, serial, ExecPolicy::Serial)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(step_bench, parallel, ExecPolicy::Parallel)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
