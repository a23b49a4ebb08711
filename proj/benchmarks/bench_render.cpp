// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#include <gsck/optimizer.hpp>
#include <gsck/render.hpp>
#include <gsck/synth.hpp>
#include <gsck/voting.hpp>

#include <benchmark/benchmark.h>

using namespace gsck;

namespace {

const SynthCase &
benchCase() {
    static const SynthCase c = [] {
        SynthSpec spec;
        spec.seed = 41;
        return buildCase(spec);
    }();
    return c;
}

void
BM_BlendWeights(benchmark::State &state) {
    const auto &c = benchCase();
    for (auto _ : state) {
        benchmark::DoNotOptimize(computeBlendWeights(c.scene, c.cameras[0]));
    }
}
BENCHMARK(BM_BlendWeights)->Unit(benchmark::kMillisecond);

void
BM_ForwardBackward(benchmark::State &state) {
    const auto &c  = benchCase();
    const auto bw  = computeBlendWeights(c.scene, c.cameras[0]);
    const auto r   = c.scene.tamperAsDouble();
    for (auto _ : state) {
        const auto img  = renderAttribute(bw, r);
        const auto loss = loss2d(img, c.inputMasks[0], 1.0, 10.0);
        benchmark::DoNotOptimize(backwardAttribute(bw, loss.gradImage));
    }
}
BENCHMARK(BM_ForwardBackward)->Unit(benchmark::kMicrosecond);

void
BM_CastVotes(benchmark::State &state) {
    const auto &c = benchCase();
    for (auto _ : state) {
        benchmark::DoNotOptimize(castVotes(c.scene, c.cameras, c.inputMasks));
    }
}
BENCHMARK(BM_CastVotes)->Unit(benchmark::kMicrosecond);

void
BM_Optimize(benchmark::State &state) {
    const auto &c = benchCase();
    const auto init = consensusInit(castVotes(c.scene, c.cameras, c.inputMasks), c.scene);
    std::vector<BlendWeights> views;
    for (const auto &cam : c.cameras) {
        views.push_back(computeBlendWeights(init, cam));
    }
    OptimConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(runOptimization(init, views, c.inputMasks, cfg));
    }
}
BENCHMARK(BM_Optimize)->Unit(benchmark::kMillisecond)->Iterations(3);

} // namespace

BENCHMARK_MAIN();
