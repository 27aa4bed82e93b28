// SPDX-License-Identifier: Apache-2.0
//
// beamscan: directional 60 GHz channel-sounder simulation and analysis
// Copyright (C) 2026 The beamscan authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Parallel kernels against their serial references.

#include "beamscan/analysis.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace beamscan;

namespace
{

const array::PatternTable &codebook()
{
    static const auto cb = array::synth_codebook({});
    return cb;
}

const std::vector<raytrace::RayPath> &reference_paths()
{
    static const auto paths = [] {
        const auto scene = env::load_scene_file(BEAMSCAN_DATA_DIR "/reference.scene");
        return raytrace::trace_paths(scene.environment, scene.tx, scene.rx, 5.0);
    }();
    return paths;
}

sounder::SimConfig sim_config(std::size_t n_scan)
{
    sounder::SimConfig cfg;
    cfg.n_scan = n_scan;
    return cfg;
}

std::vector<double> noisy_rssi()
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> jitter(0.0, 1.0);
    auto r = raytrace::predict_rssi(reference_paths()[1], codebook(), codebook());
    for (double &v : r)
        v += jitter(rng);
    return r;
}

void BM_ls_separable(benchmark::State &state)
{
    const auto r = noisy_rssi();
    for (auto _ : state)
        benchmark::DoNotOptimize(analysis::ls_direction_find(r, codebook(), codebook()));
}

// The 4-D brute force is O(grid^2 * PACs); a 10 deg grid keeps it tractable.
void BM_ls_bruteforce_coarse(benchmark::State &state)
{
    array::CodebookSpec spec;
    spec.az_step_deg = spec.el_step_deg = 10.0;
    const auto cb = array::synth_codebook(spec);
    const auto r = raytrace::predict_rssi(reference_paths()[1], cb, cb);
    const bool reference = state.range(0) != 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(reference ? analysis::ls_direction_find_reference(r, cb, cb)
                                           : analysis::ls_direction_find(r, cb, cb));
}

void BM_synthesize(benchmark::State &state)
{
    const auto cfg = sim_config(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(sounder::synthesize_tensor(reference_paths(), codebook(), codebook(), cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_synthesize_reference(benchmark::State &state)
{
    const auto cfg = sim_config(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(sounder::synthesize_tensor_reference(reference_paths(), codebook(), codebook(), cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

const sounder::PdpTensor &tensor()
{
    static const auto x = sounder::synthesize_tensor(reference_paths(), codebook(), codebook(), sim_config(200));
    return x;
}

void BM_omni(benchmark::State &state)
{
    tensor(); // built outside the timed loop
    for (auto _ : state)
        benchmark::DoNotOptimize(analysis::synthesize_omni(tensor()));
}

void BM_omni_reference(benchmark::State &state)
{
    tensor();
    for (auto _ : state)
        benchmark::DoNotOptimize(analysis::synthesize_omni_reference(tensor()));
}

} // namespace

BENCHMARK(BM_ls_separable)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ls_bruteforce_coarse)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_synthesize)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_synthesize_reference)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_omni)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_omni_reference)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
