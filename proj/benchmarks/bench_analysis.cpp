// SPDX-License-Identifier: Apache-2.0
//
// chest-lab - physical-model MIMO channel estimation toolkit
// Copyright (C) 2026 the chest-lab authors
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

#include <benchmark/benchmark.h>

#include "chestlab/analysis.hpp"

namespace {

using namespace chestlab;

ChannelConfig mimo_config() {
    FrequencyGrid grid = make_frequency_grid(28e9, 4, 15e6);
    ArrayGeometry tx = make_ula(16, 0.5, Vec3{1, 0, 0}, grid.wavelength());
    ArrayGeometry rx = make_ula(2, 0.5, Vec3{1, 0, 0}, grid.wavelength());
    return ChannelConfig{std::move(tx), std::move(rx), std::move(grid)};
}

std::vector<Path> two_paths() {
    return {
        Path{Complex{1.0, 0.2}, Direction(0.9, 0.1), Direction(1.1, -0.05), 8e-9},
        Path{Complex{-0.4, 0.7}, Direction(2.1, -0.2), Direction(2.4, 0.15), 30e-9},
    };
}

void BM_ChannelJacobian(benchmark::State& state) {
    const ChannelConfig cfg = mimo_config();
    const auto paths = two_paths();
    const ParamLayout layout = make_param_layout(paths, cfg);
    for (auto _ : state) {
        auto jac = channel_jacobian(paths, cfg, layout);
        benchmark::DoNotOptimize(jac);
    }
}
BENCHMARK(BM_ChannelJacobian);

void BM_FisherMatrix(benchmark::State& state) {
    const ChannelConfig cfg = mimo_config();
    const auto paths = two_paths();
    const ParamLayout layout = make_param_layout(paths, cfg);
    const auto jac = channel_jacobian(paths, cfg, layout);
    const auto obs = make_identity_observation(cfg.dim(), 0.01);
    for (auto _ : state) {
        auto fim = fisher_matrix(jac, obs);
        benchmark::DoNotOptimize(fim);
    }
}
BENCHMARK(BM_FisherMatrix);

void BM_BiasBound(benchmark::State& state) {
    const ChannelConfig cfg = mimo_config();
    const auto paths = two_paths();
    Path v = paths.front();
    v.gain = Complex{1.0, 0.0};
    for (auto _ : state) {
        auto report = bias_bound(paths, v, cfg);
        benchmark::DoNotOptimize(report);
    }
}
BENCHMARK(BM_BiasBound);

} // namespace
