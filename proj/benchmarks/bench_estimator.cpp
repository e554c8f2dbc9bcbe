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

#include "chestlab/estimator.hpp"
#include "chestlab/path_generator.hpp"

namespace {

using namespace chestlab;

ChannelConfig tradeoff_config() {
    FrequencyGrid grid = make_frequency_grid(28e9, 12, 15e6);
    ArrayGeometry tx = make_ula(64, 0.5, Vec3{1, 0, 0}, grid.wavelength());
    ArrayGeometry rx = make_ula(1, 0.5, Vec3{1, 0, 0}, grid.wavelength());
    return ChannelConfig{std::move(tx), std::move(rx), std::move(grid)};
}

Eigen::VectorXcd noisy_observation(const ChannelConfig& cfg, double snr_db, Rng& rng) {
    ClusterGenConfig gen;
    const auto paths = generate_clustered_paths(gen, rng);
    const ChannelVec h = synthesize_channel(cfg, paths);
    const ObservationModel noiseless = make_identity_observation(cfg.dim(), 0.0);
    const ObservationModel obs =
        noiseless.with_sigma2(sigma2_for_snr_db(noiseless, h, snr_db));
    return observe(obs, h, rng);
}

void BM_JointExtraction(benchmark::State& state) {
    const ChannelConfig cfg = tradeoff_config();
    const DictionaryGrid grid = make_dictionary(cfg, static_cast<int>(state.range(0)));
    const ObservationModel obs = make_identity_observation(cfg.dim(), 0.0);
    Rng rng(7);
    const Eigen::VectorXcd y = noisy_observation(cfg, 0.0, rng);
    for (auto _ : state) {
        auto out = joint_estimate_path(y, obs, grid, cfg);
        benchmark::DoNotOptimize(out);
    }
}
BENCHMARK(BM_JointExtraction)->Arg(2)->Arg(4)->Arg(6);

void BM_SequentialExtraction(benchmark::State& state) {
    const ChannelConfig cfg = tradeoff_config();
    const DictionaryGrid grid = make_dictionary(cfg, static_cast<int>(state.range(0)));
    const ObservationModel obs = make_identity_observation(cfg.dim(), 0.0);
    Rng rng(7);
    const Eigen::VectorXcd y = noisy_observation(cfg, 0.0, rng);
    for (auto _ : state) {
        auto out = sequential_estimate_path(y, obs, grid, cfg);
        benchmark::DoNotOptimize(out);
    }
}
BENCHMARK(BM_SequentialExtraction)->Arg(2)->Arg(4)->Arg(6);

void BM_GreedyEstimate(benchmark::State& state) {
    const ChannelConfig cfg = tradeoff_config();
    const DictionaryGrid grid = make_dictionary(cfg, 4);
    const ObservationModel obs = make_identity_observation(cfg.dim(), 0.0);
    Rng rng(11);
    const Eigen::VectorXcd y = noisy_observation(cfg, 10.0, rng);
    for (auto _ : state) {
        auto est = greedy_estimate(y, obs, static_cast<std::size_t>(state.range(0)), grid,
                                   ExtractionMethod::Joint, cfg);
        benchmark::DoNotOptimize(est);
    }
}
BENCHMARK(BM_GreedyEstimate)->Arg(4)->Arg(8);

void BM_SynthesizeChannel(benchmark::State& state) {
    const ChannelConfig cfg = tradeoff_config();
    ClusterGenConfig gen;
    Rng rng(3);
    const auto paths = generate_clustered_paths(gen, rng);
    for (auto _ : state) {
        auto h = synthesize_channel(cfg, paths);
        benchmark::DoNotOptimize(h);
    }
}
BENCHMARK(BM_SynthesizeChannel);

} // namespace

BENCHMARK_MAIN();
