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

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chestlab/channel.hpp"
#include "chestlab/estimator.hpp"
#include "chestlab/path_generator.hpp"

namespace chestlab {

struct ArraySpec {
    std::string type = "ula"; // "ula" | "positions"
    std::size_t n = 1;
    double spacing_wavelengths = 0.5;
    Vec3 axis{1.0, 0.0, 0.0};
    std::vector<Vec3> positions_m;
    bool recenter = true; // opt-out exists so diagnostics can break centering
};

struct ScenarioSpec {
    std::string name = "scenario";
    ArraySpec tx;
    ArraySpec rx;
    double fc_hz = 28e9;
    std::size_t n_f = 1;
    double spacing_hz = 0.0;
    std::optional<ClusterGenConfig> generator;
    std::optional<std::string> paths_csv;
};

struct ExperimentConfig {
    std::string kind = "bias"; // "bias" | "tradeoff" | "validate"
    std::vector<ScenarioSpec> scenarios;
    std::vector<std::size_t> p_values;
    std::vector<double> snr_db_values;
    std::vector<int> oversampling_values{6};
    std::size_t n_trials = 100;
    std::uint64_t master_seed = 0;
    std::string method = "joint"; // "joint" | "sequential" | "both"
    std::vector<SeqAxis> sequential_order = default_sequential_order();
    std::filesystem::path output_dir = "out";
    int workers = 0; // 0 = CHEST_LAB_WORKERS env or hardware concurrency
};

// Minimal TOML reader covering the subset the presets use: bare keys,
// strings, numbers, booleans, nested arrays, [tables] and [[table arrays]].
// Produces the same JSON document the JSON front end does.
nlohmann::json parse_toml_lite(std::istream& in);

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

// Dispatches on content: files starting with '{' parse as JSON, anything
// else as TOML.
ExperimentConfig load_experiment_config(const std::filesystem::path& file);

void validate(const ExperimentConfig& cfg);

ArrayGeometry build_array(const ArraySpec& spec, double wavelength_m);
ChannelConfig build_channel_config(const ScenarioSpec& scenario);

// Per-trial path list: the clustered generator seeded from (master_seed,
// trial) or the shared imported CSV list.
std::vector<Path> scenario_paths(const ScenarioSpec& scenario, std::uint64_t master_seed,
                                 std::size_t trial);

int resolve_workers(const ExperimentConfig& cfg);

} // namespace chestlab
