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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chestlab/config.hpp"

namespace chestlab {

// Model-bias study: the greedy estimator is run directly on each synthesized
// channel (identity observation, no noise) and the relative error per number
// of virtual paths is recorded.  Writes bias.csv (scenario,p,trial,rel_error)
// and bias_mean.csv (scenario,p,mean_rel_error) under cfg.output_dir.
struct BiasExperimentResult {
    std::vector<std::string> scenario_names;
    std::vector<std::size_t> p_values;
    std::vector<std::vector<double>> mean_rel_error; // [scenario][p index]
    std::filesystem::path csv_file;
    std::filesystem::path mean_csv_file;
};

BiasExperimentResult run_bias_experiment(const ExperimentConfig& cfg);

// Joint-versus-sequential study under noise, sweeping oversampling and SNR.
// Writes tradeoff.csv (S,snr_db,p,method,trial,rel_error,time_s), the
// aggregated tradeoff_mean.csv, and tradeoff_time_ratio.csv with the mean
// per-extraction wall clock of each method per oversampling factor.
struct TradeoffExperimentResult {
    std::vector<int> s_values;
    std::vector<double> snr_db_values;
    std::vector<std::size_t> p_values;
    std::vector<std::string> methods;
    // [s][snr][method][p index]
    std::vector<std::vector<std::vector<std::vector<double>>>> mean_rel_error;
    std::vector<double> mean_extraction_seconds_joint;      // per S
    std::vector<double> mean_extraction_seconds_sequential; // per S
    std::filesystem::path csv_file;
    std::filesystem::path mean_csv_file;
    std::filesystem::path time_ratio_csv_file;
};

TradeoffExperimentResult run_tradeoff_experiment(const ExperimentConfig& cfg);

// Property suite over the Fisher/CRB machinery: Jacobian against finite
// differences, within-path information orthogonality (plus the uncentered
// negative control), the closed-form CRB under an identity observation, and
// the lower-bound inequality over random observation matrices.  Returns the
// report and writes crb_validation.json; "all_pass" tells the CLI what exit
// code to use.
nlohmann::json run_crb_validation(const ExperimentConfig& cfg);

// Decorative SVG line charts from aggregated CSVs.  Recognizes the bias and
// tradeoff mean schemas; anything else is a schema error.  Files land next
// to their inputs unless output_dir is non-empty.
std::vector<std::filesystem::path> emit_plots(
    const std::vector<std::filesystem::path>& csv_files,
    const std::filesystem::path& output_dir = {});

} // namespace chestlab
