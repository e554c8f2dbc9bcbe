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

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chestlab/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitValidationFailed = 2;

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"chest-lab: physical-model MIMO channel estimation experiments"};
    app.require_subcommand(1);

    std::string bias_config, tradeoff_config, validate_config;
    std::vector<std::string> plot_csvs;
    std::string plot_out_dir;

    auto* bias = app.add_subcommand("bias", "model-bias study (noiseless greedy projection)");
    bias->add_option("-c,--config", bias_config, "experiment config (TOML or JSON)")->required();

    auto* tradeoff =
        app.add_subcommand("tradeoff", "joint vs sequential estimation under noise");
    tradeoff->add_option("-c,--config", tradeoff_config, "experiment config (TOML or JSON)")
        ->required();

    auto* validate = app.add_subcommand("validate", "CRB/FIM property validation suite");
    validate->add_option("-c,--config", validate_config, "experiment config (TOML or JSON)")
        ->required();

    auto* plot = app.add_subcommand("plot", "render SVG line charts from aggregated CSVs");
    plot->add_option("csv", plot_csvs, "aggregated csv files")->required();
    plot->add_option("-o,--output-dir", plot_out_dir, "directory for the SVG files");

    CLI11_PARSE(app, argc, argv);

    try {
        if (bias->parsed()) {
            const auto cfg = chestlab::load_experiment_config(bias_config);
            const auto result = chestlab::run_bias_experiment(cfg);
            std::cout << "wrote " << result.csv_file.string() << "\n"
                      << "wrote " << result.mean_csv_file.string() << "\n";
        } else if (tradeoff->parsed()) {
            const auto cfg = chestlab::load_experiment_config(tradeoff_config);
            const auto result = chestlab::run_tradeoff_experiment(cfg);
            std::cout << "wrote " << result.csv_file.string() << "\n"
                      << "wrote " << result.mean_csv_file.string() << "\n"
                      << "wrote " << result.time_ratio_csv_file.string() << "\n";
        } else if (validate->parsed()) {
            const auto cfg = chestlab::load_experiment_config(validate_config);
            const auto report = chestlab::run_crb_validation(cfg);
            for (const auto& property : report.at("properties"))
                std::cout << (property.at("pass").get<bool>() ? "[pass] " : "[FAIL] ")
                          << property.at("name").get<std::string>() << " ("
                          << property.at("details").get<std::string>()
                          << ", deviation=" << property.at("deviation").get<double>() << ")\n";
            if (!report.at("all_pass").get<bool>()) {
                std::cerr << "validation suite failed\n";
                return kExitValidationFailed;
            }
        } else if (plot->parsed()) {
            std::vector<std::filesystem::path> files(plot_csvs.begin(), plot_csvs.end());
            const auto written = chestlab::emit_plots(files, plot_out_dir);
            for (const auto& f : written)
                std::cout << "wrote " << f.string() << "\n";
        }
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitError;
    }
    return kExitOk;
}
