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

#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "chestlab/experiment.hpp"

using namespace chestlab;

namespace {

std::string tiny_bias_toml(const std::string& out_dir) {
    return std::string("# tiny bias study\n"
                       "[experiment]\n"
                       "kind = \"bias\"\n"
                       "master_seed = 42\n"
                       "n_trials = 3\n"
                       "method = \"joint\"\n"
                       "p_values = [1, 2, 3]\n"
                       "oversampling_values = [2]\n"
                       "output_dir = \"") +
           out_dir +
           "\"\n"
           "\n"
           "[[scenarios]]\n"
           "name = \"tiny\"\n"
           "\n"
           "[scenarios.tx]\n"
           "type = \"ula\"\n"
           "n = 8\n"
           "spacing_wavelengths = 0.5\n"
           "axis = [1.0, 0.0, 0.0]\n"
           "\n"
           "[scenarios.rx]\n"
           "type = \"ula\"\n"
           "n = 1\n"
           "\n"
           "[scenarios.grid]\n"
           "fc_hz = 28.0e9\n"
           "n_f = 1\n"
           "\n"
           "[scenarios.generator]\n"
           "n_clusters = [2, 3]\n"
           "subpaths_per_cluster = [3, 5]\n";
}

std::string read_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig config_from_toml_text(const std::string& text) {
    std::istringstream in(text);
    return experiment_config_from_json(parse_toml_lite(in));
}

} // namespace

TEST_CASE("toml-lite parser") {
    SECTION("scalars, arrays and tables") {
        std::istringstream in("title = \"hello\"  # comment\n"
                              "count = 3\n"
                              "ratio = 1.5e-3\n"
                              "flag = true\n"
                              "values = [1, 2, 3]\n"
                              "nested = [[1.0, 0.0], [0.0, 1.0]]\n"
                              "[section.inner]\n"
                              "key = \"v\"\n"
                              "[[rows]]\n"
                              "a = 1\n"
                              "[[rows]]\n"
                              "a = 2\n");
        const nlohmann::json j = parse_toml_lite(in);
        CHECK(j.at("title") == "hello");
        CHECK(j.at("count") == 3);
        CHECK(j.at("ratio").get<double>() == Catch::Approx(1.5e-3));
        CHECK(j.at("flag") == true);
        CHECK(j.at("values").size() == 3);
        CHECK(j.at("nested")[1][1] == 1.0);
        CHECK(j.at("section").at("inner").at("key") == "v");
        REQUIRE(j.at("rows").size() == 2);
        CHECK(j.at("rows")[1].at("a") == 2);
    }

    SECTION("parse errors carry line numbers") {
        std::istringstream in("ok = 1\nbroken line\n");
        CHECK_THROWS_WITH(parse_toml_lite(in), Catch::Matchers::ContainsSubstring("line 2"));
    }
}

TEST_CASE("experiment config loading") {
    const ExperimentConfig cfg = config_from_toml_text(tiny_bias_toml("out"));
    CHECK(cfg.kind == "bias");
    CHECK(cfg.n_trials == 3);
    CHECK(cfg.p_values == std::vector<std::size_t>{1, 2, 3});
    REQUIRE(cfg.scenarios.size() == 1);
    CHECK(cfg.scenarios[0].tx.n == 8);
    CHECK(cfg.scenarios[0].generator.has_value());

    SECTION("JSON front end accepts the same document") {
        const nlohmann::json j{
            {"experiment",
             {{"kind", "bias"},
              {"n_trials", 2},
              {"p_values", {1, 2}},
              {"oversampling_values", {2}},
              {"output_dir", "out"}}},
            {"scenarios",
             {{{"name", "j"},
               {"tx", {{"type", "ula"}, {"n", 4}}},
               {"rx", {{"type", "ula"}, {"n", 1}}},
               {"grid", {{"fc_hz", 28e9}, {"n_f", 1}}},
               {"generator", {{"n_clusters", {1, 2}}, {"subpaths_per_cluster", {2, 3}}}}}}}};
        const ExperimentConfig from_json = experiment_config_from_json(j);
        CHECK(from_json.scenarios.size() == 1);
        CHECK(from_json.scenarios[0].tx.n == 4);
    }

    SECTION("validation rejects bad configs") {
        CHECK_THROWS_AS(config_from_toml_text("[experiment]\nkind = \"nope\"\n"),
                        std::invalid_argument);
        std::string decreasing = tiny_bias_toml("out");
        const auto pos = decreasing.find("p_values = [1, 2, 3]");
        decreasing.replace(pos, std::string("p_values = [1, 2, 3]").size(),
                           "p_values = [3, 2, 1]");
        CHECK_THROWS_AS(config_from_toml_text(decreasing), std::invalid_argument);
    }
}

TEST_CASE("bias experiment is deterministic and ordered") {
    const auto dir_a = std::filesystem::temp_directory_path() / "chestlab_test_bias_a";
    const auto dir_b = std::filesystem::temp_directory_path() / "chestlab_test_bias_b";
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);

    ExperimentConfig cfg = config_from_toml_text(tiny_bias_toml(dir_a.string()));
    cfg.workers = 1;
    const BiasExperimentResult run_a = run_bias_experiment(cfg);

    ExperimentConfig cfg2 = cfg;
    cfg2.output_dir = dir_b;
    cfg2.workers = 2; // different scheduling must not change the rows
    const BiasExperimentResult run_b = run_bias_experiment(cfg2);

    CHECK(read_file(run_a.csv_file) == read_file(run_b.csv_file));
    CHECK(read_file(run_a.mean_csv_file) == read_file(run_b.mean_csv_file));

    // mean error shrinks with p on every scenario
    for (const auto& curve : run_a.mean_rel_error)
        for (std::size_t i = 0; i + 1 < curve.size(); ++i)
            CHECK(curve[i + 1] <= curve[i] + 1e-12);

    const std::string header = read_file(run_a.csv_file).substr(0, 26);
    CHECK(header == "scenario,p,trial,rel_error");
}

TEST_CASE("tradeoff experiment shapes") {
    const auto dir = std::filesystem::temp_directory_path() / "chestlab_test_tradeoff";
    std::filesystem::remove_all(dir);

    ExperimentConfig cfg;
    cfg.kind = "tradeoff";
    cfg.master_seed = 7;
    cfg.n_trials = 2;
    cfg.method = "both";
    cfg.p_values = {1, 2, 4};
    cfg.snr_db_values = {0.0, 10.0};
    cfg.oversampling_values = {2};
    cfg.output_dir = dir;
    cfg.workers = 2;

    ScenarioSpec scenario;
    scenario.name = "tiny";
    scenario.tx = ArraySpec{"ula", 8, 0.5, Vec3{1, 0, 0}, {}, true};
    scenario.rx = ArraySpec{"ula", 1, 0.5, Vec3{1, 0, 0}, {}, true};
    scenario.fc_hz = 28e9;
    scenario.n_f = 4;
    scenario.spacing_hz = 15e6;
    ClusterGenConfig gen;
    gen.n_clusters_min = 2;
    gen.n_clusters_max = 3;
    gen.subpaths_min = 3;
    gen.subpaths_max = 4;
    scenario.generator = gen;
    cfg.scenarios = {scenario};

    const TradeoffExperimentResult result = run_tradeoff_experiment(cfg);
    CHECK(result.methods == std::vector<std::string>{"joint", "sequential"});
    REQUIRE(result.mean_rel_error.size() == 1);            // one S
    REQUIRE(result.mean_rel_error[0].size() == 2);         // two SNRs
    REQUIRE(result.mean_rel_error[0][0].size() == 2);      // two methods
    REQUIRE(result.mean_rel_error[0][0][0].size() == 3);   // three p values

    const std::string raw = read_file(result.csv_file);
    CHECK(raw.rfind("S,snr_db,p,method,trial,rel_error,time_s", 0) == 0);
    // rows: S x snr x p x method x trial plus header line
    const auto lines = std::count(raw.begin(), raw.end(), '\n');
    CHECK(lines == 1 + 1 * 2 * 3 * 2 * 2);

    const std::string ratio = read_file(result.time_ratio_csv_file);
    CHECK(ratio.rfind("S,t_joint_s,t_seq_s,ratio", 0) == 0);
}

TEST_CASE("crb validation report") {
    const auto dir = std::filesystem::temp_directory_path() / "chestlab_test_validate";
    std::filesystem::remove_all(dir);

    ExperimentConfig cfg;
    cfg.kind = "validate";
    cfg.n_trials = 5;
    cfg.master_seed = 9;
    cfg.output_dir = dir;
    const nlohmann::json report = run_crb_validation(cfg);
    CHECK(report.at("all_pass").get<bool>());
    CHECK(report.at("properties").size() >= 5);
    CHECK(std::filesystem::exists(dir / "crb_validation.json"));
}

TEST_CASE("plot emission") {
    const auto dir = std::filesystem::temp_directory_path() / "chestlab_test_plots";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);

    SECTION("bias schema: one polyline per scenario") {
        const auto csv = dir / "bias_mean.csv";
        std::ofstream(csv) << "scenario,p,mean_rel_error\n"
                              "a,1,0.5\na,2,0.25\nb,1,0.4\nb,2,0.2\n";
        const auto written = emit_plots({csv}, dir);
        REQUIRE(written.size() == 1);
        const std::string svg = read_file(written[0]);
        CHECK(std::count(svg.begin(), svg.end(), '\n') > 5);
        std::size_t polylines = 0, pos = 0;
        while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
            ++polylines;
            pos += 9;
        }
        CHECK(polylines == 2);
    }

    SECTION("tradeoff schema: one file per S, series per (method, snr)") {
        const auto csv = dir / "tradeoff_mean.csv";
        std::ofstream(csv) << "S,snr_db,p,method,mean_rel_error\n"
                              "2,0,1,joint,0.5\n2,0,2,joint,0.4\n"
                              "2,10,1,joint,0.3\n2,10,2,joint,0.2\n"
                              "2,0,1,sequential,0.55\n2,0,2,sequential,0.45\n"
                              "2,10,1,sequential,0.35\n2,10,2,sequential,0.25\n"
                              "4,0,1,joint,0.5\n4,0,2,joint,0.4\n";
        const auto written = emit_plots({csv}, dir);
        REQUIRE(written.size() == 2); // S = 2 and S = 4
        const std::string svg = read_file(written[0]);
        std::size_t polylines = 0, pos = 0;
        while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
            ++polylines;
            pos += 9;
        }
        CHECK(polylines == 4); // 2 methods x 2 SNRs
    }

    SECTION("empty data still produces a chart") {
        const auto csv = dir / "empty.csv";
        std::ofstream(csv) << "scenario,p,mean_rel_error\n";
        const auto written = emit_plots({csv}, dir);
        REQUIRE(written.size() == 1);
        CHECK(read_file(written[0]).find("<svg") != std::string::npos);
    }

    SECTION("unknown schema is an error") {
        const auto csv = dir / "bad.csv";
        std::ofstream(csv) << "foo,bar\n1,2\n";
        CHECK_THROWS_WITH(emit_plots({csv}, dir),
                          Catch::Matchers::ContainsSubstring("schema"));
    }
}
