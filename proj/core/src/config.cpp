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

#include "chestlab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

namespace chestlab {

namespace {

// ---- TOML-lite ------------------------------------------------------------

std::string strip_comment_and_trim(const std::string& line) {
    std::string out;
    bool in_string = false;
    for (char c : line) {
        if (c == '"')
            in_string = !in_string;
        if (c == '#' && !in_string)
            break;
        out.push_back(c);
    }
    const auto begin = out.find_first_not_of(" \t\r");
    if (begin == std::string::npos)
        return {};
    const auto end = out.find_last_not_of(" \t\r");
    return out.substr(begin, end - begin + 1);
}

[[noreturn]] void toml_error(std::size_t line_no, const std::string& what) {
    throw std::runtime_error("toml parse error at line " + std::to_string(line_no) + ": " + what);
}

nlohmann::json parse_toml_value(const std::string& text, std::size_t& pos, std::size_t line_no);

nlohmann::json parse_toml_array(const std::string& text, std::size_t& pos, std::size_t line_no) {
    auto array = nlohmann::json::array();
    ++pos; // '['
    while (true) {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
            ++pos;
        if (pos >= text.size())
            toml_error(line_no, "unterminated array");
        if (text[pos] == ']') {
            ++pos;
            return array;
        }
        array.push_back(parse_toml_value(text, pos, line_no));
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
            ++pos;
        if (pos < text.size() && text[pos] == ',') {
            ++pos;
            continue;
        }
        if (pos < text.size() && text[pos] == ']') {
            ++pos;
            return array;
        }
        toml_error(line_no, "expected ',' or ']' in array");
    }
}

nlohmann::json parse_toml_value(const std::string& text, std::size_t& pos, std::size_t line_no) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
        ++pos;
    if (pos >= text.size())
        toml_error(line_no, "missing value");

    if (text[pos] == '[')
        return parse_toml_array(text, pos, line_no);
    if (text[pos] == '"') {
        std::string s;
        ++pos;
        while (pos < text.size() && text[pos] != '"')
            s.push_back(text[pos++]);
        if (pos >= text.size())
            toml_error(line_no, "unterminated string");
        ++pos;
        return s;
    }

    std::size_t end = pos;
    while (end < text.size() && text[end] != ',' && text[end] != ']' &&
           !std::isspace(static_cast<unsigned char>(text[end])))
        ++end;
    const std::string token = text.substr(pos, end - pos);
    pos = end;

    if (token == "true")
        return true;
    if (token == "false")
        return false;

    const std::size_t digits_from = (token[0] == '+' || token[0] == '-') ? 1 : 0;
    const bool integral =
        digits_from < token.size() &&
        std::all_of(token.begin() + static_cast<std::ptrdiff_t>(digits_from), token.end(),
                    [](unsigned char c) { return std::isdigit(c); });
    try {
        if (integral)
            return std::stoll(token);
        std::size_t used = 0;
        const double v = std::stod(token, &used);
        if (used != token.size())
            toml_error(line_no, "bad number '" + token + "'");
        return v;
    } catch (const std::exception&) {
        toml_error(line_no, "bad value '" + token + "'");
    }
}

std::vector<std::string> split_table_path(const std::string& path, std::size_t line_no) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream in(path);
    while (std::getline(in, part, '.')) {
        if (part.empty())
            toml_error(line_no, "empty table name component");
        parts.push_back(part);
    }
    if (parts.empty())
        toml_error(line_no, "empty table name");
    return parts;
}

nlohmann::json* descend(nlohmann::json& root, const std::vector<std::string>& parts,
                        std::size_t upto) {
    nlohmann::json* node = &root;
    for (std::size_t i = 0; i < upto; ++i) {
        nlohmann::json& child = (*node)[parts[i]];
        if (child.is_null())
            child = nlohmann::json::object();
        if (child.is_array()) {
            if (child.empty())
                child.push_back(nlohmann::json::object());
            node = &child.back();
        } else {
            node = &child;
        }
    }
    return node;
}

} // namespace

nlohmann::json parse_toml_lite(std::istream& in) {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* current = &root;

    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = strip_comment_and_trim(raw);
        if (line.empty())
            continue;

        if (line.rfind("[[", 0) == 0) {
            if (line.size() < 5 || line.substr(line.size() - 2) != "]]")
                toml_error(line_no, "malformed table array header");
            const auto parts = split_table_path(line.substr(2, line.size() - 4), line_no);
            nlohmann::json* parent = descend(root, parts, parts.size() - 1);
            nlohmann::json& arr = (*parent)[parts.back()];
            if (arr.is_null())
                arr = nlohmann::json::array();
            if (!arr.is_array())
                toml_error(line_no, "table array name already used as a value");
            arr.push_back(nlohmann::json::object());
            current = &arr.back();
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']')
                toml_error(line_no, "malformed table header");
            const auto parts = split_table_path(line.substr(1, line.size() - 2), line_no);
            current = descend(root, parts, parts.size());
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            toml_error(line_no, "expected 'key = value'");
        std::string key = line.substr(0, eq);
        key.erase(key.find_last_not_of(" \t") + 1);
        if (key.empty())
            toml_error(line_no, "empty key");
        std::size_t pos = eq + 1;
        (*current)[key] = parse_toml_value(line, pos, line_no);
        while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos])))
            ++pos;
        if (pos != line.size())
            toml_error(line_no, "trailing characters after value");
    }
    return root;
}

namespace {

Vec3 vec3_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 3)
        throw std::invalid_argument("config: expected a 3-element array for a vector");
    return Vec3{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

ArraySpec array_spec_from_json(const nlohmann::json& j) {
    ArraySpec spec;
    spec.type = j.value("type", std::string("ula"));
    if (spec.type == "ula") {
        spec.n = j.at("n").get<std::size_t>();
        spec.spacing_wavelengths = j.value("spacing_wavelengths", 0.5);
        if (j.contains("axis"))
            spec.axis = vec3_from_json(j.at("axis"));
    } else if (spec.type == "positions") {
        for (const auto& p : j.at("positions_m"))
            spec.positions_m.push_back(vec3_from_json(p));
        spec.n = spec.positions_m.size();
    } else {
        throw std::invalid_argument("config: unknown array type '" + spec.type + "'");
    }
    spec.recenter = j.value("recenter", true);
    return spec;
}

ClusterGenConfig generator_from_json(const nlohmann::json& j) {
    ClusterGenConfig gen;
    if (j.contains("n_clusters")) {
        gen.n_clusters_min = j.at("n_clusters")[0].get<std::uint32_t>();
        gen.n_clusters_max = j.at("n_clusters")[1].get<std::uint32_t>();
    }
    if (j.contains("subpaths_per_cluster")) {
        gen.subpaths_min = j.at("subpaths_per_cluster")[0].get<std::uint32_t>();
        gen.subpaths_max = j.at("subpaths_per_cluster")[1].get<std::uint32_t>();
    }
    gen.delay_scale_s = j.value("delay_scale_s", gen.delay_scale_s);
    gen.intra_cluster_delay_spread_s =
        j.value("intra_cluster_delay_spread_s", gen.intra_cluster_delay_spread_s);
    gen.intra_cluster_angle_spread_rad =
        j.value("intra_cluster_angle_spread_rad", gen.intra_cluster_angle_spread_rad);
    gen.elevation_spread_rad = j.value("elevation_spread_rad", gen.elevation_spread_rad);
    gen.total_power = j.value("total_power", gen.total_power);
    gen.seed = j.value("seed", gen.seed);
    validate(gen);
    return gen;
}

ScenarioSpec scenario_from_json(const nlohmann::json& j) {
    ScenarioSpec s;
    s.name = j.value("name", std::string("scenario"));
    s.tx = array_spec_from_json(j.at("tx"));
    s.rx = array_spec_from_json(j.at("rx"));
    const auto& grid = j.at("grid");
    s.fc_hz = grid.at("fc_hz").get<double>();
    s.n_f = grid.at("n_f").get<std::size_t>();
    s.spacing_hz = grid.value("spacing_hz", 0.0);
    if (j.contains("generator"))
        s.generator = generator_from_json(j.at("generator"));
    if (j.contains("paths_csv"))
        s.paths_csv = j.at("paths_csv").get<std::string>();
    if (!s.generator && !s.paths_csv)
        throw std::invalid_argument("config: scenario '" + s.name +
                                    "' needs a generator or a paths_csv source");
    return s;
}

std::vector<SeqAxis> order_from_json(const nlohmann::json& j) {
    std::vector<SeqAxis> order;
    for (const auto& item : j) {
        const std::string s = item.get<std::string>();
        if (s == "delay")
            order.push_back(SeqAxis::Delay);
        else if (s == "dod")
            order.push_back(SeqAxis::Dod);
        else if (s == "doa")
            order.push_back(SeqAxis::Doa);
        else
            throw std::invalid_argument("config: unknown sequential axis '" + s + "'");
    }
    return order;
}

} // namespace

ExperimentConfig experiment_config_from_json(const nlohmann::json& root) {
    const nlohmann::json& j = root.contains("experiment") ? root.at("experiment") : root;

    ExperimentConfig cfg;
    cfg.kind = j.value("kind", std::string("bias"));
    if (j.contains("p_values"))
        cfg.p_values = j.at("p_values").get<std::vector<std::size_t>>();
    if (j.contains("snr_db_values"))
        cfg.snr_db_values = j.at("snr_db_values").get<std::vector<double>>();
    if (j.contains("oversampling_values"))
        cfg.oversampling_values = j.at("oversampling_values").get<std::vector<int>>();
    cfg.n_trials = j.value("n_trials", cfg.n_trials);
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    cfg.method = j.value("method", cfg.method);
    if (j.contains("sequential_order"))
        cfg.sequential_order = order_from_json(j.at("sequential_order"));
    cfg.output_dir = j.value("output_dir", cfg.output_dir.string());
    cfg.workers = j.value("workers", cfg.workers);

    if (root.contains("scenarios"))
        for (const auto& s : root.at("scenarios"))
            cfg.scenarios.push_back(scenario_from_json(s));
    else if (root.contains("scenario"))
        cfg.scenarios.push_back(scenario_from_json(root.at("scenario")));

    validate(cfg);
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in)
        throw std::runtime_error("cannot open config file " + file.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();

    const auto first = text.find_first_not_of(" \t\r\n");
    nlohmann::json j;
    if (first != std::string::npos && text[first] == '{') {
        j = nlohmann::json::parse(text);
    } else {
        std::istringstream stream(text);
        j = parse_toml_lite(stream);
    }
    return experiment_config_from_json(j);
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.kind != "bias" && cfg.kind != "tradeoff" && cfg.kind != "validate")
        throw std::invalid_argument("config: unknown experiment kind '" + cfg.kind + "'");
    if (cfg.n_trials < 1)
        throw std::invalid_argument("config: n_trials must be >= 1");
    if (cfg.method != "joint" && cfg.method != "sequential" && cfg.method != "both")
        throw std::invalid_argument("config: unknown method '" + cfg.method + "'");
    for (int s : cfg.oversampling_values)
        if (s < 1)
            throw std::invalid_argument("config: oversampling values must be >= 1");

    if (cfg.kind == "bias" || cfg.kind == "tradeoff") {
        if (cfg.scenarios.empty())
            throw std::invalid_argument("config: at least one scenario required");
        if (cfg.p_values.empty())
            throw std::invalid_argument("config: p_values must be non-empty");
        for (std::size_t i = 0; i + 1 < cfg.p_values.size(); ++i)
            if (cfg.p_values[i] >= cfg.p_values[i + 1])
                throw std::invalid_argument("config: p_values must be strictly increasing");
        if (cfg.p_values.front() < 1)
            throw std::invalid_argument("config: p_values must be >= 1");
    }
    if (cfg.kind == "bias" && cfg.method == "both")
        throw std::invalid_argument("config: bias runs use a single method");
    if (cfg.kind == "tradeoff") {
        if (cfg.scenarios.size() != 1)
            throw std::invalid_argument("config: tradeoff runs use exactly one scenario");
        if (cfg.snr_db_values.empty())
            throw std::invalid_argument("config: tradeoff runs need snr_db_values");
    }
}

ArrayGeometry build_array(const ArraySpec& spec, double wavelength_m) {
    if (spec.type == "ula") {
        ArrayGeometry array = make_ula(spec.n, spec.spacing_wavelengths, spec.axis, wavelength_m);
        if (!spec.recenter) {
            // shift by one radius along the axis to expose the uncentered case
            std::vector<Vec3> shifted = array.positions();
            const Vec3 offset = spec.axis.normalized() * array.radius();
            for (Vec3& p : shifted)
                p = p + offset;
            return ArrayGeometry::uncentered(std::move(shifted));
        }
        return array;
    }
    if (spec.recenter)
        return center(spec.positions_m);
    return ArrayGeometry::uncentered(spec.positions_m);
}

ChannelConfig build_channel_config(const ScenarioSpec& scenario) {
    FrequencyGrid grid = make_frequency_grid(scenario.fc_hz, scenario.n_f, scenario.spacing_hz);
    ArrayGeometry tx = build_array(scenario.tx, grid.wavelength());
    ArrayGeometry rx = build_array(scenario.rx, grid.wavelength());
    return ChannelConfig{std::move(tx), std::move(rx), std::move(grid)};
}

std::vector<Path> scenario_paths(const ScenarioSpec& scenario, std::uint64_t master_seed,
                                 std::size_t trial) {
    if (scenario.generator) {
        Rng rng(derive_seed(master_seed, {0x70617468ULL, trial}));
        return generate_clustered_paths(*scenario.generator, rng);
    }
    return import_paths_csv(std::filesystem::path(*scenario.paths_csv));
}

int resolve_workers(const ExperimentConfig& cfg) {
    if (cfg.workers > 0)
        return cfg.workers;
    if (const char* env = std::getenv("CHEST_LAB_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0)
            return w;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

} // namespace chestlab
