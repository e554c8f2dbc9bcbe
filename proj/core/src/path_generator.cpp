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

#include "chestlab/path_generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

namespace chestlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kHalfPi = 0.5 * std::numbers::pi;
constexpr const char* kPathsCsvHeader =
    "gain_re,gain_im,doa_az_rad,doa_el_rad,dod_az_rad,dod_el_rad,delay_s";

double clamp_elevation(double el) { return std::clamp(el, -kHalfPi, kHalfPi); }

} // namespace

void validate(const ClusterGenConfig& cfg) {
    if (cfg.n_clusters_min == 0 || cfg.n_clusters_min > cfg.n_clusters_max)
        throw std::invalid_argument("ClusterGenConfig: bad cluster count range");
    if (cfg.subpaths_min == 0 || cfg.subpaths_min > cfg.subpaths_max)
        throw std::invalid_argument("ClusterGenConfig: bad subpath count range");
    if (cfg.delay_scale_s < 0.0 || cfg.intra_cluster_delay_spread_s < 0.0 ||
        cfg.intra_cluster_angle_spread_rad < 0.0 || cfg.elevation_spread_rad < 0.0)
        throw std::invalid_argument("ClusterGenConfig: spreads must be >= 0");
    if (!(cfg.total_power > 0.0))
        throw std::invalid_argument("ClusterGenConfig: total power must be positive");
    const std::uint64_t max_paths =
        static_cast<std::uint64_t>(cfg.n_clusters_max) * cfg.subpaths_max;
    if (max_paths > 1000)
        throw std::invalid_argument("ClusterGenConfig: at most 1000 paths per draw");
}

std::vector<Path> generate_clustered_paths(const ClusterGenConfig& cfg, Rng& rng) {
    validate(cfg);

    struct Center {
        double az;
        double el;
    };

    const std::uint64_t n_clusters = rng.uniform_index(cfg.n_clusters_min, cfg.n_clusters_max);
    std::vector<Path> paths;
    for (std::uint64_t c = 0; c < n_clusters; ++c) {
        const Center doa_center{rng.uniform(0.0, kTwoPi),
                                clamp_elevation(cfg.elevation_spread_rad * rng.normal())};
        const Center dod_center{rng.uniform(0.0, kTwoPi),
                                clamp_elevation(cfg.elevation_spread_rad * rng.normal())};
        const double cluster_delay = rng.exponential(cfg.delay_scale_s);

        const std::uint64_t n_sub = rng.uniform_index(cfg.subpaths_min, cfg.subpaths_max);
        for (std::uint64_t s = 0; s < n_sub; ++s) {
            Path p;
            p.doa = Direction(
                doa_center.az + rng.laplace(cfg.intra_cluster_angle_spread_rad),
                clamp_elevation(doa_center.el + rng.laplace(cfg.intra_cluster_angle_spread_rad)));
            p.dod = Direction(
                dod_center.az + rng.laplace(cfg.intra_cluster_angle_spread_rad),
                clamp_elevation(dod_center.el + rng.laplace(cfg.intra_cluster_angle_spread_rad)));
            p.delay = cluster_delay + rng.uniform(0.0, cfg.intra_cluster_delay_spread_s);
            const double magnitude =
                cfg.delay_scale_s > 0.0 ? std::exp(-p.delay / (2.0 * cfg.delay_scale_s)) : 1.0;
            p.gain = std::polar(magnitude, rng.uniform(0.0, kTwoPi));
            paths.push_back(p);
        }
    }

    double power = 0.0;
    for (const Path& p : paths)
        power += std::norm(p.gain);
    const double scale = std::sqrt(cfg.total_power / power);
    for (Path& p : paths)
        p.gain *= scale;
    return paths;
}

std::vector<Path> generate_clustered_paths(const ClusterGenConfig& cfg) {
    Rng rng(cfg.seed);
    return generate_clustered_paths(cfg, rng);
}

void export_paths_csv(std::ostream& out, const std::vector<Path>& paths) {
    out << kPathsCsvHeader << '\n';
    char buf[256];
    for (const Path& p : paths) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      p.gain.real(), p.gain.imag(), p.doa.azimuth(), p.doa.elevation(),
                      p.dod.azimuth(), p.dod.elevation(), p.delay);
        out << buf;
    }
}

void export_paths_csv(const std::filesystem::path& file, const std::vector<Path>& paths) {
    std::ofstream out(file);
    if (!out)
        throw std::runtime_error("export_paths_csv: cannot open " + file.string());
    export_paths_csv(out, paths);
}

std::vector<Path> import_paths_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("import_paths_csv: empty input");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != kPathsCsvHeader)
        throw std::runtime_error("import_paths_csv: expected header '" +
                                 std::string(kPathsCsvHeader) + "', got '" + line + "'");

    std::vector<Path> paths;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        double v[7];
        if (std::sscanf(line.c_str(), "%lg,%lg,%lg,%lg,%lg,%lg,%lg", &v[0], &v[1], &v[2], &v[3],
                        &v[4], &v[5], &v[6]) != 7)
            throw std::runtime_error("import_paths_csv: malformed row at line " +
                                     std::to_string(line_no));
        if (std::abs(v[3]) > kHalfPi || std::abs(v[5]) > kHalfPi)
            throw std::range_error("import_paths_csv: elevation out of [-pi/2, pi/2] at line " +
                                   std::to_string(line_no));
        Path p;
        p.gain = Complex(v[0], v[1]);
        p.doa = Direction(v[2], v[3]);
        p.dod = Direction(v[4], v[5]);
        p.delay = v[6];
        paths.push_back(p);
    }
    return paths;
}

std::vector<Path> import_paths_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in)
        throw std::runtime_error("import_paths_csv: cannot open " + file.string());
    return import_paths_csv(in);
}

} // namespace chestlab
