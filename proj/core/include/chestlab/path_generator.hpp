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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "chestlab/channel.hpp"
#include "chestlab/rng.hpp"

namespace chestlab {

// Clustered multipath generator.  Cluster centers are uniform in azimuth with
// a tight Gaussian elevation spread, so paths share similar elevations and
// differ mainly in azimuth; subpaths scatter around their cluster with
// Laplacian angle offsets.  Gains follow an exponential power-delay profile
// and are normalized so the total power is exact.
struct ClusterGenConfig {
    std::uint32_t n_clusters_min = 3;
    std::uint32_t n_clusters_max = 8;
    std::uint32_t subpaths_min = 10;
    std::uint32_t subpaths_max = 15;
    double delay_scale_s = 100e-9;
    double intra_cluster_delay_spread_s = 20e-9;
    double intra_cluster_angle_spread_rad = 0.05;
    double elevation_spread_rad = 0.12;
    double total_power = 1.0;
    std::uint64_t seed = 0;
};

void validate(const ClusterGenConfig& cfg);

std::vector<Path> generate_clustered_paths(const ClusterGenConfig& cfg, Rng& rng);

// Convenience overload seeding a generator from cfg.seed.
std::vector<Path> generate_clustered_paths(const ClusterGenConfig& cfg);

// CSV interchange with the exact header
// gain_re,gain_im,doa_az_rad,doa_el_rad,dod_az_rad,dod_el_rad,delay_s
// so externally generated path lists (e.g. exported from a channel
// simulator) can be fed into the harness.
void export_paths_csv(std::ostream& out, const std::vector<Path>& paths);
void export_paths_csv(const std::filesystem::path& file, const std::vector<Path>& paths);
std::vector<Path> import_paths_csv(std::istream& in);
std::vector<Path> import_paths_csv(const std::filesystem::path& file);

} // namespace chestlab
