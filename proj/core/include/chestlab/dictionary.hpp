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

#include <optional>
#include <vector>

#include "chestlab/channel.hpp"

namespace chestlab {

// Search grid for one characteristic-vector extraction.  When auto-built
// with oversampling S, a dimension of size N gets S*N test points, except
// degenerate dimensions (single antenna, single subcarrier) which get a
// single placeholder point so the parameter plays no role in the search.
struct DictionaryGrid {
    std::vector<double> delays;
    std::vector<Direction> doas;
    std::vector<Direction> dods;
    int oversampling = 1;

    std::size_t size() const { return delays.size() * doas.size() * dods.size(); }
};

// Unit axis if all positions are collinear within 1e-9 * radius; nullopt for
// planar/volumetric layouts.  Zero-radius arrays report the x axis.
std::optional<Vec3> collinear_axis(const ArrayGeometry& array);

// Delays sample [0, 1/spacing) uniformly (the delay vector is periodic on a
// uniform grid).  ULA directions sample the spatial frequency cos(angle to
// axis) at S*N midpoints of [-1, 1]; other arrays get an azimuth/elevation
// product grid with exactly S*N points, azimuth count about sqrt(2) times
// the elevation count.
DictionaryGrid make_dictionary(const ChannelConfig& cfg, int oversampling);

} // namespace chestlab
