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

#include "chestlab/dictionary.hpp"

#include <cmath>
#include <numbers>

namespace chestlab {

namespace {

// Any unit vector orthogonal to axis (deterministic choice).
Vec3 orthogonal_unit(const Vec3& axis) {
    const double ax = std::abs(axis.x), ay = std::abs(axis.y), az = std::abs(axis.z);
    Vec3 seed{1.0, 0.0, 0.0};
    if (ay <= ax && ay <= az)
        seed = Vec3{0.0, 1.0, 0.0};
    else if (az <= ax && az <= ay)
        seed = Vec3{0.0, 0.0, 1.0};
    return cross(axis, seed).normalized();
}

std::vector<Direction> ula_direction_grid(const Vec3& axis, std::size_t count) {
    const Vec3 a = axis.normalized();
    const Vec3 p = orthogonal_unit(a);
    std::vector<Direction> dirs;
    dirs.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        // midpoints of [-1, 1], so exact endfire never enters the grid
        const double u = (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(count) - 1.0;
        const double s = std::sqrt(std::max(0.0, 1.0 - u * u));
        dirs.push_back(Direction::from_unit(a * u + p * s));
    }
    return dirs;
}

std::vector<Direction> sphere_direction_grid(std::size_t count) {
    // azimuth x elevation product grid with exactly `count` points; the
    // azimuth range is twice the elevation range, so aim for
    // n_el ~ sqrt(count / 2) and take the nearest divisor.
    std::size_t target = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(count) / 2.0))));
    std::size_t n_el = 1;
    for (std::size_t d = 1; d <= target; ++d)
        if (count % d == 0)
            n_el = d;
    const std::size_t n_az = count / n_el;

    std::vector<Direction> dirs;
    dirs.reserve(count);
    constexpr double pi = std::numbers::pi;
    for (std::size_t ia = 0; ia < n_az; ++ia) {
        const double az = 2.0 * pi * static_cast<double>(ia) / static_cast<double>(n_az);
        for (std::size_t ie = 0; ie < n_el; ++ie) {
            const double el =
                -0.5 * pi + pi * (static_cast<double>(ie) + 0.5) / static_cast<double>(n_el);
            dirs.emplace_back(az, el);
        }
    }
    return dirs;
}

std::vector<Direction> direction_grid(const ArrayGeometry& array, int oversampling) {
    if (array.size() == 1)
        return {Direction(0.0, 0.0)}; // placeholder; the parameter is inert
    const std::size_t count = static_cast<std::size_t>(oversampling) * array.size();
    if (auto axis = collinear_axis(array))
        return ula_direction_grid(*axis, count);
    return sphere_direction_grid(count);
}

} // namespace

std::optional<Vec3> collinear_axis(const ArrayGeometry& array) {
    if (array.radius() == 0.0)
        return Vec3{1.0, 0.0, 0.0};
    Vec3 axis{};
    for (const auto& p : array.positions())
        if (p.norm() > axis.norm())
            axis = p;
    axis = axis.normalized();
    const double tol = 1e-9 * array.radius();
    for (const auto& p : array.positions()) {
        const Vec3 residual = p - axis * p.dot(axis);
        if (residual.norm() > tol)
            return std::nullopt;
    }
    return axis;
}

DictionaryGrid make_dictionary(const ChannelConfig& cfg, int oversampling) {
    if (oversampling < 1)
        throw std::invalid_argument("make_dictionary: oversampling must be >= 1");

    DictionaryGrid grid;
    grid.oversampling = oversampling;

    if (cfg.n_f() == 1) {
        grid.delays = {0.0};
    } else {
        const double spacing = cfg.grid.subcarrier_spacing();
        const std::size_t n_zeta = static_cast<std::size_t>(oversampling) * cfg.grid.size();
        grid.delays.reserve(n_zeta);
        for (std::size_t i = 0; i < n_zeta; ++i)
            grid.delays.push_back(static_cast<double>(i) /
                                  (static_cast<double>(n_zeta) * spacing));
    }

    grid.doas = direction_grid(cfg.rx, oversampling);
    grid.dods = direction_grid(cfg.tx, oversampling);
    return grid;
}

} // namespace chestlab
