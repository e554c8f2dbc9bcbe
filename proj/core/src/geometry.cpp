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

#include "chestlab/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace chestlab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kHalfPi = 0.5 * std::numbers::pi;
} // namespace

Vec3 Vec3::normalized() const {
    const double n = norm();
    if (n == 0.0)
        throw std::invalid_argument("Vec3::normalized: zero vector");
    return *this / n;
}

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

Direction::Direction(double azimuth_rad, double elevation_rad) {
    if (!std::isfinite(azimuth_rad) || !std::isfinite(elevation_rad))
        throw std::invalid_argument("Direction: non-finite angles");
    if (elevation_rad < -kHalfPi || elevation_rad > kHalfPi)
        throw std::invalid_argument("Direction: elevation outside [-pi/2, pi/2]");
    double az = std::fmod(azimuth_rad, kTwoPi);
    if (az < 0.0)
        az += kTwoPi;
    if (az >= kTwoPi)
        az = 0.0;
    azimuth_ = az;
    elevation_ = elevation_rad;
    const double ce = std::cos(elevation_rad);
    unit_ = Vec3{ce * std::cos(az), ce * std::sin(az), std::sin(elevation_rad)};
}

Direction Direction::from_unit(const Vec3& u) {
    const Vec3 n = u.normalized();
    const double el = std::asin(std::clamp(n.z, -1.0, 1.0));
    double az = std::atan2(n.y, n.x);
    if (std::abs(n.x) < 1e-300 && std::abs(n.y) < 1e-300)
        az = 0.0; // pole: azimuth is arbitrary, pick 0
    return Direction(az, el);
}

ArrayGeometry::ArrayGeometry(std::vector<Vec3> positions) {
    if (positions.empty())
        throw std::invalid_argument("ArrayGeometry: empty position list");
    Vec3 centroid{};
    for (const auto& p : positions)
        centroid = centroid + p;
    centroid = centroid / static_cast<double>(positions.size());
    for (auto& p : positions)
        p = p - centroid;
    positions_ = std::move(positions);
    radius_ = 0.0;
    for (const auto& p : positions_)
        radius_ = std::max(radius_, p.norm());
}

ArrayGeometry ArrayGeometry::uncentered(std::vector<Vec3> positions) {
    if (positions.empty())
        throw std::invalid_argument("ArrayGeometry: empty position list");
    ArrayGeometry a;
    a.positions_ = std::move(positions);
    a.radius_ = 0.0;
    for (const auto& p : a.positions_)
        a.radius_ = std::max(a.radius_, p.norm());
    return a;
}

FrequencyGrid::FrequencyGrid(double fc_hz, std::vector<double> offsets_hz) {
    if (offsets_hz.empty())
        throw std::invalid_argument("FrequencyGrid: empty offset list");
    if (fc_hz <= 0.0)
        throw std::invalid_argument("FrequencyGrid: central frequency must be positive");
    double mean = 0.0;
    for (double f : offsets_hz)
        mean += f;
    mean /= static_cast<double>(offsets_hz.size());
    for (double& f : offsets_hz)
        f -= mean;
    fc_ = fc_hz;
    offsets_ = std::move(offsets_hz);
    const auto [lo, hi] = std::minmax_element(offsets_.begin(), offsets_.end());
    bandwidth_ = *hi - *lo;
    wavelength_ = kSpeedOfLight / fc_;
}

double FrequencyGrid::subcarrier_spacing() const {
    if (offsets_.size() < 2)
        throw std::logic_error("FrequencyGrid: spacing undefined for a single subcarrier");
    const double step = bandwidth_ / static_cast<double>(offsets_.size() - 1);
    for (std::size_t k = 1; k < offsets_.size(); ++k) {
        if (std::abs((offsets_[k] - offsets_[k - 1]) - step) > 1e-9 * bandwidth_)
            throw std::logic_error("FrequencyGrid: grid is not uniformly spaced");
    }
    return step;
}

ArrayGeometry make_ula(std::size_t n, double spacing_wavelengths, const Vec3& axis,
                       double wavelength_m) {
    if (n == 0)
        throw std::invalid_argument("make_ula: need at least one antenna");
    if (spacing_wavelengths <= 0.0)
        throw std::invalid_argument("make_ula: spacing must be positive");
    if (wavelength_m <= 0.0)
        throw std::invalid_argument("make_ula: wavelength must be positive");
    if (axis.norm() == 0.0)
        throw std::invalid_argument("make_ula: zero axis");
    const Vec3 dir = axis.normalized();
    const double step = spacing_wavelengths * wavelength_m;
    std::vector<Vec3> positions;
    positions.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double t = (static_cast<double>(j) - 0.5 * static_cast<double>(n - 1)) * step;
        positions.push_back(dir * t);
    }
    return ArrayGeometry(std::move(positions));
}

ArrayGeometry center(std::vector<Vec3> positions) {
    return ArrayGeometry(std::move(positions));
}

FrequencyGrid make_frequency_grid(double fc_hz, std::size_t n_f, double spacing_hz) {
    if (n_f == 0)
        throw std::invalid_argument("make_frequency_grid: n_f must be >= 1");
    if (n_f > 1 && spacing_hz <= 0.0)
        throw std::invalid_argument("make_frequency_grid: spacing must be positive");
    std::vector<double> offsets(n_f, 0.0);
    for (std::size_t k = 0; k < n_f; ++k)
        offsets[k] = static_cast<double>(k) * spacing_hz;
    return FrequencyGrid(fc_hz, std::move(offsets));
}

TangentBasis tangent_basis(const Direction& d, const ArrayGeometry& array) {
    if (std::abs(std::abs(d.elevation()) - kHalfPi) < 1e-9)
        throw PoleSingularityError("tangent_basis: direction at elevation pole");

    const double az = d.azimuth();
    const double el = d.elevation();
    TangentBasis basis;
    // d(unit)/d(az) normalized (the raw derivative has norm cos el) and
    // d(unit)/d(el), which is already unit norm.
    basis.b1 = Vec3{-std::sin(az), std::cos(az), 0.0};
    basis.b2 = Vec3{-std::sin(el) * std::cos(az), -std::sin(el) * std::sin(az), std::cos(el)};

    const double threshold = 1e-9 * array.radius();
    auto sensitivity = [&array](const Vec3& b) {
        double s = 0.0;
        for (const auto& a : array.positions())
            s = std::max(s, std::abs(a.dot(b)));
        return s;
    };
    if (array.radius() > 0.0) {
        basis.b1_active = sensitivity(basis.b1) >= threshold;
        basis.b2_active = sensitivity(basis.b2) >= threshold;
    }
    return basis;
}

double phase_validity_ratio(const ArrayGeometry& array, const FrequencyGrid& grid) {
    return array.radius() * grid.bandwidth() / kSpeedOfLight;
}

void to_json(nlohmann::json& j, const ArrayGeometry& a) {
    auto positions = nlohmann::json::array();
    for (const auto& p : a.positions())
        positions.push_back({p.x, p.y, p.z});
    j = nlohmann::json{{"positions_m", std::move(positions)}};
}

ArrayGeometry array_geometry_from_json(const nlohmann::json& j) {
    std::vector<Vec3> positions;
    for (const auto& p : j.at("positions_m")) {
        if (!p.is_array() || p.size() != 3)
            throw std::invalid_argument("array geometry JSON: positions must be [x,y,z] triples");
        positions.push_back(Vec3{p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
    }
    return ArrayGeometry(std::move(positions));
}

void to_json(nlohmann::json& j, const FrequencyGrid& g) {
    j = nlohmann::json{{"fc_hz", g.fc()},
                       {"n_f", g.size()},
                       {"spacing_hz", g.size() > 1 ? g.subcarrier_spacing() : 0.0}};
}

FrequencyGrid frequency_grid_from_json(const nlohmann::json& j) {
    return make_frequency_grid(j.at("fc_hz").get<double>(), j.at("n_f").get<std::size_t>(),
                               j.value("spacing_hz", 0.0));
}

} // namespace chestlab
