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

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace chestlab {

inline constexpr double kSpeedOfLight = 299792458.0; // m/s

// Thrown by tangent_basis when a direction sits on the azimuth chart
// singularity (elevation at +-pi/2); the caller must re-parameterize.
class PoleSingularityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(dot(*this)); }
    double squared_norm() const { return dot(*this); }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }

    // Throws on the zero vector.
    Vec3 normalized() const;
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

Vec3 cross(const Vec3& a, const Vec3& b);

// Direction on the unit sphere, stored as (azimuth, elevation) with the
// derived unit vector cached.  Azimuth is wrapped into [0, 2*pi), elevation
// must lie in [-pi/2, pi/2].  unit = (cos el cos az, cos el sin az, sin el).
class Direction {
public:
    Direction(double azimuth_rad, double elevation_rad);

    // Recovers (azimuth, elevation) from a unit vector (normalized first).
    static Direction from_unit(const Vec3& u);

    double azimuth() const { return azimuth_; }
    double elevation() const { return elevation_; }
    const Vec3& unit() const { return unit_; }

private:
    double azimuth_;
    double elevation_;
    Vec3 unit_;
};

// Antenna positions in meters, re-expressed with respect to their centroid
// on construction.  radius is the largest position norm after recentering.
class ArrayGeometry {
public:
    explicit ArrayGeometry(std::vector<Vec3> positions);

    // Stores the positions verbatim, skipping the recentering step.  Exists
    // only for diagnostics that demonstrate what breaks without centering.
    static ArrayGeometry uncentered(std::vector<Vec3> positions);

    std::size_t size() const { return positions_.size(); }
    const std::vector<Vec3>& positions() const { return positions_; }
    double radius() const { return radius_; }

private:
    ArrayGeometry() = default;
    std::vector<Vec3> positions_;
    double radius_ = 0.0;
};

// Subcarrier grid: offsets relative to the central frequency, recentered on
// construction so they sum to zero.  bandwidth = max offset - min offset.
class FrequencyGrid {
public:
    FrequencyGrid(double fc_hz, std::vector<double> offsets_hz);

    double fc() const { return fc_; }
    const std::vector<double>& offsets() const { return offsets_; }
    std::size_t size() const { return offsets_.size(); }
    double bandwidth() const { return bandwidth_; }
    double wavelength() const { return wavelength_; }

    // Step of a uniform grid (max - min over n_f - 1).  Throws if the grid
    // is not uniformly spaced to 1e-9 relative, or if n_f == 1.
    double subcarrier_spacing() const;

private:
    double fc_;
    std::vector<double> offsets_;
    double bandwidth_;
    double wavelength_;
};

// Orthonormal pair spanning the tangent plane at a direction:
// b1 = azimuth tangent, b2 = elevation tangent.  A basis vector is active
// only if the array has sensitivity along it (max_j |a_j . b| >= 1e-9 R).
struct TangentBasis {
    Vec3 b1;
    Vec3 b2;
    bool b1_active = false;
    bool b2_active = false;

    int active_count() const { return (b1_active ? 1 : 0) + (b2_active ? 1 : 0); }
};

// n collinear positions spaced spacing*wavelength apart along axis, centered
// at the origin.  Positions are ordered from the negative to the positive
// end of the axis.
ArrayGeometry make_ula(std::size_t n, double spacing_wavelengths, const Vec3& axis,
                       double wavelength_m);

// Subtracts the centroid from a position list.
ArrayGeometry center(std::vector<Vec3> positions);

// Arithmetic progression of n_f offsets with the given step, recentered to
// zero sum.  n_f == 1 yields the narrowband grid {0}.
FrequencyGrid make_frequency_grid(double fc_hz, std::size_t n_f, double spacing_hz);

TangentBasis tangent_basis(const Direction& d, const ArrayGeometry& array);

// Ratio radius * bandwidth / c, reported (not enforced) by the harness; the
// narrowband-array model assumes it is small.
double phase_validity_ratio(const ArrayGeometry& array, const FrequencyGrid& grid);

// JSON schema: { "positions_m": [[x,y,z],...] }
void to_json(nlohmann::json& j, const ArrayGeometry& a);
ArrayGeometry array_geometry_from_json(const nlohmann::json& j);

// JSON schema: { "fc_hz":..., "n_f":..., "spacing_hz":... } (uniform grids)
void to_json(nlohmann::json& j, const FrequencyGrid& g);
FrequencyGrid frequency_grid_from_json(const nlohmann::json& j);

} // namespace chestlab
