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

#include "chestlab/analysis.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace chestlab {

namespace {

constexpr double kPi = std::numbers::pi;

// (1/N) sum_j |a_j|^2/lambda^2 * cos^2(a_j, d), with 0/0 terms defined as 0.
// The |a_j|^2 factors cancel against the cosine denominators.
double array_mismatch_term(const ArrayGeometry& array, double lambda, const Vec3& d) {
    const double d2 = d.squared_norm();
    if (d2 == 0.0)
        return 0.0;
    double sum = 0.0;
    for (const Vec3& a : array.positions()) {
        const double ad = a.dot(d);
        sum += ad * ad / d2;
    }
    return 2.0 * kPi * kPi * d2 * sum /
           (static_cast<double>(array.size()) * lambda * lambda);
}

double mean_squared_offset(const FrequencyGrid& grid) {
    double sum = 0.0;
    for (double f : grid.offsets())
        sum += f * f;
    return sum / static_cast<double>(grid.size());
}

} // namespace

Complex optimal_coefficient(const std::vector<Path>& paths, const Path& v,
                            const ChannelConfig& cfg) {
    const Eigen::VectorXcd e = characteristic_vector(cfg, v.doa, v.dod, v.delay);
    Complex gamma{0.0, 0.0};
    for (const Path& p : paths) {
        const Eigen::VectorXcd el = characteristic_vector(cfg, p.doa, p.dod, p.delay);
        gamma += p.gain * e.dot(el); // e^H e_l
    }
    return gamma;
}

double exact_single_path_error(const std::vector<Path>& paths, const Path& v,
                               const ChannelConfig& cfg) {
    const ChannelVec h = synthesize_channel(cfg, paths);
    const Eigen::VectorXcd e = characteristic_vector(cfg, v.doa, v.dod, v.delay);
    const Complex gamma = optimal_coefficient(paths, v, cfg);
    const double scale = std::sqrt(static_cast<double>(cfg.dim()));
    return (h - scale * gamma * e).norm();
}

BiasBoundReport bias_bound(const std::vector<Path>& paths, const Path& v,
                           const ChannelConfig& cfg) {
    const double lambda = cfg.grid.wavelength();
    const double mean_f2 = mean_squared_offset(cfg.grid);
    const double bandwidth = cfg.grid.bandwidth();

    // region radii; a degenerate domain poses no constraint
    const double max_delay_gap =
        bandwidth > 0.0 ? std::numbers::sqrt2 / (kPi * bandwidth)
                        : std::numeric_limits<double>::infinity();
    const double max_dod_gap =
        cfg.tx.radius() > 0.0 ? lambda / (std::numbers::sqrt2 * kPi * cfg.tx.radius())
                              : std::numeric_limits<double>::infinity();
    const double max_doa_gap =
        cfg.rx.radius() > 0.0 ? lambda / (std::numbers::sqrt2 * kPi * cfg.rx.radius())
                              : std::numeric_limits<double>::infinity();

    BiasBoundReport report;
    report.per_path.reserve(paths.size());
    double sum = 0.0;
    for (const Path& p : paths) {
        BiasBoundTerm term;
        const double delay_gap = std::abs(p.delay - v.delay);
        const Vec3 dod_gap = p.dod.unit() - v.dod.unit();
        const Vec3 doa_gap = p.doa.unit() - v.doa.unit();

        term.x = 2.0 * kPi * kPi * delay_gap * delay_gap * mean_f2;
        term.y = array_mismatch_term(cfg.tx, lambda, dod_gap);
        term.z = array_mismatch_term(cfg.rx, lambda, doa_gap);
        term.in_region = delay_gap < max_delay_gap && dod_gap.norm() < max_dod_gap &&
                         doa_gap.norm() < max_doa_gap;
        report.valid = report.valid && term.in_region;

        const double product = (1.0 - term.x) * (1.0 - term.x) * (1.0 - term.y) *
                               (1.0 - term.y) * (1.0 - term.z) * (1.0 - term.z);
        // the radicand can only go negative outside the validity region
        sum += std::abs(p.gain) * std::sqrt(std::max(0.0, 1.0 - product));
        report.per_path.push_back(term);
    }
    report.bound = std::sqrt(static_cast<double>(cfg.dim())) * sum;
    return report;
}

Eigen::MatrixXcd bias_gram_matrix(const std::vector<Path>& paths, const Path& v,
                                  const ChannelConfig& cfg) {
    const Eigen::Index n = static_cast<Eigen::Index>(paths.size());
    const Eigen::VectorXcd e = characteristic_vector(cfg, v.doa, v.dod, v.delay);
    Eigen::MatrixXcd atoms(cfg.dim(), n);
    for (Eigen::Index l = 0; l < n; ++l) {
        const Path& p = paths[static_cast<std::size_t>(l)];
        atoms.col(l) = characteristic_vector(cfg, p.doa, p.dod, p.delay);
    }
    const Eigen::VectorXcd projections = atoms.adjoint() * e; // entries e_i^H e
    return Eigen::MatrixXcd(atoms.adjoint() * atoms - projections * projections.adjoint());
}

double bias_bound_gram(const std::vector<Path>& paths, const Path& v,
                       const ChannelConfig& cfg) {
    const Eigen::MatrixXcd q = bias_gram_matrix(paths, v, cfg);
    Eigen::VectorXcd beta(static_cast<Eigen::Index>(paths.size()));
    for (Eigen::Index l = 0; l < beta.size(); ++l)
        beta(l) = paths[static_cast<std::size_t>(l)].gain;
    const Complex quad = beta.dot(q * beta); // beta^H Q beta
    return static_cast<double>(cfg.dim()) * quad.real();
}

void to_json(nlohmann::json& j, const BiasBoundReport& r) {
    nlohmann::json per_path = nlohmann::json::array();
    for (const BiasBoundTerm& t : r.per_path)
        per_path.push_back(
            {{"x", t.x}, {"y", t.y}, {"z", t.z}, {"in_region", t.in_region}});
    j = nlohmann::json{
        {"bound", r.bound}, {"valid", r.valid}, {"per_path", std::move(per_path)}};
}

} // namespace chestlab
