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
#include <vector>

#include <nlohmann/json.hpp>

#include "chestlab/channel.hpp"
#include "chestlab/dictionary.hpp"

namespace chestlab {

class UndefinedCostError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class EstimationFailureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ExtractionMethod { Joint, Sequential };

// Estimation order for the sequential strategy.  Any permutation works; the
// default (delay, then departure, then arrival) minimizes cost when the
// angle grids are much denser than the array sizes.
enum class SeqAxis { Delay, Dod, Doa };
std::vector<SeqAxis> default_sequential_order();

// Matched-filter style objective |x^H M^H r|^2 / |M x|^2; scale invariant
// in x.  Throws UndefinedCostError when M x = 0.
double cost_f(const Eigen::VectorXcd& x, const ObservationModel& obs,
              const Eigen::VectorXcd& r);

// One characteristic-vector extraction: the selected grid point plus the
// indices it was found at and the number of cost evaluations spent.
struct ExtractionResult {
    Path path;              // gain left at 1; set later by the LS refit
    std::size_t delay_index = 0;
    std::size_t dod_index = 0;
    std::size_t doa_index = 0;
    std::uint64_t cost_evaluations = 0;
};

// Exhaustive search over the full delay x DoD x DoA product grid.  Ties are
// broken toward the lowest (delay, DoD, DoA) index tuple.
ExtractionResult joint_estimate_path(const Eigen::VectorXcd& r, const ObservationModel& obs,
                                     const DictionaryGrid& grid, const ChannelConfig& cfg);

// One axis at a time; axes not yet estimated are treated as nuisance
// parameters by summing the cost over their standard basis vectors.
ExtractionResult sequential_estimate_path(const Eigen::VectorXcd& r,
                                          const ObservationModel& obs,
                                          const DictionaryGrid& grid,
                                          const ChannelConfig& cfg,
                                          const std::vector<SeqAxis>& order =
                                              default_sequential_order());

struct LsSolution {
    Eigen::VectorXcd coefficients;
    bool degenerate = false; // Gram matrix needed ridge regularization
};

// alpha = (E^H M^H M E)^{-1} E^H M^H y.  A Gram condition number above 1e12
// switches to a ridge solve with eps = 1e-10 trace / p and flags the result.
LsSolution ls_coefficients(const Eigen::MatrixXcd& e, const ObservationModel& obs,
                           const Eigen::VectorXcd& y);

struct ChannelEstimate {
    std::vector<Path> virtual_paths; // gains absorb the sqrt(N_r N_t N_f) factor
    ChannelVec estimate;
    std::vector<double> residual_norms;              // p + 1 entries, non-increasing
    std::vector<ChannelVec> estimates_per_iteration; // estimate after 1..p atoms
    std::vector<std::uint64_t> cost_evaluations_per_iteration;
    std::vector<double> extraction_seconds; // wall clock around extraction only
    bool degenerate = false;
    bool over_parameterized = false; // p exceeded the measurement count
};

// Greedy estimation: extract an atom from the residual, append it, refit all
// coefficients by least squares, update the residual; p iterations.
ChannelEstimate greedy_estimate(const Eigen::VectorXcd& y, const ObservationModel& obs,
                                std::size_t p, const DictionaryGrid& grid,
                                ExtractionMethod method, const ChannelConfig& cfg,
                                const std::vector<SeqAxis>& order =
                                    default_sequential_order());

// |h - h_hat|^2 / |h|^2
double relative_error(const ChannelVec& h, const ChannelVec& h_hat);

nlohmann::json estimate_report_json(const ChannelEstimate& est);

} // namespace chestlab
