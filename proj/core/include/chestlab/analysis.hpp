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

#include <vector>

#include <nlohmann/json.hpp>

#include "chestlab/channel.hpp"

namespace chestlab {

// Raised when the Fisher matrix cannot be inverted at the requested
// conditioning; carries the estimated null-space dimension.
class NonIdentifiableError : public std::runtime_error {
public:
    NonIdentifiableError(const std::string& what, int null_space_dim)
        : std::runtime_error(what), null_space_dim(null_space_dim) {}
    int null_space_dim;
};

enum class ParamKind { GainMagnitude, GainPhase, DoaTangent, DodTangent, Delay };

struct ParamSlot {
    std::size_t path_index = 0;
    ParamKind kind = ParamKind::GainMagnitude;
    int tangent_index = 0; // 0 = azimuth tangent, 1 = elevation tangent
};

// Active real-parameter layout over a set of virtual paths.  Per path:
// gain magnitude, gain phase, the DoA/DoD tangent slots the arrays are
// actually sensitive to, and the delay when there is more than one
// subcarrier.  With everything active this is 7 slots per path.
struct ParamLayout {
    std::vector<ParamSlot> slots;
    std::vector<TangentBasis> doa_bases; // one per path
    std::vector<TangentBasis> dod_bases;

    std::size_t size() const { return slots.size(); }
};

ParamLayout make_param_layout(const std::vector<Path>& virtual_paths,
                              const ChannelConfig& cfg);

// Analytic derivative of the synthesized channel w.r.t. each layout slot,
// one column per slot.
Eigen::MatrixXcd channel_jacobian(const std::vector<Path>& virtual_paths,
                                  const ChannelConfig& cfg, const ParamLayout& layout);

// Central differences of synthesize_channel along each slot; the oracle the
// analytic Jacobian is validated against.  step is relative to each slot's
// natural scale (delays use the reciprocal subcarrier angular frequency).
Eigen::MatrixXcd finite_difference_jacobian(const std::vector<Path>& virtual_paths,
                                            const ChannelConfig& cfg,
                                            const ParamLayout& layout, double step);

// Slepian-Bangs information matrix 2 Re{ D^H M^H Sigma^{-1} M D }.
Eigen::MatrixXd fisher_matrix(const Eigen::MatrixXcd& jacobian, const ObservationModel& obs);

// Tr[ D I^{-1} D^H ]; throws NonIdentifiableError when the Fisher matrix
// condition number exceeds 1e12.
double crb_trace(const Eigen::MatrixXcd& jacobian, const Eigen::MatrixXd& fim);

// |M^H Sigma^{-1} M|_2 by power iteration with a deterministic start vector,
// converged to 1e-10 relative.
double observation_spectral_norm(const ObservationModel& obs);

// N_theta / (2 |M^H Sigma^{-1} M|_2), the variance floor no unbiased
// estimator of the active parameters can beat.
double crb_lower_bound(const ParamLayout& layout, const ObservationModel& obs);

struct CoptReport {
    bool holds = false;
    double deviation = 0.0;
};

// Conformality of M on the Jacobian column space: deviation is
// |D^H (A/|A|) D - D^H D|_F / |D^H D|_F with A = M^H Sigma^{-1} M.
// Equality in the CRB lower bound holds exactly when this is zero.
CoptReport check_c_opt(const Eigen::MatrixXcd& jacobian, const ObservationModel& obs,
                       double tol = 1e-8);

// Coefficient that makes a single virtual path the orthogonal projection of
// the channel onto its characteristic vector.
Complex optimal_coefficient(const std::vector<Path>& paths, const Path& v,
                            const ChannelConfig& cfg);

// |h - h_tilde|_2 with h_tilde built from the optimal coefficient.
double exact_single_path_error(const std::vector<Path>& paths, const Path& v,
                               const ChannelConfig& cfg);

struct BiasBoundTerm {
    double x = 0.0; // delay mismatch term
    double y = 0.0; // departure mismatch term
    double z = 0.0; // arrival mismatch term
    bool in_region = true;
};

struct BiasBoundReport {
    double bound = 0.0;
    bool valid = true; // all paths inside the small-mismatch region
    std::vector<BiasBoundTerm> per_path;
};

// Closed-form upper bound on the error of merging all paths into the single
// virtual path v.  Valid only while every path satisfies the per-domain
// closeness conditions; out-of-region paths are reported, not rejected.
BiasBoundReport bias_bound(const std::vector<Path>& paths, const Path& v,
                           const ChannelConfig& cfg);

// Quadratic-form route to the same quantity: N * beta^H Q beta with
// q_ij = e_i^H e_j - e_i^H e e^H e_j.  Equals the squared exact error.
double bias_bound_gram(const std::vector<Path>& paths, const Path& v,
                       const ChannelConfig& cfg);

// Gram matrix Q above; exposed so its spectrum can be inspected.
Eigen::MatrixXcd bias_gram_matrix(const std::vector<Path>& paths, const Path& v,
                                  const ChannelConfig& cfg);

void to_json(nlohmann::json& j, const CoptReport& r);
void to_json(nlohmann::json& j, const BiasBoundReport& r);

} // namespace chestlab
