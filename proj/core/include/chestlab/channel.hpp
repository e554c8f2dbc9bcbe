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

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "chestlab/geometry.hpp"
#include "chestlab/rng.hpp"

namespace chestlab {

using Complex = std::complex<double>;
using ChannelVec = Eigen::VectorXcd;

// One propagation path: complex gain, direction of arrival, direction of
// departure, delay in seconds.  Used both for physical paths and for the
// virtual paths recovered by the estimator.
struct Path {
    Complex gain{0.0, 0.0};
    Direction doa{0.0, 0.0};
    Direction dod{0.0, 0.0};
    double delay = 0.0;
};

struct ChannelConfig {
    ArrayGeometry tx;
    ArrayGeometry rx;
    FrequencyGrid grid;

    Eigen::Index n_t() const { return static_cast<Eigen::Index>(tx.size()); }
    Eigen::Index n_r() const { return static_cast<Eigen::Index>(rx.size()); }
    Eigen::Index n_f() const { return static_cast<Eigen::Index>(grid.size()); }
    Eigen::Index dim() const { return n_t() * n_r() * n_f(); }
};

// Flattened channel index, receive antenna fastest, then transmit, then
// subcarrier.  This matches the Kronecker order delay x conj(transmit) x
// receive used to assemble characteristic vectors.
inline Eigen::Index channel_index(const ChannelConfig& cfg, Eigen::Index rx_i,
                                  Eigen::Index tx_j, Eigen::Index f_k) {
    return (f_k * cfg.n_t() + tx_j) * cfg.n_r() + rx_i;
}

// Linear observation y = M h + n with circularly symmetric Gaussian noise.
// The identity kind keeps M implicit so large channels never materialize an
// identity matrix.  White noise draws independent entries with variance
// sigma^2 (sigma^2/2 per real component); general noise uses the Cholesky
// factor of a Hermitian positive definite covariance.
class ObservationModel {
public:
    Eigen::Index rows() const { return rows_; }
    Eigen::Index cols() const { return cols_; }
    bool is_identity() const { return identity_; }
    bool has_white_noise() const { return white_; }
    double sigma2() const { return sigma2_; }
    const Eigen::MatrixXcd& noise_covariance() const;

    Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;          // M v
    Eigen::VectorXcd apply_adjoint(const Eigen::VectorXcd& v) const;  // M^H v
    Eigen::MatrixXcd apply(const Eigen::MatrixXcd& b) const;          // M B
    Eigen::MatrixXcd matrix() const;                                  // dense M

    // Sigma^{-1} B; throws std::invalid_argument when sigma^2 == 0.
    Eigen::MatrixXcd noise_solve(const Eigen::MatrixXcd& b) const;

    ObservationModel with_sigma2(double sigma2) const;

    friend ObservationModel make_identity_observation(Eigen::Index dim, double sigma2);
    friend ObservationModel make_explicit_observation(Eigen::MatrixXcd m, double sigma2);
    friend ObservationModel make_explicit_observation(Eigen::MatrixXcd m,
                                                      Eigen::MatrixXcd sigma);

private:
    ObservationModel() = default;
    void set_general_noise(Eigen::MatrixXcd sigma);

    bool identity_ = true;
    Eigen::Index rows_ = 0;
    Eigen::Index cols_ = 0;
    Eigen::MatrixXcd m_;

    bool white_ = true;
    double sigma2_ = 0.0;
    Eigen::MatrixXcd sigma_;
    Eigen::LLT<Eigen::MatrixXcd> sigma_llt_;
};

ObservationModel make_identity_observation(Eigen::Index dim, double sigma2);
ObservationModel make_explicit_observation(Eigen::MatrixXcd m, double sigma2);
ObservationModel make_explicit_observation(Eigen::MatrixXcd m, Eigen::MatrixXcd sigma);

// M = F kron X^T kron W^H for a pilot-and-combiner measurement chain; F
// selects subcarriers (rows of the N_f identity), X (N_t x N_s) holds the
// training sequence, W (N_r x N_c) holds one combining vector per column.
// Dimensions are validated against cfg.
ObservationModel make_kronecker_observation(const ChannelConfig& cfg,
                                            const Eigen::MatrixXcd& f,
                                            const Eigen::MatrixXcd& x,
                                            const Eigen::MatrixXcd& w, double sigma2);

// Per-antenna phase shifts for a plane wave: entry j is
// exp(-j 2 pi / lambda * a_j . u) / sqrt(N).  Unit norm by construction.
Eigen::VectorXcd steering_vector(const ArrayGeometry& array, double wavelength_m,
                                 const Vec3& unit_direction);
Eigen::VectorXcd steering_vector(const ArrayGeometry& array, double wavelength_m,
                                 const Direction& d);

// Per-subcarrier phase shifts: entry k is exp(-j 2 pi f_k tau) / sqrt(N_f).
Eigen::VectorXcd delay_vector(const FrequencyGrid& grid, double delay_s);

// Dictionary atom e = e_f(tau) kron conj(e_t(dod)) kron e_r(doa).
Eigen::VectorXcd characteristic_vector(const ChannelConfig& cfg, const Direction& doa,
                                       const Direction& dod, double delay_s);

// h = sqrt(N_r N_t N_f) * sum_l gain_l * e(doa_l, dod_l, delay_l)
ChannelVec synthesize_channel(const ChannelConfig& cfg, const std::vector<Path>& paths);

Eigen::VectorXcd observe(const ObservationModel& obs, const ChannelVec& h, Rng& rng);

// Per-measurement-entry SNR convention: SNR = |Mh|^2 / (N_m sigma^2).
double sigma2_for_snr_db(const ObservationModel& obs, const ChannelVec& h, double snr_db);
double snr_db_of(const ObservationModel& obs, const ChannelVec& h);

// CSV with header "index,re,im", one row per entry.
void write_channel_csv(std::ostream& out, const Eigen::VectorXcd& v);
void write_channel_csv(const std::filesystem::path& file, const Eigen::VectorXcd& v);
Eigen::VectorXcd read_channel_csv(std::istream& in);
Eigen::VectorXcd read_channel_csv(const std::filesystem::path& file);

} // namespace chestlab
