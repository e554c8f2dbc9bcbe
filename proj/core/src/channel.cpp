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

#include "chestlab/channel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

namespace chestlab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
const Complex kImag{0.0, 1.0};
} // namespace

const Eigen::MatrixXcd& ObservationModel::noise_covariance() const {
    if (white_)
        throw std::logic_error("ObservationModel: white noise has no stored covariance");
    return sigma_;
}

Eigen::VectorXcd ObservationModel::apply(const Eigen::VectorXcd& v) const {
    if (v.size() != cols_)
        throw std::invalid_argument("ObservationModel::apply: dimension mismatch");
    if (identity_)
        return v;
    return m_ * v;
}

Eigen::VectorXcd ObservationModel::apply_adjoint(const Eigen::VectorXcd& v) const {
    if (v.size() != rows_)
        throw std::invalid_argument("ObservationModel::apply_adjoint: dimension mismatch");
    if (identity_)
        return v;
    return m_.adjoint() * v;
}

Eigen::MatrixXcd ObservationModel::apply(const Eigen::MatrixXcd& b) const {
    if (b.rows() != cols_)
        throw std::invalid_argument("ObservationModel::apply: dimension mismatch");
    if (identity_)
        return b;
    return m_ * b;
}

Eigen::MatrixXcd ObservationModel::matrix() const {
    if (identity_)
        return Eigen::MatrixXcd::Identity(rows_, cols_);
    return m_;
}

Eigen::MatrixXcd ObservationModel::noise_solve(const Eigen::MatrixXcd& b) const {
    if (b.rows() != rows_)
        throw std::invalid_argument("ObservationModel::noise_solve: dimension mismatch");
    if (white_) {
        if (sigma2_ <= 0.0)
            throw std::invalid_argument("ObservationModel: noise covariance is singular");
        return b / sigma2_;
    }
    return sigma_llt_.solve(b);
}

ObservationModel ObservationModel::with_sigma2(double sigma2) const {
    if (!white_)
        throw std::logic_error("ObservationModel::with_sigma2: noise is not white");
    if (sigma2 < 0.0)
        throw std::invalid_argument("ObservationModel: sigma^2 must be >= 0");
    ObservationModel out = *this;
    out.sigma2_ = sigma2;
    return out;
}

void ObservationModel::set_general_noise(Eigen::MatrixXcd sigma) {
    if (sigma.rows() != rows_ || sigma.cols() != rows_)
        throw std::invalid_argument("ObservationModel: covariance dimension mismatch");
    const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
    if ((sigma - sigma.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("ObservationModel: covariance is not Hermitian");
    sigma_ = std::move(sigma);
    sigma_llt_.compute(sigma_);
    if (sigma_llt_.info() != Eigen::Success)
        throw std::invalid_argument("ObservationModel: covariance is not positive definite");
    white_ = false;
    sigma2_ = 0.0;
}

ObservationModel make_identity_observation(Eigen::Index dim, double sigma2) {
    if (dim <= 0)
        throw std::invalid_argument("make_identity_observation: dim must be positive");
    if (sigma2 < 0.0)
        throw std::invalid_argument("make_identity_observation: sigma^2 must be >= 0");
    ObservationModel obs;
    obs.identity_ = true;
    obs.rows_ = dim;
    obs.cols_ = dim;
    obs.white_ = true;
    obs.sigma2_ = sigma2;
    return obs;
}

ObservationModel make_explicit_observation(Eigen::MatrixXcd m, double sigma2) {
    if (m.size() == 0)
        throw std::invalid_argument("make_explicit_observation: empty matrix");
    if (sigma2 < 0.0)
        throw std::invalid_argument("make_explicit_observation: sigma^2 must be >= 0");
    ObservationModel obs;
    obs.identity_ = false;
    obs.rows_ = m.rows();
    obs.cols_ = m.cols();
    obs.m_ = std::move(m);
    obs.white_ = true;
    obs.sigma2_ = sigma2;
    return obs;
}

ObservationModel make_explicit_observation(Eigen::MatrixXcd m, Eigen::MatrixXcd sigma) {
    ObservationModel obs = make_explicit_observation(std::move(m), 0.0);
    obs.set_general_noise(std::move(sigma));
    return obs;
}

ObservationModel make_kronecker_observation(const ChannelConfig& cfg,
                                            const Eigen::MatrixXcd& f,
                                            const Eigen::MatrixXcd& x,
                                            const Eigen::MatrixXcd& w, double sigma2) {
    if (f.cols() != cfg.n_f())
        throw std::invalid_argument("make_kronecker_observation: F must have N_f columns");
    if (x.rows() != cfg.n_t())
        throw std::invalid_argument("make_kronecker_observation: X must have N_t rows");
    if (w.rows() != cfg.n_r())
        throw std::invalid_argument("make_kronecker_observation: W must have N_r rows");

    const Eigen::MatrixXcd xt = x.transpose();
    const Eigen::MatrixXcd wh = w.adjoint();
    const Eigen::Index rows = f.rows() * xt.rows() * wh.rows();
    Eigen::MatrixXcd m(rows, cfg.dim());
    for (Eigen::Index fr = 0; fr < f.rows(); ++fr)
        for (Eigen::Index xr = 0; xr < xt.rows(); ++xr)
            for (Eigen::Index wr = 0; wr < wh.rows(); ++wr) {
                const Eigen::Index row = (fr * xt.rows() + xr) * wh.rows() + wr;
                for (Eigen::Index fc = 0; fc < f.cols(); ++fc)
                    for (Eigen::Index xc = 0; xc < xt.cols(); ++xc)
                        for (Eigen::Index wc = 0; wc < wh.cols(); ++wc) {
                            const Eigen::Index col = (fc * xt.cols() + xc) * wh.cols() + wc;
                            m(row, col) = f(fr, fc) * xt(xr, xc) * wh(wr, wc);
                        }
            }
    return make_explicit_observation(std::move(m), sigma2);
}

Eigen::VectorXcd steering_vector(const ArrayGeometry& array, double wavelength_m,
                                 const Vec3& unit_direction) {
    if (wavelength_m <= 0.0)
        throw std::invalid_argument("steering_vector: wavelength must be positive");
    const Eigen::Index n = static_cast<Eigen::Index>(array.size());
    const double k = kTwoPi / wavelength_m;
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    Eigen::VectorXcd e(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double phase = -k * array.positions()[static_cast<std::size_t>(j)].dot(unit_direction);
        e(j) = scale * std::polar(1.0, phase);
    }
    return e;
}

Eigen::VectorXcd steering_vector(const ArrayGeometry& array, double wavelength_m,
                                 const Direction& d) {
    return steering_vector(array, wavelength_m, d.unit());
}

Eigen::VectorXcd delay_vector(const FrequencyGrid& grid, double delay_s) {
    if (!std::isfinite(delay_s))
        throw std::invalid_argument("delay_vector: non-finite delay");
    const Eigen::Index n = static_cast<Eigen::Index>(grid.size());
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    Eigen::VectorXcd e(n);
    for (Eigen::Index k = 0; k < n; ++k)
        e(k) = scale * std::polar(1.0, -kTwoPi * grid.offsets()[static_cast<std::size_t>(k)] * delay_s);
    return e;
}

Eigen::VectorXcd characteristic_vector(const ChannelConfig& cfg, const Direction& doa,
                                       const Direction& dod, double delay_s) {
    const Eigen::VectorXcd ef = delay_vector(cfg.grid, delay_s);
    const Eigen::VectorXcd et = steering_vector(cfg.tx, cfg.grid.wavelength(), dod);
    const Eigen::VectorXcd er = steering_vector(cfg.rx, cfg.grid.wavelength(), doa);

    Eigen::VectorXcd e(cfg.dim());
    Eigen::Index idx = 0;
    for (Eigen::Index k = 0; k < cfg.n_f(); ++k) {
        const Complex fk = ef(k);
        for (Eigen::Index j = 0; j < cfg.n_t(); ++j) {
            const Complex ft = fk * std::conj(et(j));
            for (Eigen::Index i = 0; i < cfg.n_r(); ++i)
                e(idx++) = ft * er(i);
        }
    }
    return e;
}

ChannelVec synthesize_channel(const ChannelConfig& cfg, const std::vector<Path>& paths) {
    ChannelVec h = ChannelVec::Zero(cfg.dim());
    const double scale = std::sqrt(static_cast<double>(cfg.dim()));
    for (const Path& p : paths)
        h += (scale * p.gain) * characteristic_vector(cfg, p.doa, p.dod, p.delay);
    return h;
}

Eigen::VectorXcd observe(const ObservationModel& obs, const ChannelVec& h, Rng& rng) {
    Eigen::VectorXcd y = obs.apply(h);
    if (obs.has_white_noise()) {
        const double sigma = std::sqrt(obs.sigma2());
        for (Eigen::Index i = 0; i < y.size(); ++i)
            y(i) += sigma * rng.complex_normal();
    } else {
        Eigen::VectorXcd g(y.size());
        for (Eigen::Index i = 0; i < g.size(); ++i)
            g(i) = rng.complex_normal();
        y += obs.noise_covariance().llt().matrixL() * g;
    }
    return y;
}

double sigma2_for_snr_db(const ObservationModel& obs, const ChannelVec& h, double snr_db) {
    const double signal = obs.apply(h).squaredNorm();
    if (signal == 0.0)
        throw std::invalid_argument("sigma2_for_snr_db: zero observed signal");
    return signal / (static_cast<double>(obs.rows()) * std::pow(10.0, snr_db / 10.0));
}

double snr_db_of(const ObservationModel& obs, const ChannelVec& h) {
    if (obs.sigma2() <= 0.0)
        throw std::invalid_argument("snr_db_of: sigma^2 must be positive");
    const double signal = obs.apply(h).squaredNorm();
    return 10.0 * std::log10(signal / (static_cast<double>(obs.rows()) * obs.sigma2()));
}

void write_channel_csv(std::ostream& out, const Eigen::VectorXcd& v) {
    out << "index,re,im\n";
    char buf[80];
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g\n", static_cast<long long>(i),
                      v(i).real(), v(i).imag());
        out << buf;
    }
}

void write_channel_csv(const std::filesystem::path& file, const Eigen::VectorXcd& v) {
    std::ofstream out(file);
    if (!out)
        throw std::runtime_error("write_channel_csv: cannot open " + file.string());
    write_channel_csv(out, v);
}

Eigen::VectorXcd read_channel_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("read_channel_csv: empty input");
    if (line != "index,re,im")
        throw std::runtime_error("read_channel_csv: unexpected header '" + line + "'");
    std::vector<Complex> values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        long long idx = 0;
        double re = 0.0, im = 0.0;
        if (std::sscanf(line.c_str(), "%lld,%lg,%lg", &idx, &re, &im) != 3)
            throw std::runtime_error("read_channel_csv: malformed row at line " +
                                     std::to_string(line_no));
        if (idx != static_cast<long long>(values.size()))
            throw std::runtime_error("read_channel_csv: out-of-order index at line " +
                                     std::to_string(line_no));
        values.emplace_back(re, im);
    }
    Eigen::VectorXcd v(static_cast<Eigen::Index>(values.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = values[static_cast<std::size_t>(i)];
    return v;
}

Eigen::VectorXcd read_channel_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in)
        throw std::runtime_error("read_channel_csv: cannot open " + file.string());
    return read_channel_csv(in);
}

} // namespace chestlab
