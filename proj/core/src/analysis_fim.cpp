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
#include <numbers>

#include "chestlab/rng.hpp"

namespace chestlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const Complex kImag{0.0, 1.0};

// e_f kron conj(e_t) kron e_r; the t slot is conjugated here so callers pass
// the plain transmit-side factor.
Eigen::VectorXcd kron3(const ChannelConfig& cfg, const Eigen::VectorXcd& f,
                       const Eigen::VectorXcd& t, const Eigen::VectorXcd& r) {
    Eigen::VectorXcd e(cfg.dim());
    Eigen::Index idx = 0;
    for (Eigen::Index k = 0; k < cfg.n_f(); ++k)
        for (Eigen::Index j = 0; j < cfg.n_t(); ++j) {
            const Complex ft = f(k) * std::conj(t(j));
            for (Eigen::Index i = 0; i < cfg.n_r(); ++i)
                e(idx++) = ft * r(i);
        }
    return e;
}

// -j 2 pi / lambda * (a_1.b, ..., a_N.b)
Eigen::VectorXcd position_phase_rates(const ArrayGeometry& array, double wavelength,
                                      const Vec3& b) {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(array.size()));
    for (Eigen::Index j = 0; j < v.size(); ++j)
        v(j) = -kImag * (kTwoPi / wavelength) *
               array.positions()[static_cast<std::size_t>(j)].dot(b);
    return v;
}

double delay_step_scale(const ChannelConfig& cfg) {
    double fmax = 0.0;
    for (double f : cfg.grid.offsets())
        fmax = std::max(fmax, std::abs(f));
    return fmax > 0.0 ? 1.0 / (kTwoPi * fmax) : 1.0;
}

Vec3 geodesic_move(const Vec3& unit, const Vec3& tangent, double s) {
    return unit * std::cos(s) + tangent * std::sin(s);
}

} // namespace

ParamLayout make_param_layout(const std::vector<Path>& virtual_paths,
                              const ChannelConfig& cfg) {
    if (virtual_paths.empty())
        throw std::invalid_argument("make_param_layout: no virtual paths");

    ParamLayout layout;
    layout.doa_bases.reserve(virtual_paths.size());
    layout.dod_bases.reserve(virtual_paths.size());
    for (std::size_t n = 0; n < virtual_paths.size(); ++n) {
        const Path& p = virtual_paths[n];
        const TangentBasis doa_basis = tangent_basis(p.doa, cfg.rx);
        const TangentBasis dod_basis = tangent_basis(p.dod, cfg.tx);
        layout.doa_bases.push_back(doa_basis);
        layout.dod_bases.push_back(dod_basis);

        layout.slots.push_back({n, ParamKind::GainMagnitude, 0});
        layout.slots.push_back({n, ParamKind::GainPhase, 0});
        if (doa_basis.b1_active)
            layout.slots.push_back({n, ParamKind::DoaTangent, 0});
        if (doa_basis.b2_active)
            layout.slots.push_back({n, ParamKind::DoaTangent, 1});
        if (dod_basis.b1_active)
            layout.slots.push_back({n, ParamKind::DodTangent, 0});
        if (dod_basis.b2_active)
            layout.slots.push_back({n, ParamKind::DodTangent, 1});
        if (cfg.n_f() > 1)
            layout.slots.push_back({n, ParamKind::Delay, 0});
    }
    return layout;
}

Eigen::MatrixXcd channel_jacobian(const std::vector<Path>& virtual_paths,
                                  const ChannelConfig& cfg, const ParamLayout& layout) {
    const double scale = std::sqrt(static_cast<double>(cfg.dim()));
    const double lambda = cfg.grid.wavelength();

    Eigen::VectorXcd f_rates(cfg.n_f());
    for (Eigen::Index k = 0; k < cfg.n_f(); ++k)
        f_rates(k) = -kImag * kTwoPi * cfg.grid.offsets()[static_cast<std::size_t>(k)];

    Eigen::MatrixXcd jac(cfg.dim(), static_cast<Eigen::Index>(layout.size()));
    for (Eigen::Index col = 0; col < jac.cols(); ++col) {
        const ParamSlot& slot = layout.slots[static_cast<std::size_t>(col)];
        const Path& p = virtual_paths.at(slot.path_index);
        const Complex gain = p.gain;
        const double rho = std::abs(gain);
        const double phi = rho > 0.0 ? std::arg(gain) : 0.0;

        const Eigen::VectorXcd ef = delay_vector(cfg.grid, p.delay);
        const Eigen::VectorXcd et = steering_vector(cfg.tx, lambda, p.dod);
        const Eigen::VectorXcd er = steering_vector(cfg.rx, lambda, p.doa);

        switch (slot.kind) {
        case ParamKind::GainMagnitude:
            jac.col(col) = scale * std::polar(1.0, phi) * kron3(cfg, ef, et, er);
            break;
        case ParamKind::GainPhase:
            jac.col(col) = scale * kImag * gain * kron3(cfg, ef, et, er);
            break;
        case ParamKind::DoaTangent: {
            const TangentBasis& basis = layout.doa_bases.at(slot.path_index);
            const Vec3 b = slot.tangent_index == 0 ? basis.b1 : basis.b2;
            const Eigen::VectorXcd rates = position_phase_rates(cfg.rx, lambda, b);
            jac.col(col) = scale * gain * kron3(cfg, ef, et, rates.cwiseProduct(er));
            break;
        }
        case ParamKind::DodTangent: {
            const TangentBasis& basis = layout.dod_bases.at(slot.path_index);
            const Vec3 b = slot.tangent_index == 0 ? basis.b1 : basis.b2;
            const Eigen::VectorXcd rates = position_phase_rates(cfg.tx, lambda, b);
            jac.col(col) = scale * gain * kron3(cfg, ef, rates.cwiseProduct(et), er);
            break;
        }
        case ParamKind::Delay:
            jac.col(col) = scale * gain * kron3(cfg, f_rates.cwiseProduct(ef), et, er);
            break;
        }
    }
    return jac;
}

Eigen::MatrixXcd finite_difference_jacobian(const std::vector<Path>& virtual_paths,
                                            const ChannelConfig& cfg,
                                            const ParamLayout& layout, double step) {
    if (!(step > 0.0))
        throw std::invalid_argument("finite_difference_jacobian: step must be positive");

    const double tau_scale = delay_step_scale(cfg);
    Eigen::MatrixXcd jac(cfg.dim(), static_cast<Eigen::Index>(layout.size()));

    for (Eigen::Index col = 0; col < jac.cols(); ++col) {
        const ParamSlot& slot = layout.slots[static_cast<std::size_t>(col)];

        auto perturbed = [&](double delta) {
            std::vector<Path> paths = virtual_paths;
            Path& p = paths.at(slot.path_index);
            const double rho = std::abs(p.gain);
            const double phi = rho > 0.0 ? std::arg(p.gain) : 0.0;
            switch (slot.kind) {
            case ParamKind::GainMagnitude:
                p.gain = std::polar(1.0, phi) * (rho + delta);
                break;
            case ParamKind::GainPhase:
                p.gain = std::polar(rho, phi + delta);
                break;
            case ParamKind::DoaTangent: {
                const TangentBasis& basis = layout.doa_bases.at(slot.path_index);
                const Vec3 b = slot.tangent_index == 0 ? basis.b1 : basis.b2;
                p.doa = Direction::from_unit(geodesic_move(p.doa.unit(), b, delta));
                break;
            }
            case ParamKind::DodTangent: {
                const TangentBasis& basis = layout.dod_bases.at(slot.path_index);
                const Vec3 b = slot.tangent_index == 0 ? basis.b1 : basis.b2;
                p.dod = Direction::from_unit(geodesic_move(p.dod.unit(), b, delta));
                break;
            }
            case ParamKind::Delay:
                p.delay += delta;
                break;
            }
            return synthesize_channel(cfg, paths);
        };

        double delta = step;
        if (slot.kind == ParamKind::GainMagnitude)
            delta = step * std::max(1.0, std::abs(virtual_paths.at(slot.path_index).gain));
        else if (slot.kind == ParamKind::Delay)
            delta = step * tau_scale;

        jac.col(col) = (perturbed(delta) - perturbed(-delta)) / (2.0 * delta);
    }
    return jac;
}

Eigen::MatrixXd fisher_matrix(const Eigen::MatrixXcd& jacobian, const ObservationModel& obs) {
    if (jacobian.rows() != obs.cols())
        throw std::invalid_argument("fisher_matrix: Jacobian/observation dimension mismatch");
    const Eigen::MatrixXcd observed = obs.apply(jacobian);
    const Eigen::MatrixXcd weighted = obs.noise_solve(observed);
    const Eigen::MatrixXd re = (observed.adjoint() * weighted).real();
    return re + re.transpose(); // 2 Re{.}, exactly symmetric
}

double crb_trace(const Eigen::MatrixXcd& jacobian, const Eigen::MatrixXd& fim) {
    if (fim.rows() != fim.cols() || fim.rows() != jacobian.cols())
        throw std::invalid_argument("crb_trace: dimension mismatch");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(fim);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double lambda_max = ev.maxCoeff();
    const double threshold = lambda_max / 1e12;
    int null_dim = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (!(ev(i) > threshold))
            ++null_dim;
    if (lambda_max <= 0.0 || null_dim > 0)
        throw NonIdentifiableError("crb_trace: Fisher matrix is singular at 1e12 conditioning",
                                   null_dim);

    const Eigen::MatrixXd inv =
        eig.eigenvectors() * ev.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
    const Eigen::MatrixXcd gram = jacobian.adjoint() * jacobian; // Tr[D I^{-1} D^H] = Tr[I^{-1} D^H D]
    const Complex trace = (inv.cast<Complex>() * gram).trace();
    if (std::abs(trace.imag()) > 1e-10 * std::max(1.0, std::abs(trace.real())))
        throw std::logic_error("crb_trace: trace has a non-negligible imaginary part");
    return trace.real();
}

double observation_spectral_norm(const ObservationModel& obs) {
    const Eigen::Index n = obs.cols();
    Rng rng(0x5eedULL);
    Eigen::VectorXcd x(n);
    for (Eigen::Index i = 0; i < n; ++i)
        x(i) = rng.complex_normal();
    x.normalize();

    auto apply_a = [&obs](const Eigen::VectorXcd& v) {
        return Eigen::VectorXcd(obs.apply_adjoint(obs.noise_solve(obs.apply(v))));
    };

    double lambda = 0.0;
    for (int iter = 0; iter < 100000; ++iter) {
        Eigen::VectorXcd ax = apply_a(x);
        const double next = ax.norm();
        if (next == 0.0)
            return 0.0;
        x = ax / next;
        if (iter > 0 && std::abs(next - lambda) <= 1e-10 * next) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    return lambda;
}

double crb_lower_bound(const ParamLayout& layout, const ObservationModel& obs) {
    return static_cast<double>(layout.size()) / (2.0 * observation_spectral_norm(obs));
}

CoptReport check_c_opt(const Eigen::MatrixXcd& jacobian, const ObservationModel& obs,
                       double tol) {
    const double norm_a = observation_spectral_norm(obs);
    const Eigen::MatrixXcd observed = obs.apply(jacobian);
    const Eigen::MatrixXcd weighted = obs.noise_solve(observed);
    const Eigen::MatrixXcd lhs = (observed.adjoint() * weighted) / norm_a;
    const Eigen::MatrixXcd rhs = jacobian.adjoint() * jacobian;

    CoptReport report;
    report.deviation = (lhs - rhs).norm() / rhs.norm();
    report.holds = report.deviation <= tol;
    return report;
}

void to_json(nlohmann::json& j, const CoptReport& r) {
    j = nlohmann::json{{"holds", r.holds}, {"deviation", r.deviation}};
}

} // namespace chestlab
