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

#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "chestlab/estimator.hpp"
#include "chestlab/rng.hpp"

using namespace chestlab;

namespace {

constexpr double kPi = std::numbers::pi;

ChannelConfig miso_narrowband() {
    FrequencyGrid grid = make_frequency_grid(28e9, 1, 0.0);
    ArrayGeometry tx = make_ula(8, 0.5, Vec3{1, 0, 0}, grid.wavelength());
    ArrayGeometry rx = make_ula(1, 0.5, Vec3{1, 0, 0}, grid.wavelength());
    return ChannelConfig{std::move(tx), std::move(rx), std::move(grid)};
}

ChannelConfig mimo_wideband() {
    FrequencyGrid grid = make_frequency_grid(28e9, 3, 15e6);
    ArrayGeometry tx = make_ula(4, 0.5, Vec3{1, 0, 0}, grid.wavelength());
    ArrayGeometry rx = make_ula(2, 0.5, Vec3{0, 1, 0}, grid.wavelength());
    return ChannelConfig{std::move(tx), std::move(rx), std::move(grid)};
}

Path grid_atom(const DictionaryGrid& grid, std::size_t zeta, std::size_t dod, std::size_t doa) {
    Path p;
    p.gain = Complex{1.0, 0.0};
    p.delay = grid.delays[zeta];
    p.dod = grid.dods[dod];
    p.doa = grid.doas[doa];
    return p;
}

// Plain re-evaluation of every grid atom through cost_f; the check the
// contraction-based search is held against.
ExtractionResult brute_force_joint(const Eigen::VectorXcd& r, const ObservationModel& obs,
                                   const DictionaryGrid& grid, const ChannelConfig& cfg) {
    ExtractionResult best;
    double best_cost = -1.0;
    bool first = true;
    for (std::size_t zi = 0; zi < grid.delays.size(); ++zi)
        for (std::size_t vt = 0; vt < grid.dods.size(); ++vt)
            for (std::size_t vr = 0; vr < grid.doas.size(); ++vr) {
                const Eigen::VectorXcd atom = characteristic_vector(
                    cfg, grid.doas[vr], grid.dods[vt], grid.delays[zi]);
                const double c = cost_f(atom, obs, r);
                if (first || c > best_cost) {
                    first = false;
                    best_cost = c;
                    best.delay_index = zi;
                    best.dod_index = vt;
                    best.doa_index = vr;
                }
            }
    best.path = grid_atom(grid, best.delay_index, best.dod_index, best.doa_index);
    return best;
}

} // namespace

TEST_CASE("cost function") {
    const ObservationModel obs = make_identity_observation(6, 0.0);
    Rng rng(3);
    Eigen::VectorXcd r(6);
    for (Eigen::Index i = 0; i < 6; ++i)
        r(i) = rng.complex_normal();

    SECTION("aligned unit vector recovers the squared residual norm") {
        const Eigen::VectorXcd x = r / r.norm();
        CHECK(cost_f(x, obs, r) == Catch::Approx(r.squaredNorm()).epsilon(1e-12));
    }

    SECTION("orthogonal vector scores zero") {
        Eigen::VectorXcd x = Eigen::VectorXcd::Zero(6);
        x(0) = r(1);
        x(1) = -r(0);
        // x^H r = conj(r1) r0 - conj(r0) r1... make it orthogonal explicitly
        x(0) = std::conj(r(1));
        x(1) = -std::conj(r(0));
        CHECK(cost_f(x, obs, r) <= 1e-20 * r.squaredNorm());
    }

    SECTION("invariant under complex rescaling of x") {
        const Eigen::VectorXcd x = r + Eigen::VectorXcd::Ones(6);
        const double base = cost_f(x, obs, r);
        const Complex scale = 3.0 * std::polar(1.0, kPi / 7.0);
        CHECK(cost_f(scale * x, obs, r) == Catch::Approx(base).epsilon(1e-12));
    }

    SECTION("M x = 0 is undefined") {
        const ObservationModel zero =
            make_explicit_observation(Eigen::MatrixXcd::Zero(6, 6), 0.0);
        CHECK_THROWS_AS(cost_f(r, zero, r), UndefinedCostError);
    }
}

TEST_CASE("joint extraction") {
    const ChannelConfig cfg = mimo_wideband();
    const DictionaryGrid grid = make_dictionary(cfg, 2);
    const ObservationModel obs = make_identity_observation(cfg.dim(), 0.0);

    SECTION("noiseless on-grid residual returns exactly that atom") {
        const Path atom = grid_atom(grid, 4, 3, 1);
        const Eigen::VectorXcd r =
            characteristic_vector(cfg, atom.doa, atom.dod, atom.delay);
        const ExtractionResult out = joint_estimate_path(r, obs, grid, cfg);
        CHECK(out.delay_index == 4);
        CHECK(out.dod_index == 3);
        CHECK(out.doa_index == 1);
    }

    SECTION("agrees with the brute-force search on noisy residuals") {
        Rng rng(11);
        for (int rep = 0; rep < 5; ++rep) {
            Eigen::VectorXcd r(cfg.dim());
            for (Eigen::Index i = 0; i < r.size(); ++i)
                r(i) = rng.complex_normal();
            const ExtractionResult fast = joint_estimate_path(r, obs, grid, cfg);
            const ExtractionResult slow = brute_force_joint(r, obs, grid, cfg);
            CHECK(fast.delay_index == slow.delay_index);
            CHECK(fast.dod_index == slow.dod_index);
            CHECK(fast.doa_index == slow.doa_index);
        }
    }

    SECTION("explicit identity matrix takes the literal path, same answer") {
        const ObservationModel dense = make_explicit_observation(
            Eigen::MatrixXcd::Identity(cfg.dim(), cfg.dim()), 0.0);
        Rng rng(13);
        Eigen::VectorXcd r(cfg.dim());
        for (Eigen::Index i = 0; i < r.size(); ++i)
            r(i) = rng.complex_normal();
        const ExtractionResult fast = joint_estimate_path(r, obs, grid, cfg);
        const ExtractionResult literal = joint_estimate_path(r, dense, grid, cfg);
        CHECK(fast.delay_index == literal.delay_index);
        CHECK(fast.dod_index == literal.dod_index);
        CHECK(fast.doa_index == literal.doa_index);
    }

    SECTION("zero residual falls back to the first atom") {
        const Eigen::VectorXcd r = Eigen::VectorXcd::Zero(cfg.dim());
        const ExtractionResult out = joint_estimate_path(r, obs, grid, cfg);
        CHECK(out.delay_index == 0);
        CHECK(out.dod_index == 0);
        CHECK(out.doa_index == 0);
    }

    SECTION("evaluation count is the full product grid") {
        const Eigen::VectorXcd r = Eigen::VectorXcd::Ones(cfg.dim());
        const ExtractionResult out = joint_estimate_path(r, obs, grid, cfg);
        CHECK(out.cost_evaluations ==
              grid.delays.size() * grid.dods.size() * grid.doas.size());
    }

    SECTION("single-atom grid returns it") {
        DictionaryGrid tiny;
        tiny.delays = {grid.delays[2]};
        tiny.dods = {grid.dods[1]};
        tiny.doas = {grid.doas[0]};
        const Eigen::VectorXcd r = Eigen::VectorXcd::Ones(cfg.dim());
        const ExtractionResult out = joint_estimate_path(r, obs, tiny, cfg);
        CHECK(out.cost_evaluations == 1);
        CHECK(out.delay_index == 0);
    }
}

TEST_CASE("sequential extraction") {
    const ChannelConfig cfg = mimo_wideband();
    const DictionaryGrid grid = make_dictionary(cfg, 2);
    const ObservationModel obs = make_identity_observation(cfg.dim(), 0.0);

    SECTION("matches joint on a noiseless on-grid residual") {
        const Path atom = grid_atom(grid, 3, 5, 2);
        const Eigen::VectorXcd r =
            characteristic_vector(cfg, atom.doa, atom.dod, atom.delay);
        const ExtractionResult joint = joint_estimate_path(r, obs, grid, cfg);
        const ExtractionResult seq = sequential_estimate_path(r, obs, grid, cfg);
        CHECK(seq.delay_index == joint.delay_index);
        CHECK(seq.dod_index == joint.dod_index);
        CHECK(seq.doa_index == joint.doa_index);
    }

    SECTION("evaluation count follows the three-step formula") {
        Rng rng(17);
        Eigen::VectorXcd r(cfg.dim());
        for (Eigen::Index i = 0; i < r.size(); ++i)
            r(i) = rng.complex_normal();
        const ExtractionResult out = sequential_estimate_path(r, obs, grid, cfg);
        const std::uint64_t expected =
            grid.delays.size() * static_cast<std::uint64_t>(cfg.n_r() * cfg.n_t()) +
            grid.dods.size() * static_cast<std::uint64_t>(cfg.n_r()) + grid.doas.size();
        CHECK(out.cost_evaluations == expected);
    }

    SECTION("MISO: the arrival grid degenerates to the placeholder") {
        const ChannelConfig miso = miso_narrowband();
        const DictionaryGrid miso_grid = make_dictionary(miso, 2);
        REQUIRE(miso_grid.doas.size() == 1);
        REQUIRE(miso_grid.delays.size() == 1);
        Rng rng(19);
        Eigen::VectorXcd r(miso.dim());
        for (Eigen::Index i = 0; i < r.size(); ++i)
            r(i) = rng.complex_normal();
        const ObservationModel miso_obs = make_identity_observation(miso.dim(), 0.0);
        const ExtractionResult out = sequential_estimate_path(r, miso_obs, miso_grid, miso);
        CHECK((out.path.doa.unit() - Vec3{1, 0, 0}).norm() <= 1e-15);
        const std::uint64_t expected =
            1 * static_cast<std::uint64_t>(miso.n_r() * miso.n_t()) +
            miso_grid.dods.size() * static_cast<std::uint64_t>(miso.n_r()) + 1;
        CHECK(out.cost_evaluations == expected);
    }

    SECTION("any estimation order works") {
        Rng rng(23);
        Eigen::VectorXcd r(cfg.dim());
        for (Eigen::Index i = 0; i < r.size(); ++i)
            r(i) = rng.complex_normal();
        const std::vector<SeqAxis> dod_first{SeqAxis::Dod, SeqAxis::Delay, SeqAxis::Doa};
        const ExtractionResult out = sequential_estimate_path(r, obs, grid, cfg, dod_first);
        const std::uint64_t expected =
            grid.dods.size() * static_cast<std::uint64_t>(cfg.n_f() * cfg.n_r()) +
            grid.delays.size() * static_cast<std::uint64_t>(cfg.n_r()) + grid.doas.size();
        CHECK(out.cost_evaluations == expected);

        const std::vector<SeqAxis> bad{SeqAxis::Dod, SeqAxis::Dod, SeqAxis::Doa};
        CHECK_THROWS_AS(sequential_estimate_path(r, obs, grid, cfg, bad),
                        std::invalid_argument);
    }
}

TEST_CASE("least squares coefficients") {
    const ChannelConfig cfg = mimo_wideband();
    const ObservationModel obs = make_identity_observation(cfg.dim(), 0.0);
    const DictionaryGrid grid = make_dictionary(cfg, 2);

    SECTION("single column projection") {
        const Eigen::VectorXcd e =
            characteristic_vector(cfg, grid.doas[0], grid.dods[2], grid.delays[1]);
        const Complex c{0.7, -1.1};
        const LsSolution ls = ls_coefficients(e, obs, c * e);
        REQUIRE(ls.coefficients.size() == 1);
        CHECK(std::abs(ls.coefficients(0) - c) <= 1e-12);
        CHECK_FALSE(ls.degenerate);
    }

    SECTION("orthonormal columns reduce to inner products") {
        Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(cfg.dim(), 3);
        e(0, 0) = 1.0;
        e(3, 1) = 1.0;
        e(5, 2) = 1.0;
        Rng rng(29);
        Eigen::VectorXcd y(cfg.dim());
        for (Eigen::Index i = 0; i < y.size(); ++i)
            y(i) = rng.complex_normal();
        const LsSolution ls = ls_coefficients(e, obs, y);
        CHECK((ls.coefficients - e.adjoint() * y).norm() <= 1e-12);
    }

    SECTION("residual is orthogonal to the fitted columns") {
        Rng rng(31);
        Eigen::MatrixXcd e(cfg.dim(), 3);
        Eigen::VectorXcd y(cfg.dim());
        for (Eigen::Index i = 0; i < cfg.dim(); ++i) {
            y(i) = rng.complex_normal();
            for (Eigen::Index j = 0; j < 3; ++j)
                e(i, j) = rng.complex_normal();
        }
        const LsSolution ls = ls_coefficients(e, obs, y);
        const Eigen::VectorXcd residual = y - e * ls.coefficients;
        CHECK((e.adjoint() * residual).norm() <= 1e-10 * y.norm());
    }

    SECTION("duplicate columns trigger the ridge fallback") {
        const Eigen::VectorXcd e =
            characteristic_vector(cfg, grid.doas[0], grid.dods[0], grid.delays[0]);
        Eigen::MatrixXcd dup(cfg.dim(), 2);
        dup.col(0) = e;
        dup.col(1) = e;
        const LsSolution ls = ls_coefficients(dup, obs, e);
        CHECK(ls.degenerate);
        CHECK(ls.coefficients.allFinite());
    }

    SECTION("empty column set is rejected") {
        CHECK_THROWS_AS(ls_coefficients(Eigen::MatrixXcd(cfg.dim(), 0), obs,
                                        Eigen::VectorXcd::Zero(cfg.dim())),
                        std::invalid_argument);
    }
}

TEST_CASE("greedy estimation") {
    const ChannelConfig cfg = miso_narrowband();
    const DictionaryGrid grid = make_dictionary(cfg, 2);
    const ObservationModel obs = make_identity_observation(cfg.dim(), 0.0);

    SECTION("single on-grid atom is recovered exactly") {
        Path atom = grid_atom(grid, 0, 5, 0);
        atom.gain = Complex{0.9, 0.4};
        const ChannelVec h = synthesize_channel(cfg, {atom});
        for (ExtractionMethod method :
             {ExtractionMethod::Joint, ExtractionMethod::Sequential}) {
            const ChannelEstimate est = greedy_estimate(h, obs, 1, grid, method, cfg);
            CHECK(relative_error(h, est.estimate) < 1e-20);
            CHECK(std::abs(est.virtual_paths[0].gain - atom.gain) <= 1e-10);
        }
    }

    SECTION("three mutually orthogonal atoms are recovered exactly") {
        // u-spacing between indices 2, 6, 10 is 1/2, which zeroes the
        // 8-element Dirichlet kernel
        std::vector<Path> atoms = {grid_atom(grid, 0, 2, 0), grid_atom(grid, 0, 6, 0),
                                   grid_atom(grid, 0, 10, 0)};
        atoms[0].gain = Complex{1.0, 0.0};
        atoms[1].gain = Complex{0.0, 0.95};
        atoms[2].gain = Complex{-0.9, 0.1};
        const Eigen::VectorXcd e0 =
            characteristic_vector(cfg, atoms[0].doa, atoms[0].dod, atoms[0].delay);
        const Eigen::VectorXcd e1 =
            characteristic_vector(cfg, atoms[1].doa, atoms[1].dod, atoms[1].delay);
        REQUIRE(std::abs(e0.dot(e1)) <= 1e-12);

        const ChannelVec h = synthesize_channel(cfg, atoms);
        for (ExtractionMethod method :
             {ExtractionMethod::Joint, ExtractionMethod::Sequential}) {
            const ChannelEstimate est = greedy_estimate(h, obs, 3, grid, method, cfg);
            CHECK(relative_error(h, est.estimate) < 1e-10);
        }
    }

    SECTION("residual norms never increase") {
        Rng rng(37);
        Eigen::VectorXcd y(cfg.dim());
        for (Eigen::Index i = 0; i < y.size(); ++i)
            y(i) = rng.complex_normal();
        const ChannelEstimate est =
            greedy_estimate(y, obs, 6, grid, ExtractionMethod::Joint, cfg);
        REQUIRE(est.residual_norms.size() == 7);
        for (std::size_t i = 0; i + 1 < est.residual_norms.size(); ++i)
            CHECK(est.residual_norms[i + 1] <= est.residual_norms[i] + 1e-12);
    }

    SECTION("noisy estimates cannot beat the noiseless projection") {
        std::vector<Path> atoms = {grid_atom(grid, 0, 2, 0), grid_atom(grid, 0, 10, 0)};
        atoms[0].gain = Complex{1.0, 0.2};
        atoms[1].gain = Complex{-0.4, 0.6};
        const ChannelVec h = synthesize_channel(cfg, atoms);
        for (std::size_t p : {std::size_t{1}, std::size_t{2}}) {
            const ChannelEstimate noiseless =
                greedy_estimate(h, obs, p, grid, ExtractionMethod::Joint, cfg);
            const double floor_error = (h - noiseless.estimate).norm();
            for (std::uint64_t seed = 0; seed < 5; ++seed) {
                Rng rng(seed);
                const ObservationModel noisy = obs.with_sigma2(0.05 * h.squaredNorm() /
                                                               static_cast<double>(cfg.dim()));
                const Eigen::VectorXcd y = observe(noisy, h, rng);
                const ChannelEstimate est =
                    greedy_estimate(y, noisy, p, grid, ExtractionMethod::Joint, cfg);
                CHECK((h - est.estimate).norm() >= floor_error - 1e-10);
            }
        }
    }

    SECTION("over-parameterized runs are flagged but proceed") {
        const ChannelVec h = synthesize_channel(cfg, {grid_atom(grid, 0, 3, 0)});
        const ChannelEstimate est =
            greedy_estimate(h, obs, cfg.dim() + 2, grid, ExtractionMethod::Joint, cfg);
        CHECK(est.over_parameterized);
        CHECK(est.virtual_paths.size() == static_cast<std::size_t>(cfg.dim() + 2));
    }
}

TEST_CASE("model-order nesting keeps the bias non-increasing") {
    const ChannelConfig cfg = miso_narrowband();
    const DictionaryGrid grid = make_dictionary(cfg, 2);
    const ObservationModel obs = make_identity_observation(cfg.dim(), 0.0);
    Rng rng(41);
    Eigen::VectorXcd h(cfg.dim());
    for (Eigen::Index i = 0; i < h.size(); ++i)
        h(i) = rng.complex_normal();
    const ChannelEstimate est = greedy_estimate(h, obs, 6, grid, ExtractionMethod::Joint, cfg);
    double previous = std::numeric_limits<double>::infinity();
    for (const auto& estimate : est.estimates_per_iteration) {
        const double err = relative_error(h, estimate);
        CHECK(err <= previous + 1e-12);
        previous = err;
    }
}

TEST_CASE("relative error basics") {
    Eigen::VectorXcd h(3);
    h << Complex{1, 0}, Complex{0, 2}, Complex{-1, 1};
    CHECK(relative_error(h, h) == 0.0);
    CHECK(relative_error(h, Eigen::VectorXcd::Zero(3)) == Catch::Approx(1.0));
    CHECK(relative_error(h, 2.0 * h) == Catch::Approx(1.0));
    CHECK_THROWS_AS(relative_error(Eigen::VectorXcd::Zero(3), h), std::invalid_argument);
}

TEST_CASE("estimate report serializes") {
    const ChannelConfig cfg = miso_narrowband();
    const DictionaryGrid grid = make_dictionary(cfg, 2);
    const ObservationModel obs = make_identity_observation(cfg.dim(), 0.0);
    const ChannelVec h = synthesize_channel(cfg, {grid_atom(grid, 0, 4, 0)});
    const ChannelEstimate est = greedy_estimate(h, obs, 2, grid, ExtractionMethod::Joint, cfg);
    const nlohmann::json j = estimate_report_json(est);
    CHECK(j.at("virtual_paths").size() == 2);
    CHECK(j.at("residual_norms").size() == 3);
    CHECK(j.at("cost_evaluations_per_iteration").size() == 2);
}
