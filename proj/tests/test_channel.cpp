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
#include <sstream>

#include "chestlab/channel.hpp"
#include "chestlab/rng.hpp"

using namespace chestlab;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

ChannelConfig small_mimo_config() {
    FrequencyGrid grid = make_frequency_grid(28e9, 3, 15e6);
    ArrayGeometry tx = make_ula(4, 0.5, Vec3{1, 0, 0}, grid.wavelength());
    ArrayGeometry rx = make_ula(2, 0.5, Vec3{0, 1, 0}, grid.wavelength());
    return ChannelConfig{std::move(tx), std::move(rx), std::move(grid)};
}

Direction random_direction(Rng& rng) {
    return Direction(rng.uniform(0.0, kTwoPi), rng.uniform(-kPi / 2, kPi / 2));
}

// Entry-wise channel evaluation straight from the per-antenna phase sums;
// the independent oracle the vectorized synthesis is checked against.
Complex channel_entry_direct(const ChannelConfig& cfg, const std::vector<Path>& paths,
                             Eigen::Index rx_i, Eigen::Index tx_j, Eigen::Index f_k) {
    const double lambda = cfg.grid.wavelength();
    Complex sum{0.0, 0.0};
    for (const Path& p : paths) {
        const double phase =
            -kTwoPi * (cfg.rx.positions()[static_cast<std::size_t>(rx_i)].dot(p.doa.unit()) / lambda -
                       cfg.tx.positions()[static_cast<std::size_t>(tx_j)].dot(p.dod.unit()) / lambda +
                       cfg.grid.offsets()[static_cast<std::size_t>(f_k)] * p.delay);
        sum += p.gain * std::polar(1.0, phase);
    }
    return sum;
}

} // namespace

TEST_CASE("steering vector phases") {
    SECTION("single antenna") {
        const ArrayGeometry single = make_ula(1, 0.5, Vec3{1, 0, 0}, 1.0);
        const Eigen::VectorXcd e = steering_vector(single, 1.0, Direction(0.7, -0.3));
        REQUIRE(e.size() == 1);
        CHECK(std::abs(e(0) - Complex{1.0, 0.0}) <= 1e-15);
    }

    SECTION("two antennas at +-lambda/4 along x, wave from x-hat") {
        const ArrayGeometry ula = make_ula(2, 0.5, Vec3{1, 0, 0}, 1.0);
        const Eigen::VectorXcd e = steering_vector(ula, 1.0, Direction(0.0, 0.0));
        const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
        // element at -lambda/4 leads, element at +lambda/4 lags
        CHECK(std::abs(e(0) - Complex{0.0, inv_sqrt2}) <= 1e-12);
        CHECK(std::abs(e(1) - Complex{0.0, -inv_sqrt2}) <= 1e-12);
    }

    SECTION("direction orthogonal to every element gives constant entries") {
        const ArrayGeometry ula = make_ula(5, 0.5, Vec3{1, 0, 0}, 1.0);
        const Eigen::VectorXcd e = steering_vector(ula, 1.0, Direction(kPi / 2, 0.0));
        for (Eigen::Index j = 0; j < e.size(); ++j)
            CHECK(std::abs(e(j) - Complex{1.0 / std::sqrt(5.0), 0.0}) <= 1e-12);
    }
}

TEST_CASE("delay vector phases") {
    SECTION("zero delay") {
        const FrequencyGrid g = make_frequency_grid(28e9, 4, 15e6);
        const Eigen::VectorXcd e = delay_vector(g, 0.0);
        for (Eigen::Index k = 0; k < 4; ++k)
            CHECK(std::abs(e(k) - Complex{0.5, 0.0}) <= 1e-15);
    }

    SECTION("two subcarriers a half period apart") {
        const double spacing = 10e6;
        const FrequencyGrid g = make_frequency_grid(1e9, 2, spacing);
        const Eigen::VectorXcd e = delay_vector(g, 1.0 / (2.0 * spacing));
        const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
        CHECK(std::abs(e(0) - Complex{0.0, inv_sqrt2}) <= 1e-12);
        CHECK(std::abs(e(1) - Complex{0.0, -inv_sqrt2}) <= 1e-12);
    }

    SECTION("periodic with period 1/spacing on a uniform grid") {
        // after recentering the offsets are integer multiples of the spacing
        // for odd n_f (half-integer for even n_f, where the period only holds
        // up to a global sign)
        const double spacing = 15e6;
        const FrequencyGrid odd = make_frequency_grid(28e9, 5, spacing);
        const FrequencyGrid even = make_frequency_grid(28e9, 6, spacing);
        Rng rng(5);
        for (int rep = 0; rep < 10; ++rep) {
            const double tau = rng.uniform(0.0, 1.0 / spacing);
            const Eigen::VectorXcd a = delay_vector(odd, tau);
            const Eigen::VectorXcd b = delay_vector(odd, tau + 1.0 / spacing);
            CHECK((a - b).norm() <= 1e-9);

            const Eigen::VectorXcd c = delay_vector(even, tau);
            const Eigen::VectorXcd d = delay_vector(even, tau + 1.0 / spacing);
            CHECK(std::abs(std::abs(c.dot(d)) - 1.0) <= 1e-9);
        }
    }
}

TEST_CASE("characteristic vectors") {
    SECTION("all dimensions one") {
        FrequencyGrid g = make_frequency_grid(1e9, 1, 0.0);
        ArrayGeometry tx = make_ula(1, 0.5, Vec3{1, 0, 0}, g.wavelength());
        ArrayGeometry rx = make_ula(1, 0.5, Vec3{1, 0, 0}, g.wavelength());
        const ChannelConfig cfg{std::move(tx), std::move(rx), std::move(g)};
        const Eigen::VectorXcd e =
            characteristic_vector(cfg, Direction(0.1, 0.0), Direction(0.2, 0.0), 1e-9);
        REQUIRE(e.size() == 1);
        CHECK(std::abs(std::abs(e(0)) - 1.0) <= 1e-15);
    }

    SECTION("unit norm for random parameters") {
        const ChannelConfig cfg = small_mimo_config();
        Rng rng(13);
        for (int rep = 0; rep < 25; ++rep) {
            const Eigen::VectorXcd e = characteristic_vector(
                cfg, random_direction(rng), random_direction(rng), rng.uniform(0.0, 1e-7));
            CHECK(std::abs(e.norm() - 1.0) <= 1e-12);
        }
    }

    SECTION("inner products factor across the three domains") {
        const ChannelConfig cfg = small_mimo_config();
        Rng rng(17);
        for (int rep = 0; rep < 25; ++rep) {
            const Direction doa1 = random_direction(rng), doa2 = random_direction(rng);
            const Direction dod1 = random_direction(rng), dod2 = random_direction(rng);
            const double tau1 = rng.uniform(0.0, 1e-7), tau2 = rng.uniform(0.0, 1e-7);

            const Complex full = characteristic_vector(cfg, doa1, dod1, tau1)
                                     .dot(characteristic_vector(cfg, doa2, dod2, tau2));
            const Complex by_parts =
                delay_vector(cfg.grid, tau1).dot(delay_vector(cfg.grid, tau2)) *
                std::conj(steering_vector(cfg.tx, cfg.grid.wavelength(), dod1)
                              .dot(steering_vector(cfg.tx, cfg.grid.wavelength(), dod2))) *
                steering_vector(cfg.rx, cfg.grid.wavelength(), doa1)
                    .dot(steering_vector(cfg.rx, cfg.grid.wavelength(), doa2));
            CHECK(std::abs(full - by_parts) <= 1e-12);
        }
    }
}

TEST_CASE("synthesize_channel matches the entry-wise evaluation") {
    const ChannelConfig cfg = small_mimo_config();

    SECTION("no paths means a zero channel") {
        CHECK(synthesize_channel(cfg, {}).norm() == 0.0);
    }

    SECTION("opposite gains cancel") {
        Rng rng(19);
        Path p;
        p.gain = Complex{0.8, -0.3};
        p.doa = random_direction(rng);
        p.dod = random_direction(rng);
        p.delay = 2e-8;
        Path q = p;
        q.gain = -p.gain;
        CHECK(synthesize_channel(cfg, {p, q}).norm() <= 1e-14);
    }

    SECTION("random three-path case against the triple loop") {
        Rng rng(23);
        std::vector<Path> paths;
        for (int l = 0; l < 3; ++l) {
            Path p;
            p.gain = Complex{rng.normal(), rng.normal()};
            p.doa = random_direction(rng);
            p.dod = random_direction(rng);
            p.delay = rng.uniform(0.0, 5e-8);
            paths.push_back(p);
        }
        const ChannelVec h = synthesize_channel(cfg, paths);
        for (Eigen::Index k = 0; k < cfg.n_f(); ++k)
            for (Eigen::Index j = 0; j < cfg.n_t(); ++j)
                for (Eigen::Index i = 0; i < cfg.n_r(); ++i) {
                    const Complex expected = channel_entry_direct(cfg, paths, i, j, k);
                    CHECK(std::abs(h(channel_index(cfg, i, j, k)) - expected) <= 1e-12);
                }
    }

    SECTION("linear in the gains") {
        Rng rng(29);
        std::vector<Path> a, b, sum;
        for (int l = 0; l < 2; ++l) {
            Path p;
            p.doa = random_direction(rng);
            p.dod = random_direction(rng);
            p.delay = rng.uniform(0.0, 5e-8);
            p.gain = Complex{rng.normal(), rng.normal()};
            a.push_back(p);
            Path q = p;
            q.gain = Complex{rng.normal(), rng.normal()};
            b.push_back(q);
            Path s = p;
            s.gain = p.gain + q.gain;
            sum.push_back(s);
        }
        const ChannelVec lhs = synthesize_channel(cfg, sum);
        const ChannelVec rhs = synthesize_channel(cfg, a) + synthesize_channel(cfg, b);
        CHECK((lhs - rhs).norm() <= 1e-12 * rhs.norm());
    }
}

TEST_CASE("observation models") {
    const ChannelConfig cfg = small_mimo_config();

    SECTION("identity observation") {
        const ObservationModel obs = make_identity_observation(4, 0.1);
        CHECK(obs.matrix().isApprox(Eigen::MatrixXcd::Identity(4, 4)));
        CHECK(obs.is_identity());
    }

    SECTION("Kronecker of identities is the identity") {
        const ObservationModel obs = make_kronecker_observation(
            cfg, Eigen::MatrixXcd::Identity(cfg.n_f(), cfg.n_f()),
            Eigen::MatrixXcd::Identity(cfg.n_t(), cfg.n_t()),
            Eigen::MatrixXcd::Identity(cfg.n_r(), cfg.n_r()), 0.0);
        CHECK(obs.matrix().isApprox(Eigen::MatrixXcd::Identity(cfg.dim(), cfg.dim())));
    }

    SECTION("subcarrier row sampling against the brute-force Kronecker") {
        Rng rng(31);
        Eigen::MatrixXcd f = Eigen::MatrixXcd::Zero(2, cfg.n_f());
        f(0, 0) = 1.0;
        f(1, 2) = 1.0;
        Eigen::MatrixXcd x(cfg.n_t(), 2);  // two training snapshots
        Eigen::MatrixXcd w(cfg.n_r(), 3);  // three combiners
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            for (Eigen::Index j = 0; j < x.cols(); ++j)
                x(i, j) = rng.complex_normal();
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j)
                w(i, j) = rng.complex_normal();

        const ObservationModel obs = make_kronecker_observation(cfg, f, x, w, 0.0);
        REQUIRE(obs.rows() == 2 * x.cols() * w.cols());

        const Eigen::MatrixXcd xt = x.transpose();
        const Eigen::MatrixXcd wh = w.adjoint();
        const Eigen::MatrixXcd m = obs.matrix();
        for (Eigen::Index rf = 0; rf < 2; ++rf)
            for (Eigen::Index rx_ = 0; rx_ < xt.rows(); ++rx_)
                for (Eigen::Index rw = 0; rw < wh.rows(); ++rw)
                    for (Eigen::Index cf = 0; cf < cfg.n_f(); ++cf)
                        for (Eigen::Index cx = 0; cx < cfg.n_t(); ++cx)
                            for (Eigen::Index cw = 0; cw < cfg.n_r(); ++cw) {
                                const Complex expected =
                                    f(rf, cf) * xt(rx_, cx) * wh(rw, cw);
                                const Eigen::Index row = (rf * xt.rows() + rx_) * wh.rows() + rw;
                                const Eigen::Index col = (cf * cfg.n_t() + cx) * cfg.n_r() + cw;
                                CHECK(std::abs(m(row, col) - expected) <= 1e-15);
                            }
    }

    SECTION("dimension mismatches are rejected") {
        CHECK_THROWS_AS(make_kronecker_observation(
                            cfg, Eigen::MatrixXcd::Identity(2, 5),
                            Eigen::MatrixXcd::Identity(cfg.n_t(), cfg.n_t()),
                            Eigen::MatrixXcd::Identity(cfg.n_r(), cfg.n_r()), 0.0),
                        std::invalid_argument);
    }

    SECTION("general covariance must be Hermitian positive definite") {
        Eigen::MatrixXcd bad = Eigen::MatrixXcd::Identity(4, 4);
        bad(0, 1) = Complex{0.5, 0.1};
        CHECK_THROWS_AS(
            make_explicit_observation(Eigen::MatrixXcd::Identity(4, 4), bad),
            std::invalid_argument);

        Eigen::MatrixXcd ok = Eigen::MatrixXcd::Identity(4, 4);
        ok(0, 1) = Complex{0.2, 0.1};
        ok(1, 0) = Complex{0.2, -0.1};
        CHECK_NOTHROW(make_explicit_observation(Eigen::MatrixXcd::Identity(4, 4), ok));
    }
}

TEST_CASE("observe") {
    SECTION("noiseless observation is exact") {
        const ObservationModel obs = make_identity_observation(6, 0.0);
        Eigen::VectorXcd h(6);
        Rng rng(37);
        for (Eigen::Index i = 0; i < 6; ++i)
            h(i) = rng.complex_normal();
        Rng noise(1);
        CHECK((observe(obs, h, noise) - h).norm() == 0.0);
    }

    SECTION("same seed, same draw") {
        const ObservationModel obs = make_identity_observation(6, 0.5);
        const Eigen::VectorXcd h = Eigen::VectorXcd::Zero(6);
        Rng a(99), b(99);
        const Eigen::VectorXcd ya = observe(obs, h, a);
        const Eigen::VectorXcd yb = observe(obs, h, b);
        CHECK((ya - yb).norm() == 0.0);
    }

    SECTION("sample covariance approaches sigma^2 Id") {
        const double sigma2 = 0.3;
        const Eigen::Index n = 4;
        const ObservationModel obs = make_identity_observation(n, sigma2);
        const Eigen::VectorXcd h = Eigen::VectorXcd::Zero(n);
        Rng rng(1234);
        Eigen::MatrixXcd cov = Eigen::MatrixXcd::Zero(n, n);
        const int draws = 100000;
        for (int d = 0; d < draws; ++d) {
            const Eigen::VectorXcd y = observe(obs, h, rng);
            cov += y * y.adjoint();
        }
        cov /= static_cast<double>(draws);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                const Complex expected = i == j ? Complex{sigma2, 0.0} : Complex{0.0, 0.0};
                CHECK(std::abs(cov(i, j) - expected) <= 0.05 * sigma2);
            }
    }

    SECTION("SNR bookkeeping round-trips") {
        const ChannelConfig cfg = small_mimo_config();
        Rng rng(41);
        Path p;
        p.gain = Complex{1.0, 0.0};
        p.doa = random_direction(rng);
        p.dod = random_direction(rng);
        p.delay = 1e-8;
        const ChannelVec h = synthesize_channel(cfg, {p});
        const ObservationModel noiseless = make_identity_observation(cfg.dim(), 0.0);
        const double sigma2 = sigma2_for_snr_db(noiseless, h, 7.5);
        CHECK(snr_db_of(noiseless.with_sigma2(sigma2), h) == Catch::Approx(7.5).margin(1e-9));
    }
}

TEST_CASE("channel csv round trip") {
    Rng rng(43);
    Eigen::VectorXcd v(9);
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = rng.complex_normal();

    std::stringstream io;
    write_channel_csv(io, v);
    const Eigen::VectorXcd back = read_channel_csv(io);
    REQUIRE(back.size() == v.size());
    CHECK((back - v).norm() == 0.0);

    std::stringstream bad("index,re,im\n0,1.0\n");
    CHECK_THROWS_WITH(read_channel_csv(bad), Catch::Matchers::ContainsSubstring("line 2"));
}
