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

#include "chestlab/estimator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace chestlab {

namespace {

struct AtomIndex {
    std::size_t zeta = 0;
    std::size_t dod = 0;
    std::size_t doa = 0;
};

bool lex_less(const AtomIndex& a, const AtomIndex& b) {
    if (a.zeta != b.zeta)
        return a.zeta < b.zeta;
    if (a.dod != b.dod)
        return a.dod < b.dod;
    return a.doa < b.doa;
}

// Running argmax with the deterministic tie-break toward the lowest
// (delay, DoD, DoA) index tuple, independent of evaluation order.
struct BestAtom {
    double cost = -std::numeric_limits<double>::infinity();
    AtomIndex index;
    bool any = false;

    void offer(double c, const AtomIndex& idx) {
        if (!any || c > cost || (c == cost && lex_less(idx, index))) {
            cost = c;
            index = idx;
            any = true;
        }
    }
};

struct GridFactors {
    std::vector<Eigen::VectorXcd> ef; // per delay
    std::vector<Eigen::VectorXcd> et; // per DoD
    std::vector<Eigen::VectorXcd> er; // per DoA
};

GridFactors build_factors(const DictionaryGrid& grid, const ChannelConfig& cfg) {
    if (grid.delays.empty() || grid.dods.empty() || grid.doas.empty())
        throw std::invalid_argument("extraction: empty dictionary grid");
    GridFactors f;
    f.ef.reserve(grid.delays.size());
    for (double tau : grid.delays)
        f.ef.push_back(delay_vector(cfg.grid, tau));
    f.et.reserve(grid.dods.size());
    for (const Direction& d : grid.dods)
        f.et.push_back(steering_vector(cfg.tx, cfg.grid.wavelength(), d));
    f.er.reserve(grid.doas.size());
    for (const Direction& d : grid.doas)
        f.er.push_back(steering_vector(cfg.rx, cfg.grid.wavelength(), d));
    return f;
}

Eigen::VectorXcd assemble_atom(const ChannelConfig& cfg, const Eigen::VectorXcd& ef,
                               const Eigen::VectorXcd& et, const Eigen::VectorXcd& er) {
    Eigen::VectorXcd e(cfg.dim());
    Eigen::Index idx = 0;
    for (Eigen::Index k = 0; k < cfg.n_f(); ++k)
        for (Eigen::Index j = 0; j < cfg.n_t(); ++j) {
            const Complex ft = ef(k) * std::conj(et(j));
            for (Eigen::Index i = 0; i < cfg.n_r(); ++i)
                e(idx++) = ft * er(i);
        }
    return e;
}

Path path_from_grid(const DictionaryGrid& grid, const AtomIndex& idx) {
    Path p;
    p.gain = Complex{1.0, 0.0};
    p.doa = grid.doas[idx.doa];
    p.dod = grid.dods[idx.dod];
    p.delay = grid.delays[idx.zeta];
    return p;
}

// ---- identity-observation fast paths ------------------------------------
//
// With M = Id every atom here has unit norm, so f(x, r) = |x^H r|^2 and the
// inner products factor across the three Kronecker slots.

ExtractionResult joint_identity(const Eigen::VectorXcd& r, const DictionaryGrid& grid,
                                const ChannelConfig& cfg, const GridFactors& factors) {
    const Eigen::Index nr = cfg.n_r(), nt = cfg.n_t(), nf = cfg.n_f();
    BestAtom best;
    std::uint64_t evals = 0;

    Eigen::VectorXcd a(nf * nt); // receive-contracted residual, index k*nt+j
    Eigen::VectorXcd b(nf);      // after the transmit contraction

    for (std::size_t vr = 0; vr < grid.doas.size(); ++vr) {
        const Eigen::VectorXcd& er = factors.er[vr];
        for (Eigen::Index k = 0; k < nf; ++k)
            for (Eigen::Index j = 0; j < nt; ++j) {
                Complex s{0.0, 0.0};
                const Eigen::Index base = (k * nt + j) * nr;
                for (Eigen::Index i = 0; i < nr; ++i)
                    s += std::conj(er(i)) * r(base + i);
                a(k * nt + j) = s;
            }
        for (std::size_t vt = 0; vt < grid.dods.size(); ++vt) {
            const Eigen::VectorXcd& et = factors.et[vt];
            for (Eigen::Index k = 0; k < nf; ++k) {
                Complex s{0.0, 0.0};
                for (Eigen::Index j = 0; j < nt; ++j)
                    s += et(j) * a(k * nt + j);
                b(k) = s;
            }
            for (std::size_t zi = 0; zi < grid.delays.size(); ++zi) {
                const Eigen::VectorXcd& ef = factors.ef[zi];
                Complex val{0.0, 0.0};
                for (Eigen::Index k = 0; k < nf; ++k)
                    val += std::conj(ef(k)) * b(k);
                ++evals;
                best.offer(std::norm(val), AtomIndex{zi, vt, vr});
            }
        }
    }

    ExtractionResult out;
    out.path = path_from_grid(grid, best.index);
    out.delay_index = best.index.zeta;
    out.dod_index = best.index.dod;
    out.doa_index = best.index.doa;
    out.cost_evaluations = evals;
    return out;
}

// One sequential-step candidate under M = Id.  Slots with a concrete vector
// are contracted; nuisance slots stay free and their squared magnitudes are
// summed, which equals summing f over the standard basis of that slot.
double sequential_step_cost_identity(const Eigen::VectorXcd& r, const ChannelConfig& cfg,
                                     const Eigen::VectorXcd* ef, const Eigen::VectorXcd* et,
                                     const Eigen::VectorXcd* er) {
    const Eigen::Index nr = cfg.n_r(), nt = cfg.n_t(), nf = cfg.n_f();
    const Eigen::Index accf = ef ? 1 : nf;
    const Eigen::Index acct = et ? 1 : nt;
    const Eigen::Index accr = er ? 1 : nr;

    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(accf * acct * accr);
    for (Eigen::Index k = 0; k < nf; ++k)
        for (Eigen::Index j = 0; j < nt; ++j)
            for (Eigen::Index i = 0; i < nr; ++i) {
                Complex w = r((k * nt + j) * nr + i);
                if (ef)
                    w *= std::conj((*ef)(k));
                if (et)
                    w *= (*et)(j);
                if (er)
                    w *= std::conj((*er)(i));
                const Eigen::Index key =
                    ((ef ? 0 : k) * acct + (et ? 0 : j)) * accr + (er ? 0 : i);
                acc(key) += w;
            }
    return acc.squaredNorm();
}

// ---- general-observation literal paths -----------------------------------

double checked_cost(const Eigen::VectorXcd& x, const ObservationModel& obs,
                    const Eigen::VectorXcd& r, bool& defined) {
    try {
        defined = true;
        return cost_f(x, obs, r);
    } catch (const UndefinedCostError&) {
        defined = false;
        return 0.0;
    }
}

ExtractionResult joint_general(const Eigen::VectorXcd& r, const ObservationModel& obs,
                               const DictionaryGrid& grid, const ChannelConfig& cfg,
                               const GridFactors& factors) {
    BestAtom best;
    std::uint64_t evals = 0;
    for (std::size_t vr = 0; vr < grid.doas.size(); ++vr)
        for (std::size_t vt = 0; vt < grid.dods.size(); ++vt)
            for (std::size_t zi = 0; zi < grid.delays.size(); ++zi) {
                const Eigen::VectorXcd atom =
                    assemble_atom(cfg, factors.ef[zi], factors.et[vt], factors.er[vr]);
                ++evals;
                bool defined = false;
                const double c = checked_cost(atom, obs, r, defined);
                if (defined)
                    best.offer(c, AtomIndex{zi, vt, vr});
            }
    if (!best.any)
        throw EstimationFailureError("joint_estimate_path: cost undefined on every atom");

    ExtractionResult out;
    out.path = path_from_grid(grid, best.index);
    out.delay_index = best.index.zeta;
    out.dod_index = best.index.dod;
    out.doa_index = best.index.doa;
    out.cost_evaluations = evals;
    return out;
}

Eigen::VectorXcd basis_vector(Eigen::Index n, Eigen::Index i) {
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(n);
    b(i) = Complex{1.0, 0.0};
    return b;
}

} // namespace

std::vector<SeqAxis> default_sequential_order() {
    return {SeqAxis::Delay, SeqAxis::Dod, SeqAxis::Doa};
}

double cost_f(const Eigen::VectorXcd& x, const ObservationModel& obs,
              const Eigen::VectorXcd& r) {
    const Eigen::VectorXcd mx = obs.apply(x);
    const double denom = mx.squaredNorm();
    if (denom == 0.0)
        throw UndefinedCostError("cost_f: M x = 0");
    const Complex num = mx.dot(r); // x^H M^H r
    return std::norm(num) / denom;
}

ExtractionResult joint_estimate_path(const Eigen::VectorXcd& r, const ObservationModel& obs,
                                     const DictionaryGrid& grid, const ChannelConfig& cfg) {
    if (r.size() != obs.rows())
        throw std::invalid_argument("joint_estimate_path: residual dimension mismatch");
    const GridFactors factors = build_factors(grid, cfg);
    if (obs.is_identity())
        return joint_identity(r, grid, cfg, factors);
    return joint_general(r, obs, grid, cfg, factors);
}

ExtractionResult sequential_estimate_path(const Eigen::VectorXcd& r,
                                          const ObservationModel& obs,
                                          const DictionaryGrid& grid,
                                          const ChannelConfig& cfg,
                                          const std::vector<SeqAxis>& order) {
    if (r.size() != obs.rows())
        throw std::invalid_argument("sequential_estimate_path: residual dimension mismatch");
    {
        std::vector<SeqAxis> sorted = order;
        std::sort(sorted.begin(), sorted.end());
        if (sorted != std::vector<SeqAxis>{SeqAxis::Delay, SeqAxis::Dod, SeqAxis::Doa})
            throw std::invalid_argument(
                "sequential_estimate_path: order must be a permutation of the three axes");
    }

    const GridFactors factors = build_factors(grid, cfg);
    const bool identity = obs.is_identity();
    const Eigen::Index nr = cfg.n_r(), nt = cfg.n_t(), nf = cfg.n_f();

    // nullptr marks a slot that is still a nuisance parameter
    const Eigen::VectorXcd* chosen_ef = nullptr;
    const Eigen::VectorXcd* chosen_et = nullptr;
    const Eigen::VectorXcd* chosen_er = nullptr;
    AtomIndex chosen_index;
    std::uint64_t evals = 0;

    for (SeqAxis axis : order) {
        const std::size_t n_candidates = axis == SeqAxis::Delay ? grid.delays.size()
                                         : axis == SeqAxis::Dod ? grid.dods.size()
                                                                : grid.doas.size();
        double best_cost = -std::numeric_limits<double>::infinity();
        std::size_t best_c = 0;
        bool any = false;

        for (std::size_t c = 0; c < n_candidates; ++c) {
            const Eigen::VectorXcd* ef = chosen_ef;
            const Eigen::VectorXcd* et = chosen_et;
            const Eigen::VectorXcd* er = chosen_er;
            if (axis == SeqAxis::Delay)
                ef = &factors.ef[c];
            else if (axis == SeqAxis::Dod)
                et = &factors.et[c];
            else
                er = &factors.er[c];

            double cost = 0.0;
            bool defined = false;
            if (identity) {
                cost = sequential_step_cost_identity(r, cfg, ef, et, er);
                defined = true;
                evals += static_cast<std::uint64_t>((ef ? 1 : nf) * (et ? 1 : nt) *
                                                    (er ? 1 : nr));
            } else {
                // literal sum of f over the standard bases of nuisance slots
                for (Eigen::Index k = 0; k < (ef ? 1 : nf); ++k)
                    for (Eigen::Index j = 0; j < (et ? 1 : nt); ++j)
                        for (Eigen::Index i = 0; i < (er ? 1 : nr); ++i) {
                            const Eigen::VectorXcd xf = ef ? *ef : basis_vector(nf, k);
                            const Eigen::VectorXcd xt = et ? *et : basis_vector(nt, j);
                            const Eigen::VectorXcd xr = er ? *er : basis_vector(nr, i);
                            const Eigen::VectorXcd atom = assemble_atom(cfg, xf, xt, xr);
                            ++evals;
                            bool term_defined = false;
                            const double term = checked_cost(atom, obs, r, term_defined);
                            if (term_defined) {
                                cost += term;
                                defined = true;
                            }
                        }
            }
            if (defined && (!any || cost > best_cost)) {
                best_cost = cost;
                best_c = c;
                any = true;
            }
        }
        if (!any)
            throw EstimationFailureError(
                "sequential_estimate_path: cost undefined on every candidate");

        if (axis == SeqAxis::Delay) {
            chosen_ef = &factors.ef[best_c];
            chosen_index.zeta = best_c;
        } else if (axis == SeqAxis::Dod) {
            chosen_et = &factors.et[best_c];
            chosen_index.dod = best_c;
        } else {
            chosen_er = &factors.er[best_c];
            chosen_index.doa = best_c;
        }
    }

    ExtractionResult out;
    out.path = path_from_grid(grid, chosen_index);
    out.delay_index = chosen_index.zeta;
    out.dod_index = chosen_index.dod;
    out.doa_index = chosen_index.doa;
    out.cost_evaluations = evals;
    return out;
}

namespace {

LsSolution ls_from_observed_columns(const Eigen::MatrixXcd& me, const Eigen::VectorXcd& y) {
    const Eigen::Index p = me.cols();
    Eigen::MatrixXcd gram = me.adjoint() * me;
    const Eigen::VectorXcd rhs = me.adjoint() * y;

    LsSolution out;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram);
    const auto& ev = eig.eigenvalues();
    const double lo = ev.minCoeff();
    const double hi = ev.maxCoeff();
    if (!(lo > 0.0) || hi / lo > 1e12) {
        const double eps = 1e-10 * gram.real().trace() / static_cast<double>(p);
        gram += eps * Eigen::MatrixXcd::Identity(p, p);
        out.degenerate = true;
    }
    out.coefficients = gram.ldlt().solve(rhs);
    return out;
}

} // namespace

LsSolution ls_coefficients(const Eigen::MatrixXcd& e, const ObservationModel& obs,
                           const Eigen::VectorXcd& y) {
    if (e.cols() == 0)
        throw std::invalid_argument("ls_coefficients: need at least one column");
    if (e.rows() != obs.cols() || y.size() != obs.rows())
        throw std::invalid_argument("ls_coefficients: dimension mismatch");
    return ls_from_observed_columns(obs.apply(e), y);
}

ChannelEstimate greedy_estimate(const Eigen::VectorXcd& y, const ObservationModel& obs,
                                std::size_t p, const DictionaryGrid& grid,
                                ExtractionMethod method, const ChannelConfig& cfg,
                                const std::vector<SeqAxis>& order) {
    if (p < 1)
        throw std::invalid_argument("greedy_estimate: p must be >= 1");
    if (y.size() != obs.rows())
        throw std::invalid_argument("greedy_estimate: observation dimension mismatch");
    if (obs.cols() != cfg.dim())
        throw std::invalid_argument("greedy_estimate: observation/config dimension mismatch");

    ChannelEstimate est;
    est.over_parameterized = static_cast<Eigen::Index>(p) > obs.rows();
    est.residual_norms.reserve(p + 1);
    est.residual_norms.push_back(y.norm());

    const double scale = std::sqrt(static_cast<double>(cfg.dim()));
    Eigen::MatrixXcd e_cols(cfg.dim(), static_cast<Eigen::Index>(p));
    Eigen::MatrixXcd me_cols(obs.rows(), static_cast<Eigen::Index>(p));
    Eigen::VectorXcd residual = y;

    for (std::size_t it = 0; it < p; ++it) {
        const auto t0 = std::chrono::steady_clock::now();
        const ExtractionResult ex =
            method == ExtractionMethod::Joint
                ? joint_estimate_path(residual, obs, grid, cfg)
                : sequential_estimate_path(residual, obs, grid, cfg, order);
        const auto t1 = std::chrono::steady_clock::now();
        est.extraction_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
        est.cost_evaluations_per_iteration.push_back(ex.cost_evaluations);

        est.virtual_paths.push_back(ex.path);
        const Eigen::Index col = static_cast<Eigen::Index>(it);
        e_cols.col(col) = characteristic_vector(cfg, ex.path.doa, ex.path.dod, ex.path.delay);
        me_cols.col(col) = obs.apply(Eigen::VectorXcd(e_cols.col(col)));

        const LsSolution ls = ls_from_observed_columns(me_cols.leftCols(col + 1), y);
        est.degenerate = est.degenerate || ls.degenerate;

        residual = y - me_cols.leftCols(col + 1) * ls.coefficients;
        est.residual_norms.push_back(residual.norm());
        est.estimates_per_iteration.push_back(e_cols.leftCols(col + 1) * ls.coefficients);
        for (std::size_t m = 0; m <= it; ++m)
            est.virtual_paths[m].gain = ls.coefficients(static_cast<Eigen::Index>(m)) / scale;
    }

    est.estimate = est.estimates_per_iteration.back();
    return est;
}

double relative_error(const ChannelVec& h, const ChannelVec& h_hat) {
    const double denom = h.squaredNorm();
    if (denom == 0.0)
        throw std::invalid_argument("relative_error: reference channel is zero");
    if (h.size() != h_hat.size())
        throw std::invalid_argument("relative_error: dimension mismatch");
    return (h - h_hat).squaredNorm() / denom;
}

nlohmann::json estimate_report_json(const ChannelEstimate& est) {
    nlohmann::json paths = nlohmann::json::array();
    for (const Path& p : est.virtual_paths)
        paths.push_back({{"gain_re", p.gain.real()},
                         {"gain_im", p.gain.imag()},
                         {"doa_az_rad", p.doa.azimuth()},
                         {"doa_el_rad", p.doa.elevation()},
                         {"dod_az_rad", p.dod.azimuth()},
                         {"dod_el_rad", p.dod.elevation()},
                         {"delay_s", p.delay}});
    return nlohmann::json{{"virtual_paths", std::move(paths)},
                          {"residual_norms", est.residual_norms},
                          {"cost_evaluations_per_iteration", est.cost_evaluations_per_iteration},
                          {"extraction_seconds", est.extraction_seconds},
                          {"degenerate", est.degenerate},
                          {"over_parameterized", est.over_parameterized}};
}

} // namespace chestlab
