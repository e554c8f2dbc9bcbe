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

#include "chestlab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "chestlab/analysis.hpp"
#include "chestlab/estimator.hpp"
#include "chestlab/svg.hpp"

namespace chestlab {

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Static trial partition across workers; trial t is always computed from the
// same per-trial seed, so the partition never shows in the outputs.
void parallel_trials(std::size_t n_trials, int workers, const std::function<void(std::size_t)>& fn) {
    const int n_workers = std::max(1, std::min<int>(workers, static_cast<int>(n_trials)));
    if (n_workers == 1) {
        for (std::size_t t = 0; t < n_trials; ++t)
            fn(t);
        return;
    }
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (std::size_t t = static_cast<std::size_t>(w); t < n_trials;
                     t += static_cast<std::size_t>(n_workers))
                    fn(t);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error)
                    first_error = std::current_exception();
            }
        });
    }
    for (std::thread& t : pool)
        t.join();
    if (first_error)
        std::rethrow_exception(first_error);
}

std::ofstream open_output(const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out)
        throw std::runtime_error("cannot open output file " + file.string());
    return out;
}

ExtractionMethod method_from_name(const std::string& name) {
    return name == "sequential" ? ExtractionMethod::Sequential : ExtractionMethod::Joint;
}

} // namespace

// ---- bias ------------------------------------------------------------------

BiasExperimentResult run_bias_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    if (cfg.p_values.empty() || cfg.scenarios.empty())
        throw std::invalid_argument("run_bias_experiment: scenarios and p_values required");

    const int oversampling = cfg.oversampling_values.front();
    const std::size_t p_max = cfg.p_values.back();
    const ExtractionMethod method = method_from_name(cfg.method);
    const int workers = resolve_workers(cfg);

    BiasExperimentResult result;
    result.p_values = cfg.p_values;

    // rel_error[scenario][trial][p index]
    std::vector<std::vector<std::vector<double>>> rel_error(cfg.scenarios.size());

    for (std::size_t si = 0; si < cfg.scenarios.size(); ++si) {
        const ScenarioSpec& scenario = cfg.scenarios[si];
        result.scenario_names.push_back(scenario.name);
        const ChannelConfig channel_cfg = build_channel_config(scenario);
        const DictionaryGrid grid = make_dictionary(channel_cfg, oversampling);
        const ObservationModel obs = make_identity_observation(channel_cfg.dim(), 0.0);

        auto& per_trial = rel_error[si];
        per_trial.assign(cfg.n_trials, std::vector<double>(cfg.p_values.size(), 0.0));

        parallel_trials(cfg.n_trials, workers, [&](std::size_t trial) {
            const std::vector<Path> paths = scenario_paths(scenario, cfg.master_seed, trial);
            const ChannelVec h = synthesize_channel(channel_cfg, paths);
            // greedy projection run directly on h: perfect observation, no noise
            const ChannelEstimate est =
                greedy_estimate(h, obs, p_max, grid, method, channel_cfg, cfg.sequential_order);
            for (std::size_t pi = 0; pi < cfg.p_values.size(); ++pi)
                per_trial[trial][pi] =
                    relative_error(h, est.estimates_per_iteration[cfg.p_values[pi] - 1]);
        });
    }

    std::filesystem::create_directories(cfg.output_dir);
    result.csv_file = cfg.output_dir / "bias.csv";
    result.mean_csv_file = cfg.output_dir / "bias_mean.csv";

    auto raw = open_output(result.csv_file);
    raw << "scenario,p,trial,rel_error\n";
    auto mean = open_output(result.mean_csv_file);
    mean << "scenario,p,mean_rel_error\n";

    result.mean_rel_error.assign(cfg.scenarios.size(),
                                 std::vector<double>(cfg.p_values.size(), 0.0));
    for (std::size_t si = 0; si < cfg.scenarios.size(); ++si) {
        for (std::size_t pi = 0; pi < cfg.p_values.size(); ++pi) {
            double sum = 0.0;
            for (std::size_t trial = 0; trial < cfg.n_trials; ++trial) {
                raw << result.scenario_names[si] << ',' << cfg.p_values[pi] << ',' << trial << ','
                    << g17(rel_error[si][trial][pi]) << '\n';
                sum += rel_error[si][trial][pi];
            }
            const double m = sum / static_cast<double>(cfg.n_trials);
            result.mean_rel_error[si][pi] = m;
            mean << result.scenario_names[si] << ',' << cfg.p_values[pi] << ',' << g17(m) << '\n';
        }
    }
    return result;
}

// ---- tradeoff ----------------------------------------------------------------

TradeoffExperimentResult run_tradeoff_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    if (cfg.scenarios.size() != 1)
        throw std::invalid_argument("run_tradeoff_experiment: exactly one scenario required");

    const ScenarioSpec& scenario = cfg.scenarios.front();
    const ChannelConfig channel_cfg = build_channel_config(scenario);
    const std::size_t p_max = cfg.p_values.back();
    const int workers = resolve_workers(cfg);

    TradeoffExperimentResult result;
    result.s_values = cfg.oversampling_values;
    result.snr_db_values = cfg.snr_db_values;
    result.p_values = cfg.p_values;
    if (cfg.method == "both")
        result.methods = {"joint", "sequential"};
    else
        result.methods = {cfg.method};

    std::vector<DictionaryGrid> grids;
    grids.reserve(result.s_values.size());
    for (int s : result.s_values)
        grids.push_back(make_dictionary(channel_cfg, s));

    const std::size_t n_s = result.s_values.size();
    const std::size_t n_snr = result.snr_db_values.size();
    const std::size_t n_m = result.methods.size();
    const std::size_t n_p = cfg.p_values.size();

    struct Cell {
        std::vector<double> rel_error;      // per p index
        std::vector<double> cumulative_time; // per p index, extraction time through p
        double extraction_seconds_total = 0.0;
        std::uint64_t extractions = 0;
    };
    // [s][snr][method][trial]
    std::vector<Cell> cells(n_s * n_snr * n_m * cfg.n_trials);
    auto cell_at = [&](std::size_t s, std::size_t q, std::size_t m, std::size_t t) -> Cell& {
        return cells[((s * n_snr + q) * n_m + m) * cfg.n_trials + t];
    };

    parallel_trials(cfg.n_trials, workers, [&](std::size_t trial) {
        const std::vector<Path> paths = scenario_paths(scenario, cfg.master_seed, trial);
        const ChannelVec h = synthesize_channel(channel_cfg, paths);
        const ObservationModel noiseless = make_identity_observation(channel_cfg.dim(), 0.0);

        for (std::size_t q = 0; q < n_snr; ++q) {
            const double sigma2 = sigma2_for_snr_db(noiseless, h, cfg.snr_db_values[q]);
            const ObservationModel obs = noiseless.with_sigma2(sigma2);
            // one noise draw per (trial, SNR): both methods and every S see
            // the same observation
            Rng noise_rng(derive_seed(cfg.master_seed, {0x6e6f697365ULL, trial, q}));
            const Eigen::VectorXcd y = observe(obs, h, noise_rng);

            for (std::size_t s = 0; s < n_s; ++s)
                for (std::size_t m = 0; m < n_m; ++m) {
                    const ChannelEstimate est =
                        greedy_estimate(y, obs, p_max, grids[s],
                                        method_from_name(result.methods[m]), channel_cfg,
                                        cfg.sequential_order);
                    Cell& cell = cell_at(s, q, m, trial);
                    cell.rel_error.resize(n_p);
                    cell.cumulative_time.resize(n_p);
                    double cumulative = 0.0;
                    std::size_t pi = 0;
                    for (std::size_t it = 0; it < p_max; ++it) {
                        cumulative += est.extraction_seconds[it];
                        if (pi < n_p && cfg.p_values[pi] == it + 1) {
                            cell.rel_error[pi] =
                                relative_error(h, est.estimates_per_iteration[it]);
                            cell.cumulative_time[pi] = cumulative;
                            ++pi;
                        }
                    }
                    cell.extraction_seconds_total = cumulative;
                    cell.extractions = p_max;
                }
        }
    });

    std::filesystem::create_directories(cfg.output_dir);
    result.csv_file = cfg.output_dir / "tradeoff.csv";
    result.mean_csv_file = cfg.output_dir / "tradeoff_mean.csv";
    result.time_ratio_csv_file = cfg.output_dir / "tradeoff_time_ratio.csv";

    auto raw = open_output(result.csv_file);
    raw << "S,snr_db,p,method,trial,rel_error,time_s\n";
    auto mean = open_output(result.mean_csv_file);
    mean << "S,snr_db,p,method,mean_rel_error\n";

    result.mean_rel_error.assign(
        n_s, std::vector<std::vector<std::vector<double>>>(
                 n_snr, std::vector<std::vector<double>>(n_m, std::vector<double>(n_p, 0.0))));

    for (std::size_t s = 0; s < n_s; ++s)
        for (std::size_t q = 0; q < n_snr; ++q)
            for (std::size_t pi = 0; pi < n_p; ++pi)
                for (std::size_t m = 0; m < n_m; ++m) {
                    double sum = 0.0;
                    for (std::size_t trial = 0; trial < cfg.n_trials; ++trial) {
                        const Cell& cell = cell_at(s, q, m, trial);
                        raw << result.s_values[s] << ',' << g17(result.snr_db_values[q]) << ','
                            << cfg.p_values[pi] << ',' << result.methods[m] << ',' << trial << ','
                            << g17(cell.rel_error[pi]) << ',' << g17(cell.cumulative_time[pi])
                            << '\n';
                        sum += cell.rel_error[pi];
                    }
                    const double avg = sum / static_cast<double>(cfg.n_trials);
                    result.mean_rel_error[s][q][m][pi] = avg;
                    mean << result.s_values[s] << ',' << g17(result.snr_db_values[q]) << ','
                         << cfg.p_values[pi] << ',' << result.methods[m] << ',' << g17(avg)
                         << '\n';
                }

    result.mean_extraction_seconds_joint.assign(n_s, 0.0);
    result.mean_extraction_seconds_sequential.assign(n_s, 0.0);
    auto ratio = open_output(result.time_ratio_csv_file);
    ratio << "S,t_joint_s,t_seq_s,ratio\n";
    for (std::size_t s = 0; s < n_s; ++s) {
        double time[2] = {0.0, 0.0};
        std::uint64_t count[2] = {0, 0};
        for (std::size_t m = 0; m < n_m; ++m) {
            const std::size_t slot = result.methods[m] == "joint" ? 0 : 1;
            for (std::size_t q = 0; q < n_snr; ++q)
                for (std::size_t trial = 0; trial < cfg.n_trials; ++trial) {
                    const Cell& cell = cell_at(s, q, m, trial);
                    time[slot] += cell.extraction_seconds_total;
                    count[slot] += cell.extractions;
                }
        }
        const double t_joint = count[0] > 0 ? time[0] / static_cast<double>(count[0]) : 0.0;
        const double t_seq = count[1] > 0 ? time[1] / static_cast<double>(count[1]) : 0.0;
        result.mean_extraction_seconds_joint[s] = t_joint;
        result.mean_extraction_seconds_sequential[s] = t_seq;
        ratio << result.s_values[s] << ',' << g17(t_joint) << ',' << g17(t_seq) << ','
              << g17(t_seq > 0.0 ? t_joint / t_seq : 0.0) << '\n';
    }
    return result;
}

// ---- CRB/FIM validation -------------------------------------------------------

namespace {

struct PropertyReport {
    std::string name;
    bool pass = false;
    double deviation = 0.0;
    std::string details;
};

// Max within-path cross-group correlation |I_ij| / sqrt(I_ii I_jj).  Raw FIM
// entries mix units (seconds vs radians), so the comparison is done on the
// correlation-normalized matrix where every diagonal is 1.
double max_cross_group_correlation(const Eigen::MatrixXd& fim, const ParamLayout& layout) {
    auto group_of = [](const ParamSlot& s) {
        switch (s.kind) {
        case ParamKind::GainMagnitude: return 0;
        case ParamKind::GainPhase: return 1;
        case ParamKind::DoaTangent: return 2;
        case ParamKind::DodTangent: return 3;
        case ParamKind::Delay: return 4;
        }
        return -1;
    };
    double worst = 0.0;
    for (Eigen::Index i = 0; i < fim.rows(); ++i)
        for (Eigen::Index j = i + 1; j < fim.cols(); ++j) {
            const ParamSlot& a = layout.slots[static_cast<std::size_t>(i)];
            const ParamSlot& b = layout.slots[static_cast<std::size_t>(j)];
            if (a.path_index != b.path_index || group_of(a) == group_of(b))
                continue;
            const double denom = std::sqrt(std::max(fim(i, i), 1e-300) *
                                           std::max(fim(j, j), 1e-300));
            worst = std::max(worst, std::abs(fim(i, j)) / denom);
        }
    return worst;
}

std::vector<Path> random_separated_paths(Rng& rng, std::size_t count, const ChannelConfig& cfg) {
    // azimuths away from the array axis so every path keeps an active
    // azimuth tangent, split into disjoint sectors for identifiability
    std::vector<Path> paths;
    const double lo = 0.35, hi = 2.75;
    const double width = (hi - lo) / static_cast<double>(count);
    const bool wideband = cfg.n_f() > 1;
    const double span = wideband ? 1.0 / cfg.grid.subcarrier_spacing() : 1.0;
    for (std::size_t n = 0; n < count; ++n) {
        Path p;
        const double az = lo + width * (static_cast<double>(n) + 0.15 + 0.7 * rng.uniform());
        const double el = rng.uniform(-0.35, 0.35);
        p.doa = Direction(az + rng.uniform(-0.05, 0.05), el);
        p.dod = Direction(az, rng.uniform(-0.35, 0.35));
        p.delay = wideband
                      ? span * (static_cast<double>(n) + 0.2 + 0.6 * rng.uniform()) /
                            static_cast<double>(count)
                      : 0.0;
        p.gain = std::polar(rng.uniform(0.5, 1.5), rng.uniform(0.0, 2.0 * 3.14159265358979));
        paths.push_back(p);
    }
    return paths;
}

Eigen::MatrixXcd random_complex_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXcd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            m(i, j) = rng.complex_normal();
    return m;
}

Eigen::MatrixXcd random_unitary(Rng& rng, Eigen::Index n) {
    const Eigen::MatrixXcd g = random_complex_matrix(rng, n, n);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ();
    return q;
}

} // namespace

nlohmann::json run_crb_validation(const ExperimentConfig& cfg) {
    const std::size_t cases = std::max<std::size_t>(1, cfg.n_trials);
    std::vector<PropertyReport> reports;

    // scenario used for the geometry-sensitive checks
    ScenarioSpec scenario;
    if (!cfg.scenarios.empty()) {
        scenario = cfg.scenarios.front();
    } else {
        scenario.name = "default";
        scenario.tx = ArraySpec{"ula", 16, 0.5, Vec3{1, 0, 0}, {}, true};
        scenario.rx = ArraySpec{"ula", 2, 0.5, Vec3{1, 0, 0}, {}, true};
        scenario.fc_hz = 28e9;
        scenario.n_f = 4;
        scenario.spacing_hz = 15e6;
        scenario.generator = ClusterGenConfig{};
    }
    const ChannelConfig channel_cfg = build_channel_config(scenario);
    const double sigma2 = 0.01;
    const ObservationModel identity_obs =
        make_identity_observation(channel_cfg.dim(), sigma2);

    // 1. analytic Jacobian against central finite differences
    {
        PropertyReport r;
        r.name = "jacobian_matches_finite_differences";
        double worst = 0.0;
        for (std::size_t c = 0; c < std::min<std::size_t>(cases, 50); ++c) {
            Rng rng(derive_seed(cfg.master_seed, {0x6a6163ULL, c}));
            const auto paths = random_separated_paths(rng, 1 + c % 3, channel_cfg);
            const ParamLayout layout = make_param_layout(paths, channel_cfg);
            const Eigen::MatrixXcd analytic = channel_jacobian(paths, channel_cfg, layout);
            const Eigen::MatrixXcd numeric =
                finite_difference_jacobian(paths, channel_cfg, layout, 1e-6);
            for (Eigen::Index col = 0; col < analytic.cols(); ++col) {
                const double denom = std::max(analytic.col(col).norm(), 1e-300);
                worst = std::max(worst, (analytic.col(col) - numeric.col(col)).norm() / denom);
            }
        }
        r.deviation = worst;
        r.pass = worst < 1e-6;
        r.details = "max relative column error";
        reports.push_back(r);
    }

    // 2. within-path parameter orthogonality on the centered scenario
    {
        PropertyReport r;
        r.name = "fim_within_path_orthogonality";
        double worst = 0.0;
        for (std::size_t c = 0; c < std::min<std::size_t>(cases, 20); ++c) {
            Rng rng(derive_seed(cfg.master_seed, {0x6f7274ULL, c}));
            const auto paths = random_separated_paths(rng, 1 + c % 2, channel_cfg);
            const ParamLayout layout = make_param_layout(paths, channel_cfg);
            const Eigen::MatrixXcd jac = channel_jacobian(paths, channel_cfg, layout);
            const Eigen::MatrixXd fim = fisher_matrix(jac, identity_obs);
            worst = std::max(worst, max_cross_group_correlation(fim, layout));
        }
        r.deviation = worst;
        r.pass = worst < 1e-8;
        r.details = "max within-path cross-group correlation, centered arrays";
        reports.push_back(r);
    }

    // 3. negative control: the same check must fail once centering is broken
    {
        PropertyReport r;
        r.name = "fim_orthogonality_uncentered_negative_control";
        ScenarioSpec shifted = scenario;
        shifted.tx.recenter = false;
        const ChannelConfig shifted_cfg = build_channel_config(shifted);
        const ObservationModel shifted_obs =
            make_identity_observation(shifted_cfg.dim(), sigma2);
        double worst = 0.0;
        for (std::size_t c = 0; c < std::min<std::size_t>(cases, 10); ++c) {
            Rng rng(derive_seed(cfg.master_seed, {0x756e63ULL, c}));
            const auto paths = random_separated_paths(rng, 1, shifted_cfg);
            const ParamLayout layout = make_param_layout(paths, shifted_cfg);
            const Eigen::MatrixXcd jac = channel_jacobian(paths, shifted_cfg, layout);
            const Eigen::MatrixXd fim = fisher_matrix(jac, shifted_obs);
            worst = std::max(worst, max_cross_group_correlation(fim, layout));
        }
        r.deviation = worst;
        r.pass = worst > 1e-3; // the violation must be detected
        r.details = "orthogonality violation with the transmit array shifted by one radius";
        reports.push_back(r);
    }

    // 4. closed-form CRB under the identity observation
    {
        PropertyReport r;
        r.name = "crb_equality_identity_observation";
        double worst = 0.0;
        for (std::size_t c = 0; c < std::min<std::size_t>(cases, 20); ++c) {
            Rng rng(derive_seed(cfg.master_seed, {0x637262ULL, c}));
            const auto paths = random_separated_paths(rng, 1 + c % 2, channel_cfg);
            const ParamLayout layout = make_param_layout(paths, channel_cfg);
            const Eigen::MatrixXcd jac = channel_jacobian(paths, channel_cfg, layout);
            const Eigen::MatrixXd fim = fisher_matrix(jac, identity_obs);
            const double closed_form =
                static_cast<double>(layout.size()) * sigma2 / 2.0;
            const double trace = crb_trace(jac, fim);
            worst = std::max(worst, std::abs(trace - closed_form) / closed_form);
        }
        r.deviation = worst;
        r.pass = worst < 1e-6;
        r.details = "relative error against N_theta sigma^2 / 2";
        reports.push_back(r);
    }

    // 5. lower-bound inequality over random observation matrices; equality
    //    exactly for the conformal constructions
    {
        PropertyReport r;
        r.name = "crb_lower_bound_inequality";
        // small enough that dense random observation matrices stay cheap
        ScenarioSpec small;
        small.tx = ArraySpec{"ula", 4, 0.5, Vec3{1, 0, 0}, {}, true};
        small.rx = ArraySpec{"ula", 2, 0.5, Vec3{1, 0, 0}, {}, true};
        small.fc_hz = 28e9;
        small.n_f = 2;
        small.spacing_hz = 15e6;
        small.generator = ClusterGenConfig{};
        const ChannelConfig small_cfg = build_channel_config(small);
        const Eigen::Index dim = small_cfg.dim();

        std::size_t violations = 0, equality_mismatches = 0, identifiable = 0;
        double worst_slack = 0.0;
        for (std::size_t c = 0; c < cases; ++c) {
            Rng rng(derive_seed(cfg.master_seed, {0x746831ULL, c}));
            const auto paths = random_separated_paths(rng, 1 + c % 2, small_cfg);
            const ParamLayout layout = make_param_layout(paths, small_cfg);
            const Eigen::MatrixXcd jac = channel_jacobian(paths, small_cfg, layout);
            const Eigen::Index n_theta = jac.cols();

            ObservationModel obs = make_identity_observation(dim, sigma2);
            switch (c % 5) {
            case 0:
                break; // identity
            case 1:
                obs = make_explicit_observation(random_complex_matrix(rng, dim, dim), sigma2);
                break;
            case 2:
                obs = make_explicit_observation(
                    random_complex_matrix(rng, std::max<Eigen::Index>(n_theta + 2, dim - 4), dim),
                    sigma2);
                break;
            case 3: {
                const Eigen::MatrixXcd xt = random_unitary(rng, small_cfg.n_t());
                const Eigen::MatrixXcd w = random_unitary(rng, small_cfg.n_r());
                const Eigen::MatrixXcd f =
                    Eigen::MatrixXcd::Identity(small_cfg.n_f(), small_cfg.n_f());
                obs = make_kronecker_observation(small_cfg, f, xt, w, sigma2);
                break;
            }
            case 4: {
                // M = Q U^H with U an orthonormal basis of the Jacobian column
                // space: the resource-efficient conformal construction
                Eigen::HouseholderQR<Eigen::MatrixXcd> qr(jac);
                const Eigen::MatrixXcd u =
                    Eigen::MatrixXcd(qr.householderQ()).leftCols(n_theta);
                obs = make_explicit_observation(
                    Eigen::MatrixXcd(random_unitary(rng, n_theta) * u.adjoint()), sigma2);
                break;
            }
            }

            double trace = 0.0;
            try {
                trace = crb_trace(jac, fisher_matrix(jac, obs));
            } catch (const NonIdentifiableError&) {
                continue;
            }
            ++identifiable;
            const double bound = crb_lower_bound(layout, obs);
            if (bound > trace + 1e-10 * std::max(1.0, trace)) {
                ++violations;
                worst_slack = std::max(worst_slack, bound - trace);
            }
            const CoptReport copt = check_c_opt(jac, obs);
            const bool equal = std::abs(trace - bound) <= 1e-8 * trace;
            if (copt.holds != equal)
                ++equality_mismatches;
        }
        r.deviation = static_cast<double>(violations + equality_mismatches);
        r.pass = violations == 0 && equality_mismatches == 0 && identifiable > 0;
        r.details = "identifiable cases: " + std::to_string(identifiable) +
                    ", bound violations: " + std::to_string(violations) +
                    ", equality/conformality mismatches: " + std::to_string(equality_mismatches);
        reports.push_back(r);
    }

    nlohmann::json properties = nlohmann::json::array();
    bool all_pass = true;
    for (const PropertyReport& r : reports) {
        all_pass = all_pass && r.pass;
        properties.push_back({{"name", r.name},
                              {"pass", r.pass},
                              {"deviation", r.deviation},
                              {"details", r.details}});
    }
    nlohmann::json report{{"properties", std::move(properties)}, {"all_pass", all_pass}};

    std::filesystem::create_directories(cfg.output_dir);
    auto out = open_output(cfg.output_dir / "crb_validation.json");
    out << report.dump(2) << '\n';
    return report;
}

// ---- plots -----------------------------------------------------------------

namespace {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name)
                return i;
        throw std::runtime_error("plot: csv schema error, missing column '" + name + "'");
    }
};

CsvTable read_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in)
        throw std::runtime_error("plot: cannot open " + file.string());
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ','))
            fields.push_back(field);
        if (first) {
            table.header = fields;
            first = false;
        } else {
            table.rows.push_back(fields);
        }
    }
    if (first)
        throw std::runtime_error("plot: empty csv " + file.string());
    return table;
}

std::filesystem::path plot_target(const std::filesystem::path& csv,
                                  const std::filesystem::path& out_dir,
                                  const std::string& suffix) {
    std::filesystem::path base = csv;
    base.replace_extension();
    std::string name = base.filename().string() + suffix + ".svg";
    return out_dir.empty() ? base.parent_path() / name : out_dir / name;
}

} // namespace

std::vector<std::filesystem::path> emit_plots(
    const std::vector<std::filesystem::path>& csv_files,
    const std::filesystem::path& output_dir) {
    if (!output_dir.empty())
        std::filesystem::create_directories(output_dir);

    std::vector<std::filesystem::path> written;
    for (const auto& csv : csv_files) {
        const CsvTable table = read_csv(csv);
        const std::string joined = [&] {
            std::string s;
            for (const auto& h : table.header)
                s += h + ",";
            return s;
        }();

        if (joined == "scenario,p,mean_rel_error,") {
            const std::size_t c_s = table.column("scenario");
            const std::size_t c_p = table.column("p");
            const std::size_t c_e = table.column("mean_rel_error");
            std::vector<SvgSeries> series;
            std::map<std::string, std::size_t> index;
            for (const auto& row : table.rows) {
                auto [it, inserted] = index.try_emplace(row[c_s], series.size());
                if (inserted)
                    series.push_back(SvgSeries{row[c_s], {}, {}});
                series[it->second].x.push_back(std::stod(row[c_p]));
                series[it->second].y.push_back(std::stod(row[c_e]));
            }
            const auto target = plot_target(csv, output_dir, "");
            write_line_chart_svg(target, "relative bias vs p", "virtual paths p",
                                 "mean relative error", series, true);
            written.push_back(target);
        } else if (joined == "S,snr_db,p,method,mean_rel_error,") {
            const std::size_t c_svals = table.column("S");
            const std::size_t c_snr = table.column("snr_db");
            const std::size_t c_p = table.column("p");
            const std::size_t c_m = table.column("method");
            const std::size_t c_e = table.column("mean_rel_error");
            std::map<std::string, std::map<std::string, SvgSeries>> by_s;
            for (const auto& row : table.rows) {
                const std::string key = row[c_m] + ", " + row[c_snr] + " dB";
                auto& series = by_s[row[c_svals]][key];
                series.label = key;
                series.x.push_back(std::stod(row[c_p]));
                series.y.push_back(std::stod(row[c_e]));
            }
            for (const auto& [s_value, series_map] : by_s) {
                std::vector<SvgSeries> series;
                for (const auto& [_, s] : series_map)
                    series.push_back(s);
                const auto target = plot_target(csv, output_dir, "_S" + s_value);
                write_line_chart_svg(target, "relative error vs p (S=" + s_value + ")",
                                     "virtual paths p", "mean relative error", series, true);
                written.push_back(target);
            }
            if (by_s.empty()) { // header-only file still produces one empty chart
                const auto target = plot_target(csv, output_dir, "");
                write_line_chart_svg(target, "relative error vs p", "virtual paths p",
                                     "mean relative error", {}, true);
                written.push_back(target);
            }
        } else {
            throw std::runtime_error(
                "plot: unsupported csv schema in " + csv.string() +
                " (expected scenario,p,mean_rel_error or S,snr_db,p,method,mean_rel_error)");
        }
    }
    return written;
}

} // namespace chestlab
