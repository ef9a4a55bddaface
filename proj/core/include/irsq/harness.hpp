// SPDX-License-Identifier: Apache-2.0
//
// irsq - wideband IRS channel estimation under beam squint
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

#ifndef IRSQ_HARNESS_HPP
#define IRSQ_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "irsq/pilot_design.hpp"
#include "irsq/tsomp.hpp"
#include "irsq/types.hpp"

namespace irsq
{
    /// sum |est - truth|^2 / sum |truth|^2. Throws on shape mismatch or an
    /// all-zero truth.
    double nmse(const CMatrix &est, const CMatrix &truth);

    // Accumulates numerator and denominator separately so that trial means
    // are ratios of sums.
    struct NmseAccumulator
    {
        double error = 0.0;
        double energy = 0.0;

        void add(const CMatrix &est, const CMatrix &truth);
        void merge(const NmseAccumulator &o)
        {
            error += o.error;
            energy += o.energy;
        }
        double value() const;
    };

    /// Random on-grid cascaded channel with L1 x L2 paths.
    ///
    /// Hop angles are uniform over the Nd/2 points -1/2 + 2u/Nd, hop delays are
    /// uniform over the first ceil(Ntau/2) delay-grid points (so every
    /// cascaded delay stays below Ttau), hop gains are CN(0, 1).
    std::vector<CascadedPath> generate_scenario(const SystemConfig &cfg, int L1, int L2, std::uint64_t seed);

    // Adds CN(0, noise_power) samples drawn from seed.
    CVector add_noise(const CVector &y, double noise_power, std::uint64_t seed);

    // Per-observation noise variance for E|theta^T h|^2 / noise = 10^(snr/10),
    // with the signal power measured on the noise-free observations.
    double noise_power_for_snr(const CVector &clean, double snr_db);

    /// zeta = scale * Np1 * noise_power / ||y_bar||^2, never below min_zeta.
    ///
    /// A pure-noise block removes about Np1 * noise_power of residual energy;
    /// scale sets the margin over that level.
    double noise_calibrated_zeta(const CVector &y_bar, double noise_power, int Np1, double scale,
                                 double min_zeta = 1e-9);

    enum class Method
    {
        TsOmp,
        Baseline
    };
    enum class SweepVariable
    {
        SnrDb,
        Bandwidth,
        Ns,
        Np1
    };
    enum class PilotMode
    {
        Designed,           // cross-entropy design per sweep value
        RandomFeasible,     // fresh span-feasible random set per trial
        RandomUnconstrained,
        Fixed
    };

    std::string to_string(Method m);
    std::string to_string(SweepVariable s);
    std::string to_string(PilotMode p);

    struct ExperimentConfig
    {
        SystemConfig cfg;
        SweepVariable sweep = SweepVariable::SnrDb;
        std::vector<double> values{0.0, 5.0, 10.0, 15.0, 20.0};
        double snr_db = 15.0;        // used when the sweep variable is not SNR; +inf = noiseless
        int trials = 100;
        std::vector<Method> methods{Method::TsOmp, Method::Baseline};
        PilotMode pilot_mode = PilotMode::Designed;
        std::vector<int> fixed_pilots;
        int L1 = 2;
        int L2 = 3;
        std::uint64_t seed = 1;
        bool auto_zeta = true;       // noise_calibrated_zeta per trial; else cfg.zeta
        double zeta_scale = 4.0;
        CrossEntropyParams ce;
        int threads = 0;             // 0 = hardware concurrency

        void validate() const;
    };

    struct MetricsRow
    {
        double sweep_value = 0.0;
        Method method = Method::TsOmp;
        double nmse_h = 0.0;
        double nmse_z = 0.0;
        double nmse_c = 0.0;
        int trials = 0;
        int failed = 0;              // trials whose estimator threw; excluded from the means
        std::vector<int> pilots;     // pilot set for designed/fixed modes, empty for random modes
    };

    /// Metrics of one simulated trial.
    struct TrialResult
    {
        bool ok = true;
        std::string error;
        NmseAccumulator h, z, c;
        ChannelEstimate estimate;
        std::vector<CascadedPath> truth;
    };

    // One trial of one method: draw scenario, schedule and noise from seed,
    // estimate, and score. snr_db = +inf gives noiseless observations.
    TrialResult run_trial(const SystemConfig &cfg, Method method, const std::vector<int> &pilots, double snr_db,
                          std::uint64_t seed, int L1 = 2, int L2 = 3, bool auto_zeta = true,
                          double zeta_scale = 4.0);

    // Derived per-trial seed; independent of the sweep value so that all sweep
    // points share their random draws.
    std::uint64_t trial_seed(std::uint64_t base, int trial);

    std::vector<MetricsRow> run_experiment(const ExperimentConfig &ec);

    // sweep,method,nmse_h,nmse_z,nmse_c,trials,failed
    void write_metrics_csv(std::ostream &os, const std::vector<MetricsRow> &rows);

    // line-oriented "key = value" configuration; '#' starts a comment.
    ExperimentConfig parse_experiment_config(std::istream &is);
    void apply_config_key(ExperimentConfig &ec, const std::string &key, const std::string &value);
    void apply_system_key(SystemConfig &cfg, const std::string &key, const std::string &value);

    std::vector<int> parse_index_list(const std::string &s);
    std::vector<double> parse_number_list(const std::string &s);

} // namespace irsq

#endif
