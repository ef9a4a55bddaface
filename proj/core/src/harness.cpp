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

#include "irsq/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "irsq/baseline.hpp"
#include "irsq/channel.hpp"
#include "irsq/squint.hpp"

namespace irsq
{
    double nmse(const CMatrix &est, const CMatrix &truth)
    {
        NmseAccumulator acc;
        acc.add(est, truth);
        return acc.value();
    }

    void NmseAccumulator::add(const CMatrix &est, const CMatrix &truth)
    {
        if (est.rows() != truth.rows() || est.cols() != truth.cols())
            throw Error("nmse: shape mismatch");
        error += (est - truth).squaredNorm();
        energy += truth.squaredNorm();
    }

    double NmseAccumulator::value() const
    {
        if (energy == 0.0)
            throw Error("nmse: reference is identically zero");
        return error / energy;
    }

    namespace
    {
        std::uint64_t splitmix64(std::uint64_t x)
        {
            x += 0x9e3779b97f4a7c15ULL;
            x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
            x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
            return x ^ (x >> 31);
        }

        Complex complex_normal(std::mt19937_64 &rng, double variance)
        {
            std::normal_distribution<double> g(0.0, std::sqrt(variance / 2.0));
            const double re = g(rng);
            const double im = g(rng);
            return {re, im};
        }
    } // namespace

    std::vector<CascadedPath> generate_scenario(const SystemConfig &cfg, int L1, int L2, std::uint64_t seed)
    {
        if (L1 < 1 || L2 < 1)
            throw Error("generate_scenario: L1 and L2 must be >= 1");
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<int> angle_idx(0, cfg.Nd / 2 - 1);
        std::uniform_int_distribution<int> delay_idx(0, (cfg.Ntau + 1) / 2 - 1);

        auto draw = [&](int count)
        {
            std::vector<HopPath> hops(count);
            for (auto &h : hops)
            {
                h.norm_angle = -0.5 + 2.0 * angle_idx(rng) / cfg.Nd;
                h.delay = delay_idx(rng) * cfg.delay_step();
                h.gain = complex_normal(rng, 1.0);
            }
            return hops;
        };
        const auto bs_irs = draw(L1);
        const auto irs_user = draw(L2);
        return compose_cascade(bs_irs, irs_user, cfg.fc);
    }

    CVector add_noise(const CVector &y, double noise_power, std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        CVector out = y;
        if (noise_power > 0.0)
            for (Eigen::Index i = 0; i < out.size(); ++i)
                out(i) += complex_normal(rng, noise_power);
        return out;
    }

    double noise_power_for_snr(const CVector &clean, double snr_db)
    {
        if (clean.size() == 0)
            throw Error("noise_power_for_snr: empty observation");
        const double signal = clean.squaredNorm() / static_cast<double>(clean.size());
        return signal / std::pow(10.0, snr_db / 10.0);
    }

    double noise_calibrated_zeta(const CVector &y_bar, double noise_power, int Np1, double scale, double min_zeta)
    {
        const double y2 = y_bar.squaredNorm();
        if (y2 == 0.0 || noise_power <= 0.0)
            return min_zeta;
        return std::max(min_zeta, scale * Np1 * noise_power / y2);
    }

    std::string to_string(Method m) { return m == Method::TsOmp ? "tsomp" : "baseline"; }

    std::string to_string(SweepVariable s)
    {
        switch (s)
        {
        case SweepVariable::SnrDb: return "snr_db";
        case SweepVariable::Bandwidth: return "bandwidth";
        case SweepVariable::Ns: return "ns";
        case SweepVariable::Np1: return "np1";
        }
        return "?";
    }

    std::string to_string(PilotMode p)
    {
        switch (p)
        {
        case PilotMode::Designed: return "designed";
        case PilotMode::RandomFeasible: return "random";
        case PilotMode::RandomUnconstrained: return "unconstrained";
        case PilotMode::Fixed: return "fixed";
        }
        return "?";
    }

    void ExperimentConfig::validate() const
    {
        cfg.validate();
        if (trials < 1)
            throw Error("experiment: trials must be >= 1");
        if (values.empty())
            throw Error("experiment: sweep has no values");
        if (methods.empty())
            throw Error("experiment: no methods selected");
        if (L1 < 1 || L2 < 1)
            throw Error("experiment: L1 and L2 must be >= 1");
        if (pilot_mode == PilotMode::Fixed)
        {
            validate_pilots(fixed_pilots, cfg.Np);
            if (sweep == SweepVariable::Np1)
                throw Error("experiment: a fixed pilot list cannot be combined with an Np1 sweep");
        }
        if (pilot_mode == PilotMode::Designed)
            ce.validate();
    }

    std::uint64_t trial_seed(std::uint64_t base, int trial)
    {
        return splitmix64(splitmix64(base) ^ static_cast<std::uint64_t>(trial));
    }

    namespace
    {
        CMatrix true_z(std::span<const CascadedPath> paths, const AngularGrid &grid, const SystemConfig &cfg,
                       std::vector<int> &indices)
        {
            CMatrix z = CMatrix::Zero(grid.size, cfg.Np);
            std::set<int> seen;
            for (const auto &p : paths)
            {
                const double a = grid.squint ? p.eq_angle : fold_no_squint(p.eq_angle);
                const int idx = grid.nearest_index(a);
                if (idx < 0)
                    throw Error("scenario angle outside the estimator grid");
                if (seen.insert(idx).second)
                    indices.push_back(idx);
                for (int n = 0; n < cfg.Np; ++n)
                    z(idx, n) += p.eq_gain * unit_phasor_product(cfg.subcarrier_frequency(n), p.eq_delay);
            }
            return z;
        }

        int delay_index(double tau, const SystemConfig &cfg)
        {
            const long k = std::lround(tau / cfg.delay_step());
            return static_cast<int>(std::clamp<long>(k, 0, cfg.Ntau - 1));
        }
    } // namespace

    TrialResult run_trial(const SystemConfig &cfg, Method method, const std::vector<int> &pilots, double snr_db,
                          std::uint64_t seed, int L1, int L2, bool auto_zeta, double zeta_scale)
    {
        TrialResult res;
        res.truth = generate_scenario(cfg, L1, L2, splitmix64(seed ^ 0x1111));
        const ReflectionSchedule theta = generate_reflection_schedule(cfg, splitmix64(seed ^ 0x2222));
        const CVector clean = observe_pilots(res.truth, theta, pilots, cfg);

        SystemConfig c = cfg;
        c.Np1 = static_cast<int>(pilots.size());
        CVector y = clean;
        if (std::isfinite(snr_db))
        {
            c.noise_power = noise_power_for_snr(clean, snr_db);
            y = add_noise(clean, c.noise_power, splitmix64(seed ^ 0x3333));
        }
        else
            c.noise_power = 0.0;
        if (auto_zeta)
            c.zeta = noise_calibrated_zeta(y, c.noise_power, c.Np1, zeta_scale);

        const AngularGrid grid = method == Method::TsOmp ? AngularGrid::extended(c.Nd) : AngularGrid::folded(c.Nd);
        try
        {
            BlockMeasurement meas = build_measurement(theta, pilots, c, grid);
            meas.y_bar = y;
            AngleSupport support = stage1_angle_recovery(meas, c);
            if (c.refine_aliases)
                support = refine_angle_support(meas, support, c);
            res.estimate = complete_estimate(meas, support, c);

            const CMatrix h_true = channel_response_all(res.truth, c);
            res.h.add(res.estimate.h, h_true);

            std::vector<int> true_indices;
            const CMatrix z_true = true_z(res.truth, grid, c, true_indices);
            res.z.add(res.estimate.z_all_subcarriers(c), z_true);

            // Delay/gain stage with the angular support known.
            const ChannelEstimate known = complete_estimate(meas, make_support(true_indices, grid), c);
            const int Na = static_cast<int>(true_indices.size());
            CMatrix c_true = CMatrix::Zero(c.Ntau, Na);
            CMatrix c_est = CMatrix::Zero(c.Ntau, Na);
            for (int i = 0; i < Na; ++i)
            {
                for (const auto &p : res.truth)
                {
                    const double a = grid.squint ? p.eq_angle : fold_no_squint(p.eq_angle);
                    if (grid.nearest_index(a) == true_indices[i])
                        c_true(delay_index(p.eq_delay, c), i) += p.eq_gain;
                }
                const auto &dg = known.per_angle[i];
                for (std::size_t j = 0; j < dg.delay_indices.size(); ++j)
                    c_est(dg.delay_indices[j], i) += dg.gains[j];
            }
            res.c.add(c_est, c_true);
        }
        catch (const Error &e)
        {
            res.ok = false;
            res.error = e.what();
        }
        return res;
    }

    namespace
    {
        SystemConfig config_for(const ExperimentConfig &ec, double value, double &snr)
        {
            SystemConfig c = ec.cfg;
            snr = ec.snr_db;
            switch (ec.sweep)
            {
            case SweepVariable::SnrDb: snr = value; break;
            case SweepVariable::Bandwidth: c.W = value; break;
            case SweepVariable::Ns: c.Ns = static_cast<int>(std::lround(value)); break;
            case SweepVariable::Np1: c.Np1 = static_cast<int>(std::lround(value)); break;
            }
            c.validate();
            return c;
        }

        template <class F>
        void parallel_for(int count, int threads, F &&body)
        {
            int n = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
            n = std::clamp(n, 1, std::max(1, count));
            if (n == 1)
            {
                for (int i = 0; i < count; ++i)
                    body(i);
                return;
            }
            std::atomic<int> next{0};
            std::vector<std::thread> pool;
            for (int t = 0; t < n; ++t)
                pool.emplace_back([&]
                                  {
                                      for (int i = next++; i < count; i = next++)
                                          body(i);
                                  });
            for (auto &th : pool)
                th.join();
        }
    } // namespace

    std::vector<MetricsRow> run_experiment(const ExperimentConfig &ec)
    {
        ec.validate();
        std::vector<MetricsRow> rows;
        for (double value : ec.values)
        {
            double snr = 0.0;
            const SystemConfig c = config_for(ec, value, snr);

            std::vector<int> shared_pilots;
            if (ec.pilot_mode == PilotMode::Designed)
                shared_pilots = cross_entropy_design(c, ec.ce).pilots.indices;
            else if (ec.pilot_mode == PilotMode::Fixed)
                shared_pilots = ec.fixed_pilots;

            for (Method m : ec.methods)
            {
                std::vector<TrialResult> results(ec.trials);
                parallel_for(ec.trials, ec.threads, [&](int t)
                             {
                                 const std::uint64_t s = trial_seed(ec.seed, t);
                                 std::vector<int> pilots = shared_pilots;
                                 SystemConfig ct = c;
                                 if (ec.pilot_mode == PilotMode::RandomFeasible ||
                                     ec.pilot_mode == PilotMode::RandomUnconstrained)
                                 {
                                     std::mt19937_64 rng(splitmix64(s ^ 0x4444));
                                     pilots = random_pilots(c, rng, ec.pilot_mode == PilotMode::RandomFeasible).indices;
                                 }
                                 ct.Np1 = static_cast<int>(pilots.size());
                                 results[t] = run_trial(ct, m, pilots, snr, s, ec.L1, ec.L2, ec.auto_zeta,
                                                        ec.zeta_scale);
                                 // Keep memory flat across long sweeps.
                                 results[t].estimate = ChannelEstimate{};
                             });

                MetricsRow row;
                row.sweep_value = value;
                row.method = m;
                row.trials = ec.trials;
                row.pilots = shared_pilots;
                NmseAccumulator h, z, cc;
                for (const auto &r : results)
                {
                    if (!r.ok)
                    {
                        ++row.failed;
                        continue;
                    }
                    h.merge(r.h);
                    z.merge(r.z);
                    cc.merge(r.c);
                }
                const double nan = std::numeric_limits<double>::quiet_NaN();
                row.nmse_h = h.energy > 0.0 ? h.value() : nan;
                row.nmse_z = z.energy > 0.0 ? z.value() : nan;
                row.nmse_c = cc.energy > 0.0 ? cc.value() : nan;
                rows.push_back(row);
            }
        }
        return rows;
    }

    void write_metrics_csv(std::ostream &os, const std::vector<MetricsRow> &rows)
    {
        os << "sweep,method,nmse_h,nmse_z,nmse_c,trials,failed\n";
        os << std::setprecision(10);
        for (const auto &r : rows)
            os << r.sweep_value << ',' << to_string(r.method) << ',' << r.nmse_h << ',' << r.nmse_z << ','
               << r.nmse_c << ',' << r.trials << ',' << r.failed << '\n';
    }

    namespace
    {
        std::string trim(const std::string &s)
        {
            const auto b = s.find_first_not_of(" \t\r\n");
            if (b == std::string::npos)
                return {};
            const auto e = s.find_last_not_of(" \t\r\n");
            return s.substr(b, e - b + 1);
        }

        double to_number(const std::string &key, const std::string &v)
        {
            try
            {
                std::size_t used = 0;
                double x = std::stod(v, &used);
                if (trim(v.substr(used)).empty())
                    return x;
            }
            catch (const std::exception &)
            {
            }
            throw Error("config: '" + key + "' expects a number, got '" + v + "'");
        }

        int to_int(const std::string &key, const std::string &v)
        {
            const double x = to_number(key, v);
            if (x != std::floor(x))
                throw Error("config: '" + key + "' expects an integer, got '" + v + "'");
            return static_cast<int>(x);
        }

        bool to_bool(const std::string &key, const std::string &v)
        {
            if (v == "true" || v == "1" || v == "on" || v == "yes")
                return true;
            if (v == "false" || v == "0" || v == "off" || v == "no")
                return false;
            throw Error("config: '" + key + "' expects a boolean, got '" + v + "'");
        }
    } // namespace

    std::vector<double> parse_number_list(const std::string &s)
    {
        std::vector<double> out;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ','))
        {
            item = trim(item);
            if (!item.empty())
                out.push_back(to_number("list", item));
        }
        return out;
    }

    std::vector<int> parse_index_list(const std::string &s)
    {
        std::vector<int> out;
        for (double x : parse_number_list(s))
        {
            if (x != std::floor(x))
                throw Error("index list contains a non-integer");
            out.push_back(static_cast<int>(x));
        }
        return out;
    }

    void apply_system_key(SystemConfig &cfg, const std::string &key, const std::string &value)
    {
        if (key == "M") cfg.M = to_int(key, value);
        else if (key == "Np") cfg.Np = to_int(key, value);
        else if (key == "W") cfg.W = to_number(key, value);
        else if (key == "fc") cfg.fc = to_number(key, value);
        else if (key == "Ns") cfg.Ns = to_int(key, value);
        else if (key == "Np1") cfg.Np1 = to_int(key, value);
        else if (key == "Nd") cfg.Nd = to_int(key, value);
        else if (key == "Ntau") cfg.Ntau = to_int(key, value);
        else if (key == "Ttau") cfg.Ttau = to_number(key, value);
        else if (key == "zeta") cfg.zeta = to_number(key, value);
        else if (key == "noise_power") cfg.noise_power = to_number(key, value);
        else if (key == "delay_noise_scale") cfg.delay_noise_scale = to_number(key, value);
        else if (key == "refine_aliases") cfg.refine_aliases = to_bool(key, value);
        else if (key == "refine_delays") cfg.refine_delays = to_bool(key, value);
        else throw Error("config: unknown key '" + key + "'");
    }

    void apply_config_key(ExperimentConfig &ec, const std::string &key, const std::string &value)
    {
        if (key == "zeta")
        {
            if (value == "auto")
                ec.auto_zeta = true;
            else
            {
                ec.cfg.zeta = to_number(key, value);
                ec.auto_zeta = false;
            }
        }
        else if (key == "zeta_scale") ec.zeta_scale = to_number(key, value);
        else if (key == "sweep")
        {
            static const std::map<std::string, SweepVariable> names{{"snr_db", SweepVariable::SnrDb},
                                                                    {"bandwidth", SweepVariable::Bandwidth},
                                                                    {"ns", SweepVariable::Ns},
                                                                    {"np1", SweepVariable::Np1}};
            auto it = names.find(value);
            if (it == names.end())
                throw Error("config: unknown sweep variable '" + value + "'");
            ec.sweep = it->second;
        }
        else if (key == "values") ec.values = parse_number_list(value);
        else if (key == "snr_db")
            ec.snr_db = (value == "inf" || value == "noiseless") ? std::numeric_limits<double>::infinity()
                                                                 : to_number(key, value);
        else if (key == "trials") ec.trials = to_int(key, value);
        else if (key == "methods")
        {
            ec.methods.clear();
            std::stringstream ss(value);
            std::string m;
            while (std::getline(ss, m, ','))
            {
                m = trim(m);
                if (m == "tsomp") ec.methods.push_back(Method::TsOmp);
                else if (m == "baseline") ec.methods.push_back(Method::Baseline);
                else throw Error("config: unknown method '" + m + "'");
            }
        }
        else if (key == "pilots")
        {
            if (value == "designed") ec.pilot_mode = PilotMode::Designed;
            else if (value == "random") ec.pilot_mode = PilotMode::RandomFeasible;
            else if (value == "unconstrained") ec.pilot_mode = PilotMode::RandomUnconstrained;
            else
            {
                ec.pilot_mode = PilotMode::Fixed;
                ec.fixed_pilots = parse_index_list(value);
            }
        }
        else if (key == "L1") ec.L1 = to_int(key, value);
        else if (key == "L2") ec.L2 = to_int(key, value);
        else if (key == "seed") ec.seed = static_cast<std::uint64_t>(to_number(key, value));
        else if (key == "Nc") ec.ce.Nc = to_int(key, value);
        else if (key == "Ne") ec.ce.Ne = to_int(key, value);
        else if (key == "Niter") ec.ce.Niter = to_int(key, value);
        else if (key == "ce_seed") ec.ce.seed = static_cast<std::uint64_t>(to_number(key, value));
        else if (key == "elitism") ec.ce.elitism = to_bool(key, value);
        else if (key == "threads") ec.threads = to_int(key, value);
        else apply_system_key(ec.cfg, key, value);
    }

    ExperimentConfig parse_experiment_config(std::istream &is)
    {
        ExperimentConfig ec;
        std::string line;
        int lineno = 0;
        while (std::getline(is, line))
        {
            ++lineno;
            if (auto hash = line.find('#'); hash != std::string::npos)
                line.erase(hash);
            line = trim(line);
            if (line.empty())
                continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw Error("config line " + std::to_string(lineno) + ": expected 'key = value'");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            try
            {
                apply_config_key(ec, key, value);
            }
            catch (const Error &e)
            {
                throw Error("config line " + std::to_string(lineno) + ": " + e.what());
            }
        }
        return ec;
    }

} // namespace irsq
