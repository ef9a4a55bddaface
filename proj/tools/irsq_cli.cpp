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

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <string>

#include "irsq/baseline.hpp"
#include "irsq/channel.hpp"
#include "irsq/harness.hpp"
#include "irsq/pilot_design.hpp"
#include "irsq/squint.hpp"
#include "irsq/tsomp.hpp"

using namespace irsq;

namespace
{
    struct Common
    {
        std::uint64_t seed = 1;
        std::string config;
        SystemConfig cfg;
    };

    void add_system_options(CLI::App *sub, Common &c)
    {
        sub->add_option("--seed", c.seed, "random seed");
        sub->add_option("--config", c.config, "key = value file with system parameters");
        sub->add_option("--M", c.cfg.M, "IRS elements");
        sub->add_option("--Np", c.cfg.Np, "subcarriers");
        sub->add_option("--W", c.cfg.W, "bandwidth [Hz]");
        sub->add_option("--fc", c.cfg.fc, "carrier frequency [Hz]");
        sub->add_option("--Ns", c.cfg.Ns, "training symbols");
        sub->add_option("--Np1", c.cfg.Np1, "pilot subcarriers");
        sub->add_option("--Nd", c.cfg.Nd, "angular grid size");
        sub->add_option("--Ntau", c.cfg.Ntau, "delay grid size");
        sub->add_option("--Ttau", c.cfg.Ttau, "maximum delay [s]");
        sub->add_option("--zeta", c.cfg.zeta, "greedy stop threshold");
    }

    // Values from --config are applied first; explicit flags win.
    SystemConfig resolve(CLI::App *sub, const Common &c)
    {
        SystemConfig cfg = c.cfg;
        if (!c.config.empty())
        {
            std::ifstream in(c.config);
            if (!in)
                throw Error("cannot open config file '" + c.config + "'");
            SystemConfig from_file;
            std::string line;
            while (std::getline(in, line))
            {
                if (auto hash = line.find('#'); hash != std::string::npos)
                    line.erase(hash);
                const auto eq = line.find('=');
                if (line.find_first_not_of(" \t\r") == std::string::npos)
                    continue;
                if (eq == std::string::npos)
                    throw Error("config: expected 'key = value' in '" + line + "'");
                auto trim = [](std::string s)
                {
                    const auto b = s.find_first_not_of(" \t\r");
                    const auto e = s.find_last_not_of(" \t\r");
                    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
                };
                apply_system_key(from_file, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
            }
            for (const char *key : {"M", "Np", "W", "fc", "Ns", "Np1", "Nd", "Ntau", "Ttau", "zeta"})
            {
                if (sub->count(std::string("--") + key))
                    continue;
                const std::string k = key;
                if (k == "M") cfg.M = from_file.M;
                else if (k == "Np") cfg.Np = from_file.Np;
                else if (k == "W") cfg.W = from_file.W;
                else if (k == "fc") cfg.fc = from_file.fc;
                else if (k == "Ns") cfg.Ns = from_file.Ns;
                else if (k == "Np1") cfg.Np1 = from_file.Np1;
                else if (k == "Nd") cfg.Nd = from_file.Nd;
                else if (k == "Ntau") cfg.Ntau = from_file.Ntau;
                else if (k == "Ttau") cfg.Ttau = from_file.Ttau;
                else if (k == "zeta") cfg.zeta = from_file.zeta;
            }
        }
        cfg.validate();
        return cfg;
    }

    std::vector<CascadedPath> load_scenario(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw Error("cannot open scenario file '" + path + "'");
        return read_scenario_csv(in);
    }

    std::ostream &open_out(const std::string &path, std::unique_ptr<std::ofstream> &holder)
    {
        if (path.empty() || path == "-")
            return std::cout;
        holder = std::make_unique<std::ofstream>(path);
        if (!*holder)
            throw Error("cannot write '" + path + "'");
        return *holder;
    }

    void write_sweep_metadata(const std::string &path, const ExperimentConfig &ec)
    {
        std::ofstream os(path);
        if (!os)
            throw Error("cannot write '" + path + "'");
        const auto &c = ec.cfg;
        os << std::setprecision(12);
        os << "snr_definition = per observation, mean |theta^T h|^2 of the noise-free pilots over noise variance\n";
        os << "snr_db = " << ec.snr_db << "\n";
        os << "sweep = " << to_string(ec.sweep) << "\n";
        os << "pilots = " << to_string(ec.pilot_mode) << "\n";
        os << "zeta = " << (ec.auto_zeta ? "auto" : std::to_string(c.zeta)) << "\n";
        os << "zeta_scale = " << ec.zeta_scale << "\n";
        os << "nmse = ratio of summed squared error to summed reference energy over successful trials\n";
        os << "trials = " << ec.trials << "\nseed = " << ec.seed << "\nL1 = " << ec.L1 << "\nL2 = " << ec.L2 << "\n";
        os << "M = " << c.M << "\nNp = " << c.Np << "\nW = " << c.W << "\nfc = " << c.fc << "\nNs = " << c.Ns
           << "\nNp1 = " << c.Np1 << "\nNd = " << c.Nd << "\nNtau = " << c.Ntau << "\nTtau = " << c.Ttau << "\n";
        os << "delay_noise_scale = " << c.delay_noise_scale << "\n";
        os << "refine_aliases = " << (c.refine_aliases ? "true" : "false") << "\n";
        os << "refine_delays = " << (c.refine_delays ? "true" : "false") << "\n";
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"irsq: wideband IRS channel estimation under beam squint"};
    app.require_subcommand(1);

    // scenario
    Common sc;
    int L1 = 2, L2 = 3;
    std::string sc_out;
    auto *scenario = app.add_subcommand("scenario", "draw a random on-grid cascaded channel");
    add_system_options(scenario, sc);
    scenario->add_option("--L1", L1, "BS-IRS paths");
    scenario->add_option("--L2", L2, "IRS-user paths");
    scenario->add_option("-o,--out", sc_out, "output CSV (default stdout)");

    // correlate
    Common co;
    std::string co_in, co_out, co_sub = "30,60,90,120";
    int co_grid = 1024;
    auto *correlate = app.add_subcommand("correlate", "correlation scan |a^H((1+f/fc)x) h(f)| over x in [-1, 1)");
    add_system_options(correlate, co);
    correlate->add_option("--scenario", co_in, "scenario CSV")->required();
    correlate->add_option("--subcarriers", co_sub, "comma-separated subcarrier indices");
    correlate->add_option("--grid", co_grid, "number of scan points");
    correlate->add_option("-o,--out", co_out, "output CSV (default stdout)");

    // estimate
    Common es;
    std::string es_in, es_pilots = "2,20,26,43,67,91", es_method = "tsomp", es_paths, es_nmse;
    std::uint64_t schedule_seed = 0;
    double es_snr = std::numeric_limits<double>::infinity();
    auto *estimate = app.add_subcommand("estimate", "estimate the cascaded channel from simulated pilots");
    add_system_options(estimate, es);
    estimate->add_option("--scenario", es_in, "scenario CSV")->required();
    estimate->add_option("--schedule-seed", schedule_seed, "reflection schedule seed (default: --seed)");
    estimate->add_option("--pilots", es_pilots, "comma-separated pilot subcarrier indices");
    estimate->add_option("--method", es_method, "tsomp or baseline")->check(CLI::IsMember({"tsomp", "baseline"}));
    estimate->add_option("--snr", es_snr, "per-observation SNR [dB]; omitted = noiseless");
    estimate->add_option("--paths-out", es_paths, "recovered path CSV (default stdout)");
    estimate->add_option("--nmse-out", es_nmse, "per-subcarrier NMSE CSV");

    // design-pilots
    Common dp;
    CrossEntropyParams ce;
    std::string dp_trace;
    auto *design = app.add_subcommand("design-pilots", "cross-entropy pilot placement");
    add_system_options(design, dp);
    design->add_option("--Nc", ce.Nc, "candidates per iteration");
    design->add_option("--Ne", ce.Ne, "elites per iteration");
    design->add_option("--Niter", ce.Niter, "iterations");
    design->add_flag("!--no-elitism", ce.elitism, "do not re-inject the best candidate");
    design->add_option("--trace", dp_trace, "write iteration,best_mu CSV");

    // sweep
    std::string sw_config, sw_out;
    std::uint64_t sw_seed = 0;
    int sw_threads = -1;
    auto *sweep = app.add_subcommand("sweep", "Monte Carlo NMSE sweep from a key = value file");
    sweep->add_option("--config", sw_config, "experiment file")->required();
    sweep->add_option("--seed", sw_seed, "overrides the file's seed");
    sweep->add_option("--threads", sw_threads, "worker threads (0 = all cores)");
    sweep->add_option("-o,--out", sw_out, "output CSV (default stdout); settings go to <out>.meta");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        return app.exit(e);
    }

    try
    {
        std::cout << std::setprecision(12);
        std::unique_ptr<std::ofstream> holder;

        if (*scenario)
        {
            const SystemConfig cfg = resolve(scenario, sc);
            auto &os = open_out(sc_out, holder);
            write_scenario_csv(os, generate_scenario(cfg, L1, L2, sc.seed));
        }
        else if (*correlate)
        {
            const SystemConfig cfg = resolve(correlate, co);
            const auto paths = load_scenario(co_in);
            std::map<int, CVector> hs;
            for (int n : parse_index_list(co_sub))
            {
                if (n < 0 || n >= cfg.Np)
                    throw Error("subcarrier " + std::to_string(n) + " outside [0, Np)");
                hs[n] = channel_response(paths, cfg.subcarrier_frequency(n), cfg);
            }
            auto &os = open_out(co_out, holder);
            os << std::setprecision(12) << "subcarrier,x,magnitude\n";
            for (const auto &t : scan(hs, co_grid, cfg))
                for (std::size_t k = 0; k < t.grid.size(); ++k)
                    os << t.subcarrier_index << ',' << t.grid[k] << ',' << t.magnitude[k] << '\n';
        }
        else if (*estimate)
        {
            SystemConfig cfg = resolve(estimate, es);
            const auto truth = load_scenario(es_in);
            const std::vector<int> pilots = parse_index_list(es_pilots);
            validate_pilots(pilots, cfg.Np);
            cfg.Np1 = static_cast<int>(pilots.size());
            const auto theta =
                generate_reflection_schedule(cfg, estimate->count("--schedule-seed") ? schedule_seed : es.seed);

            CVector y = observe_pilots(truth, theta, pilots, cfg);
            if (std::isfinite(es_snr))
            {
                cfg.noise_power = noise_power_for_snr(y, es_snr);
                y = add_noise(y, cfg.noise_power, es.seed);
                if (!estimate->count("--zeta"))
                    cfg.zeta = noise_calibrated_zeta(y, cfg.noise_power, cfg.Np1, 4.0);
            }
            const ChannelEstimate est =
                es_method == "tsomp" ? tsomp_estimate(y, theta, pilots, cfg) : baseline_estimate(y, theta, pilots, cfg);

            auto &os = open_out(es_paths, holder);
            write_scenario_csv(os, est.paths());

            if (!es_nmse.empty())
            {
                std::ofstream nm(es_nmse);
                if (!nm)
                    throw Error("cannot write '" + es_nmse + "'");
                nm << std::setprecision(12) << "subcarrier,nmse\n";
                const CMatrix h = channel_response_all(truth, cfg);
                for (int n = 0; n < cfg.Np; ++n)
                    nm << n << ',' << nmse(est.h.col(n), h.col(n)) << '\n';
            }
        }
        else if (*design)
        {
            const SystemConfig cfg = resolve(design, dp);
            ce.seed = dp.seed;
            const PilotDesignResult res = cross_entropy_design(cfg, ce);
            for (std::size_t i = 0; i < res.pilots.indices.size(); ++i)
                std::cout << (i ? "," : "") << res.pilots.indices[i];
            std::cout << "\nobjective " << res.objective << '\n';
            if (!dp_trace.empty())
            {
                std::ofstream tr(dp_trace);
                if (!tr)
                    throw Error("cannot write '" + dp_trace + "'");
                tr << std::setprecision(12) << "iteration,best_mu\n";
                for (std::size_t i = 0; i < res.best_trace.size(); ++i)
                    tr << i << ',' << res.best_trace[i] << '\n';
            }
        }
        else if (*sweep)
        {
            std::ifstream in(sw_config);
            if (!in)
                throw Error("cannot open config file '" + sw_config + "'");
            ExperimentConfig ec = parse_experiment_config(in);
            if (sweep->count("--seed"))
                ec.seed = sw_seed;
            if (sw_threads >= 0)
                ec.threads = sw_threads;
            const auto rows = run_experiment(ec);
            auto &os = open_out(sw_out, holder);
            write_metrics_csv(os, rows);
            if (!sw_out.empty() && sw_out != "-")
                write_sweep_metadata(sw_out + ".meta", ec);
        }
    }
    catch (const std::exception &e)
    {
        std::cerr << "irsq: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
