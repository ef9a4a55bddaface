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

// End-to-end acceptance checks. One line per criterion:
//   [PASS] name: detail (seconds)
// Exit status is the number of failed criteria.
//
//   irsq_acceptance [--trials N] [--only NAME]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "irsq/baseline.hpp"
#include "irsq/channel.hpp"
#include "irsq/harness.hpp"
#include "irsq/pilot_design.hpp"
#include "irsq/squint.hpp"
#include "irsq/tsomp.hpp"

using namespace irsq;

namespace
{
    int g_trials = 200;

    struct Outcome
    {
        bool pass = true;
        std::string detail;
    };

    double db(double x) { return 10.0 * std::log10(x); }

    std::string fmt(const char *f, double a)
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, f, a);
        return buf;
    }

    const std::vector<int> kDesigned{2, 20, 26, 43, 67, 91};
    const std::vector<int> kUnconstrained{2, 4, 5, 6, 10, 12};

    CrossEntropyParams paper_ce()
    {
        CrossEntropyParams ce;
        ce.Nc = 100;
        ce.Ne = 20;
        ce.Niter = 20;
        ce.seed = 11;
        return ce;
    }

    // ---------------------------------------------------------------- fig 3
    Outcome twin_peaks()
    {
        Outcome out;
        SystemConfig cfg;
        cfg.M = 256;
        cfg.Np = 128;
        cfg.fc = 10e9;
        cfg.W = 500e6;
        const double phi = -1.0 / 6.0;
        const std::vector<CascadedPath> path{{phi, {1.0, 0.0}, 0.0}};

        std::map<int, CVector> hs;
        for (int n : {30, 60, 90, 120})
            hs[n] = channel_response(path, cfg.subcarrier_frequency(n), cfg);
        const auto traces = scan(hs, 1024, cfg);

        std::ostringstream d;
        double false30 = 0.0, false120 = 0.0;
        for (const auto &t : traces)
        {
            const auto peaks = dominant_peaks(t, 0.5);
            if (peaks.size() != 2)
            {
                out.pass = false;
                d << "n=" << t.subcarrier_index << " has " << peaks.size() << " peaks; ";
                continue;
            }
            double actual = t.grid[peaks[0]], other = t.grid[peaks[1]];
            if (std::abs(other - phi) < std::abs(actual - phi))
                std::swap(actual, other);
            if (std::abs(actual - phi) > 2.0 / 1024)
            {
                out.pass = false;
                d << "n=" << t.subcarrier_index << " actual peak at " << actual << "; ";
            }
            if (t.subcarrier_index == 30)
                false30 = other;
            if (t.subcarrier_index == 120)
                false120 = other;
        }
        if (std::abs(false30 - 0.822) > 0.005 || std::abs(false120 - 0.789) > 0.005)
            out.pass = false;
        d << "false peak " << fmt("%.4f", false30) << " (n=30) -> " << fmt("%.4f", false120) << " (n=120)";
        out.detail = d.str();
        return out;
    }

    // ------------------------------------------------------- false angle
    Outcome false_angle_formula()
    {
        Outcome out;
        SystemConfig cfg;
        cfg.fc = 10e9;
        cfg.W = 500e6;
        const int G = 1024;
        const double step = 2.0 / G;
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> mag(0.05, 0.9);
        std::bernoulli_distribution sign(0.5);

        int checked = 0;
        double worst = 0.0;
        for (int s = 0; s < 50; ++s)
        {
            const double phi = sign(rng) ? mag(rng) : -mag(rng);
            const std::vector<CascadedPath> path{{phi, {1.0, 0.0}, 0.0}};
            std::map<int, CVector> hs;
            for (int n = 0; n < cfg.Np; ++n)
                hs[n] = channel_response(path, cfg.subcarrier_frequency(n), cfg);
            for (const auto &t : scan(hs, G, cfg))
            {
                const double expected = false_angle(phi, cfg.subcarrier_frequency(t.subcarrier_index), cfg.fc);
                double best = std::numeric_limits<double>::infinity();
                for (int p : dominant_peaks(t, 0.5))
                    if (std::abs(t.grid[p] - phi) > step)
                        best = std::min(best, std::abs(t.grid[p] - expected));
                worst = std::max(worst, best / step);
                ++checked;
            }
        }
        out.pass = worst <= 1.0;
        out.detail = std::to_string(checked) + " traces, worst offset " + fmt("%.3f", worst) + " grid steps";
        return out;
    }

    // ------------------------------------------------------- exact recovery
    std::map<int, std::set<int>> true_support(const std::vector<CascadedPath> &paths, const SystemConfig &cfg)
    {
        const AngularGrid grid = AngularGrid::extended(cfg.Nd);
        std::map<int, std::set<int>> sup;
        for (const auto &p : paths)
            sup[grid.nearest_index(p.eq_angle)].insert(static_cast<int>(std::lround(p.eq_delay / cfg.delay_step())));
        return sup;
    }

    Outcome noiseless_recovery()
    {
        Outcome out;
        SystemConfig cfg;
        const int trials = std::max(g_trials, 200);
        int good = 0;
        double slowest = 0.0;
        for (int t = 0; t < trials; ++t)
        {
            const auto seed = trial_seed(303, t);
            const auto &pilots = kDesigned;
            const auto t0 = std::chrono::steady_clock::now();
            const TrialResult r = run_trial(cfg, Method::TsOmp, pilots, std::numeric_limits<double>::infinity(),
                                            seed, 2, 3);
            slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            if (!r.ok)
                continue;
            std::map<int, std::set<int>> est;
            for (const auto &dg : r.estimate.per_angle)
                est[dg.angle_index].insert(dg.delay_indices.begin(), dg.delay_indices.end());
            if (est == true_support(r.truth, cfg) && r.h.value() <= 1e-6)
                ++good;
        }
        const double rate = static_cast<double>(good) / trials;
        out.pass = rate >= 0.99 && slowest < 2.0;
        out.detail = std::to_string(good) + "/" + std::to_string(trials) + " exact, slowest trial " +
                     fmt("%.3f", slowest) + " s";
        return out;
    }

    // ------------------------------------------------------ squint robustness
    double row_value(const std::vector<MetricsRow> &rows, double x, Method m, double MetricsRow::*field)
    {
        for (const auto &r : rows)
            if (r.sweep_value == x && r.method == m)
                return r.*field;
        return std::numeric_limits<double>::quiet_NaN();
    }

    Outcome squint_robustness()
    {
        Outcome out;
        ExperimentConfig ec;
        ec.sweep = SweepVariable::Bandwidth;
        ec.values = {510e6, 20e6};
        ec.snr_db = 15.0;
        ec.trials = g_trials;
        ec.pilot_mode = PilotMode::Fixed;
        ec.fixed_pilots = kDesigned;
        ec.seed = 404;
        const auto rows = run_experiment(ec);
        const double wide = db(row_value(rows, 510e6, Method::Baseline, &MetricsRow::nmse_h)) -
                            db(row_value(rows, 510e6, Method::TsOmp, &MetricsRow::nmse_h));
        const double narrow = std::abs(db(row_value(rows, 20e6, Method::Baseline, &MetricsRow::nmse_h)) -
                                       db(row_value(rows, 20e6, Method::TsOmp, &MetricsRow::nmse_h)));
        out.pass = wide >= 10.0 && narrow <= 3.0;
        std::ostringstream d;
        d << "gap " << fmt("%.2f", wide) << " dB at 510 MHz, " << fmt("%.2f", narrow) << " dB at 20 MHz (ts-omp "
          << fmt("%.2f", db(row_value(rows, 510e6, Method::TsOmp, &MetricsRow::nmse_h))) << " / "
          << fmt("%.2f", db(row_value(rows, 20e6, Method::TsOmp, &MetricsRow::nmse_h))) << " dB)";
        out.detail = d.str();
        return out;
    }

    // --------------------------------------------------------- pilot design
    Outcome pilot_design_efficacy()
    {
        Outcome out;
        SystemConfig cfg;
        const auto design = cross_entropy_design(cfg, paper_ce());
        bool monotone = true;
        for (std::size_t i = 1; i < design.best_trace.size(); ++i)
            monotone = monotone && design.best_trace[i] <= design.best_trace[i - 1];

        ExperimentConfig ec;
        ec.cfg = cfg;
        ec.sweep = SweepVariable::SnrDb;
        ec.values = {0, 5, 10, 15, 20};
        ec.trials = g_trials;
        ec.methods = {Method::TsOmp};
        ec.seed = 505;
        ec.pilot_mode = PilotMode::Fixed;
        ec.fixed_pilots = design.pilots.indices;
        const auto designed = run_experiment(ec);
        ec.pilot_mode = PilotMode::RandomFeasible;
        const auto random = run_experiment(ec);

        std::ostringstream d;
        bool no_worse = true;
        double gain_z10 = 0.0, gain_c10 = 0.0;
        for (double snr : ec.values)
        {
            const double gz = db(row_value(random, snr, Method::TsOmp, &MetricsRow::nmse_z)) -
                              db(row_value(designed, snr, Method::TsOmp, &MetricsRow::nmse_z));
            const double gc = db(row_value(random, snr, Method::TsOmp, &MetricsRow::nmse_c)) -
                              db(row_value(designed, snr, Method::TsOmp, &MetricsRow::nmse_c));
            no_worse = no_worse && gz >= 0.0 && gc >= 0.0;
            if (snr == 10.0)
            {
                gain_z10 = gz;
                gain_c10 = gc;
            }
            d << snr << "dB:" << fmt("%+.2f", gz) << "/" << fmt("%+.2f", gc) << " ";
        }
        out.pass = monotone && no_worse && gain_z10 >= 2.0 && gain_c10 >= 2.0;
        d << "(z/c gain) trace " << (monotone ? "monotone" : "NOT monotone") << ", mu="
          << fmt("%.2f", design.objective);
        out.detail = d.str();
        return out;
    }

    // ------------------------------------------------------ span constraint
    Outcome span_constraint_necessity()
    {
        Outcome out;
        ExperimentConfig ec;
        ec.sweep = SweepVariable::SnrDb;
        ec.values = {10.0};
        ec.trials = g_trials;
        ec.methods = {Method::TsOmp};
        ec.seed = 606;
        ec.pilot_mode = PilotMode::Fixed;
        ec.fixed_pilots = kDesigned;
        const double good = row_value(run_experiment(ec), 10.0, Method::TsOmp, &MetricsRow::nmse_z);
        ec.fixed_pilots = kUnconstrained;
        const double bad = row_value(run_experiment(ec), 10.0, Method::TsOmp, &MetricsRow::nmse_z);
        out.pass = bad > good;
        out.detail = "NMSE_z " + fmt("%.2f", db(good)) + " dB (span-valid) vs " + fmt("%.2f", db(bad)) +
                     " dB (clustered)";
        return out;
    }

    // ---------------------------------------------------------- monotonicity
    Outcome monotonicity()
    {
        Outcome out;
        std::ostringstream d;
        auto check = [&](SweepVariable var, std::vector<double> values, double snr, int Ns, const char *name)
        {
            ExperimentConfig ec;
            ec.sweep = var;
            ec.values = values;
            ec.snr_db = snr;
            ec.cfg.Ns = Ns;
            ec.trials = g_trials;
            ec.methods = {Method::TsOmp};
            ec.pilot_mode = PilotMode::RandomFeasible;
            ec.seed = 707;
            const auto rows = run_experiment(ec);
            d << name << ":";
            double prev = std::numeric_limits<double>::infinity();
            for (const auto &r : rows)
            {
                d << " " << fmt("%.2f", db(r.nmse_h));
                if (!(r.nmse_h <= prev))
                    out.pass = false;
                prev = r.nmse_h;
            }
            d << " dB; ";
        };
        check(SweepVariable::Ns, {8, 16, 24, 32, 40}, 10.0, 32, "Ns@10dB");
        check(SweepVariable::Np1, {3, 4, 5, 6, 8}, 15.0, 35, "Np1@15dB");
        out.detail = d.str();
        return out;
    }

    // ------------------------------------------------------------- oracles
    Outcome oracle_equivalences()
    {
        Outcome out;
        std::ostringstream d;
        SystemConfig cfg;
        std::mt19937_64 rng(808);
        std::normal_distribution<double> g(0.0, 1.0);
        std::uniform_real_distribution<double> u(-0.5, 0.5), tau(0.0, 90e-9);

        // per-element cascaded form vs equivalent-path form
        double worst_h = 0.0;
        for (int inst = 0; inst < 20; ++inst)
        {
            std::vector<HopPath> tr(2), rr(3);
            for (auto *v : {&tr, &rr})
                for (auto &p : *v)
                    p = {{g(rng), g(rng)}, tau(rng), u(rng)};
            const auto paths = compose_cascade(tr, rr, cfg.fc);
            for (int n : {0, 37, 127})
            {
                const double f = cfg.subcarrier_frequency(n);
                const CVector h = channel_response(paths, f, cfg);
                CVector ref = CVector::Zero(cfg.M);
                for (int m = 0; m < cfg.M; ++m)
                    for (const auto &a : tr)
                        for (const auto &b : rr)
                        {
                            using ld = long double;
                            const ld fc = cfg.fc, ff = f;
                            ld cyc = (fc + ff) * (ld(a.delay) + ld(b.delay)) +
                                     ld(m) * (1.0L + ff / fc) * (ld(a.norm_angle) - ld(b.norm_angle));
                            cyc -= std::floor(cyc);
                            ref(m) += a.gain * b.gain * std::polar(1.0, static_cast<double>(-2.0L * kPi * cyc));
                        }
                worst_h = std::max(worst_h, (h - ref).norm() / ref.norm());
            }
        }
        out.pass = out.pass && worst_h <= 1e-12;
        d << "channel forms " << fmt("%.1e", worst_h) << "; ";

        // block-diagonal vs interleaved measurement
        const ReflectionSchedule theta = generate_reflection_schedule(cfg, 809);
        const BlockMeasurement meas = build_measurement(theta, kDesigned, cfg);
        CVector zbar(cfg.Np1 * cfg.Nd);
        for (Eigen::Index i = 0; i < zbar.size(); ++i)
            zbar(i) = {g(rng), g(rng)};
        const CVector lhs = meas.block_diagonal() * zbar;
        const CVector rhs = meas.F_tilde * interleave(zbar, cfg.Np1, cfg.Nd);
        const double perm = (lhs - rhs).norm() / lhs.norm();
        out.pass = out.pass && perm <= 1e-12;
        d << "permutation " << fmt("%.1e", perm) << "; ";

        // stage-2 two-atom recovery vs exhaustive pair search
        SystemConfig c2 = cfg;
        c2.zeta = 1e-9;
        const CMatrix B = build_delay_dictionary(kDesigned, c2);
        const CVector z = B.col(2) + 0.5 * B.col(9);
        double best = std::numeric_limits<double>::infinity();
        std::set<int> oracle;
        for (int a = 0; a < cfg.Ntau; ++a)
            for (int b = a + 1; b < cfg.Ntau; ++b)
            {
                CMatrix A(B.rows(), 2);
                A << B.col(a), B.col(b);
                const CVector x = A.colPivHouseholderQr().solve(z);
                const double r = (z - A * x).squaredNorm();
                if (r < best)
                {
                    best = r;
                    oracle = {a, b};
                }
            }
        const auto est = stage2_delay_gain(z, B, c2);
        const std::set<int> got(est.delay_indices.begin(), est.delay_indices.end());
        bool gains = est.gains.size() == 2;
        for (std::size_t j = 0; gains && j < 2; ++j)
            gains = std::abs(est.gains[j] - (est.delay_indices[j] == 2 ? 1.0 : 0.5)) < 1e-9;
        out.pass = out.pass && got == oracle && gains;
        d << "stage-2 support " << (got == oracle ? "matches" : "differs from") << " exhaustive oracle";
        d << (gains ? "" : " (gain mismatch)") << "; ";

        CMatrix truth(3, 2);
        truth << Complex(1, 2), Complex(-1, 0), Complex(0, 3), Complex(2, -2), Complex(0.5, 0), Complex(0, -1);
        const double self = nmse(truth, truth), zero = nmse(CMatrix::Zero(3, 2), truth);
        out.pass = out.pass && self == 0.0 && zero == 1.0;
        d << "nmse(t,t)=" << self << " nmse(0,t)=" << zero;
        out.detail = d.str();
        return out;
    }

} // namespace

int main(int argc, char **argv)
{
    std::string only;
    for (int i = 1; i < argc; ++i)
    {
        if (!std::strcmp(argv[i], "--trials") && i + 1 < argc)
            g_trials = std::atoi(argv[++i]);
        else if (!std::strcmp(argv[i], "--only") && i + 1 < argc)
            only = argv[++i];
        else
        {
            std::fprintf(stderr, "usage: %s [--trials N] [--only NAME]\n", argv[0]);
            return 2;
        }
    }

    const std::vector<std::tuple<std::string, double, std::function<Outcome()>>> criteria{
        {"twin-peaks", 5.0, twin_peaks},
        {"false-angle-formula", 30.0, false_angle_formula},
        {"noiseless-exact-recovery", 0.0, noiseless_recovery},
        {"squint-robustness", 0.0, squint_robustness},
        {"pilot-design-efficacy", 0.0, pilot_design_efficacy},
        {"span-constraint-necessity", 0.0, span_constraint_necessity},
        {"nmse-monotonicity", 0.0, monotonicity},
        {"oracle-equivalences", 0.0, oracle_equivalences},
    };

    int failed = 0;
    for (const auto &[name, budget, fn] : criteria)
    {
        if (!only.empty() && only != name)
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            o = fn();
        }
        catch (const std::exception &e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (budget > 0.0 && secs > budget)
        {
            o.pass = false;
            o.detail += " [over " + fmt("%.0f", budget) + " s budget]";
        }
        std::printf("[%s] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed;
}
