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

#include "irsq/channel.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

namespace irsq
{
    void SystemConfig::validate() const
    {
        auto require = [](bool ok, const char *what)
        {
            if (!ok)
                throw Error(std::string("invalid SystemConfig: ") + what);
        };
        require(M >= 1, "M must be >= 1");
        require(Np >= 1, "Np must be >= 1");
        require(W > 0.0, "W must be > 0");
        require(fc > 0.0, "fc must be > 0");
        require(Ns >= 1, "Ns must be >= 1");
        require(Np1 >= 1, "Np1 must be >= 1");
        require(Np1 <= Np, "Np1 must not exceed Np");
        require(Nd >= 2 && Nd % 2 == 0, "Nd must be a positive even integer");
        require(Ntau >= 1, "Ntau must be >= 1");
        require(Ttau > 0.0, "Ttau must be > 0");
        require(zeta > 0.0, "zeta must be > 0");
        require(noise_power >= 0.0, "noise_power must be >= 0");
        require(delay_noise_scale >= 0.0, "delay_noise_scale must be >= 0");
    }

    void validate_pilots(const std::vector<int> &pilots, int Np, int expected_count)
    {
        if (expected_count > 0 && static_cast<int>(pilots.size()) != expected_count)
            throw Error("expected " + std::to_string(expected_count) + " pilot indices, got " +
                        std::to_string(pilots.size()));
        for (std::size_t i = 0; i < pilots.size(); ++i)
        {
            if (pilots[i] < 0 || pilots[i] >= Np)
                throw Error("pilot index " + std::to_string(pilots[i]) + " outside [0, " + std::to_string(Np) + ")");
            if (i > 0 && pilots[i] == pilots[i - 1])
                throw Error("duplicate pilot index " + std::to_string(pilots[i]));
            if (i > 0 && pilots[i] < pilots[i - 1])
                throw Error("pilot indices must be sorted ascending");
        }
    }

    Complex unit_phasor(double cycles)
    {
        double frac = cycles - std::floor(cycles);
        double ph = -2.0 * kPi * frac;
        return {std::cos(ph), std::sin(ph)};
    }

    Complex unit_phasor_product(double a, double b)
    {
        const double p = a * b;
        const double err = std::fma(a, b, -p);
        return unit_phasor((p - std::floor(p)) + err);
    }

    CVector steering_vector(double eff_angle, int M)
    {
        CVector a(M);
        for (int m = 0; m < M; ++m)
            a(m) = unit_phasor(static_cast<double>(m) * eff_angle);
        return a;
    }

    double normalized_angle_from_physical(double theta_rad)
    {
        // d = lambda_c / 2
        return 0.5 * std::sin(theta_rad);
    }

    std::vector<CascadedPath> compose_cascade(std::span<const HopPath> bs_irs,
                                              std::span<const HopPath> irs_user,
                                              double fc)
    {
        if (bs_irs.empty() || irs_user.empty())
            throw Error("compose_cascade: both hop lists must be nonempty");

        std::vector<CascadedPath> out;
        out.reserve(bs_irs.size() * irs_user.size());
        for (const auto &tr : bs_irs)
        {
            Complex alpha = tr.gain * unit_phasor_product(fc, tr.delay);
            for (const auto &rr : irs_user)
            {
                Complex beta = rr.gain * unit_phasor_product(fc, rr.delay);
                out.push_back({tr.norm_angle - rr.norm_angle, alpha * beta, tr.delay + rr.delay});
            }
        }
        return out;
    }

    CVector channel_response(std::span<const CascadedPath> paths, double f, const SystemConfig &cfg)
    {
        CVector h = CVector::Zero(cfg.M);
        const double scale = 1.0 + f / cfg.fc;
        for (const auto &p : paths)
        {
            Complex coef = p.eq_gain * unit_phasor_product(f, p.eq_delay);
            h += coef * steering_vector(scale * p.eq_angle, cfg.M);
        }
        return h;
    }

    CMatrix channel_response_all(std::span<const CascadedPath> paths, const SystemConfig &cfg)
    {
        CMatrix H(cfg.M, cfg.Np);
        for (int n = 0; n < cfg.Np; ++n)
            H.col(n) = channel_response(paths, cfg.subcarrier_frequency(n), cfg);
        return H;
    }

    Complex received_symbol(const CVector &theta, const CVector &h, Complex noise)
    {
        if (theta.size() != h.size())
            throw Error("received_symbol: theta has length " + std::to_string(theta.size()) + ", h has length " +
                        std::to_string(h.size()));
        return (theta.transpose() * h).value() + noise;
    }

    ReflectionSchedule generate_reflection_schedule(const SystemConfig &cfg, std::uint64_t seed)
    {
        if (cfg.Ns < 1 || cfg.M < 1)
            throw Error("generate_reflection_schedule: Ns and M must be >= 1");
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
        ReflectionSchedule s;
        s.coeffs.resize(cfg.Ns, cfg.M);
        // Column-major fill order keeps the draw sequence fixed.
        for (int m = 0; m < cfg.M; ++m)
            for (int r = 0; r < cfg.Ns; ++r)
                s.coeffs(r, m) = std::polar(1.0, phase(rng));
        return s;
    }

    void write_scenario_csv(std::ostream &os, std::span<const CascadedPath> paths)
    {
        os << "eq_angle,eq_gain_re,eq_gain_im,eq_delay_s\n";
        os << std::setprecision(17);
        for (const auto &p : paths)
            os << p.eq_angle << ',' << p.eq_gain.real() << ',' << p.eq_gain.imag() << ',' << p.eq_delay << '\n';
    }

    std::vector<CascadedPath> read_scenario_csv(std::istream &is)
    {
        std::string line;
        if (!std::getline(is, line))
            throw Error("scenario CSV is empty");
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line != "eq_angle,eq_gain_re,eq_gain_im,eq_delay_s")
            throw Error("scenario CSV: unexpected header '" + line + "'");

        std::vector<CascadedPath> paths;
        int lineno = 1;
        while (std::getline(is, line))
        {
            ++lineno;
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            if (line.empty())
                continue;
            std::stringstream ss(line);
            std::string field;
            double v[4];
            int k = 0;
            while (std::getline(ss, field, ','))
            {
                if (k >= 4)
                    throw Error("scenario CSV line " + std::to_string(lineno) + ": too many fields");
                try
                {
                    std::size_t used = 0;
                    v[k] = std::stod(field, &used);
                    if (used != field.size())
                        throw std::invalid_argument(field);
                }
                catch (const std::exception &)
                {
                    throw Error("scenario CSV line " + std::to_string(lineno) + ": bad number '" + field + "'");
                }
                ++k;
            }
            if (k != 4)
                throw Error("scenario CSV line " + std::to_string(lineno) + ": expected 4 fields");
            paths.push_back({v[0], {v[1], v[2]}, v[3]});
        }
        return paths;
    }

} // namespace irsq
