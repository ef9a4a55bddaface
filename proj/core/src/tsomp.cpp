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

#include "irsq/tsomp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "irsq/channel.hpp"
#include "irsq/least_squares.hpp"

namespace irsq
{
    int AngularGrid::nearest_index(double a) const
    {
        const double pos = (a - start) / step;
        const long k = std::lround(pos);
        if (k < 0 || k >= size)
            return -1;
        return static_cast<int>(k);
    }

    AngularDictionary build_angular_dictionary(int n_p, const SystemConfig &cfg)
    {
        return build_angular_dictionary(n_p, cfg, AngularGrid::extended(cfg.Nd));
    }

    AngularDictionary build_angular_dictionary(int n_p, const SystemConfig &cfg, const AngularGrid &grid)
    {
        if (n_p < 0 || n_p >= cfg.Np)
            throw Error("build_angular_dictionary: subcarrier " + std::to_string(n_p) + " outside [0, Np)");
        if (grid.size < 2)
            throw Error("build_angular_dictionary: grid needs at least 2 points");

        const double scale = grid.squint ? cfg.squint_factor(n_p) : 1.0;
        AngularDictionary dict;
        dict.subcarrier_index = n_p;
        dict.columns.resize(cfg.M, grid.size);
        for (int k = 0; k < grid.size; ++k)
            dict.columns.col(k) = steering_vector(scale * grid.angle(k), cfg.M);
        return dict;
    }

    CMatrix BlockMeasurement::block_diagonal() const
    {
        const int P = pilots();
        const int Nd = grid_size();
        CMatrix F = CMatrix::Zero(static_cast<Eigen::Index>(Ns) * P, static_cast<Eigen::Index>(Nd) * P);
        for (int k = 0; k < P; ++k)
            F.block(k * Ns, k * Nd, Ns, Nd) = per_pilot[k];
        return F;
    }

    BlockMeasurement build_measurement(const ReflectionSchedule &theta, const std::vector<int> &pilots,
                                       const SystemConfig &cfg)
    {
        return build_measurement(theta, pilots, cfg, AngularGrid::extended(cfg.Nd));
    }

    BlockMeasurement build_measurement(const ReflectionSchedule &theta, const std::vector<int> &pilots,
                                       const SystemConfig &cfg, const AngularGrid &grid)
    {
        validate_pilots(pilots, cfg.Np);
        if (pilots.empty())
            throw Error("build_measurement: no pilots");
        if (theta.elements() != cfg.M)
            throw Error("build_measurement: schedule has " + std::to_string(theta.elements()) + " columns, M = " +
                        std::to_string(cfg.M));

        BlockMeasurement meas;
        meas.pilot_indices = pilots;
        meas.grid = grid;
        meas.Ns = theta.symbols();

        const int P = static_cast<int>(pilots.size());
        const int Ns = meas.Ns;
        const int Nd = grid.size;
        meas.per_pilot.reserve(P);
        meas.F_tilde = CMatrix::Zero(static_cast<Eigen::Index>(Ns) * P, static_cast<Eigen::Index>(Nd) * P);
        for (int k = 0; k < P; ++k)
        {
            CMatrix F = theta.coeffs * build_angular_dictionary(pilots[k], cfg, grid).columns;
            for (int b = 0; b < Nd; ++b)
                meas.F_tilde.block(k * Ns, b * P + k, Ns, 1) = F.col(b);
            meas.per_pilot.push_back(std::move(F));
        }
        return meas;
    }

    CVector interleave(const CVector &z_bar, int Np1, int Nd)
    {
        if (z_bar.size() != static_cast<Eigen::Index>(Np1) * Nd)
            throw Error("interleave: length must be Np1 * Nd");
        CVector z(z_bar.size());
        for (int k = 0; k < Np1; ++k)
            for (int b = 0; b < Nd; ++b)
                z(b * Np1 + k) = z_bar(k * Nd + b);
        return z;
    }

    CVector deinterleave(const CVector &z_tilde, int Np1, int Nd)
    {
        if (z_tilde.size() != static_cast<Eigen::Index>(Np1) * Nd)
            throw Error("deinterleave: length must be Np1 * Nd");
        CVector z(z_tilde.size());
        for (int k = 0; k < Np1; ++k)
            for (int b = 0; b < Nd; ++b)
                z(k * Nd + b) = z_tilde(b * Np1 + k);
        return z;
    }

    Eigen::VectorXd block_objective(const BlockMeasurement &meas, const CVector &residual)
    {
        const int Ns = meas.Ns;
        Eigen::VectorXd obj = Eigen::VectorXd::Zero(meas.grid_size());
        for (int k = 0; k < meas.pilots(); ++k)
        {
            // Rows k*Ns..(k+1)*Ns-1 of every column t = b*Np1 + k equal per_pilot[k].col(b).
            CVector corr = meas.per_pilot[k].adjoint() * residual.segment(k * Ns, Ns);
            obj += corr.cwiseAbs2();
        }
        return obj;
    }

    Eigen::VectorXd block_objective_full(const BlockMeasurement &meas, const CVector &residual)
    {
        const int P = meas.pilots();
        CVector corr = meas.F_tilde.adjoint() * residual;
        Eigen::VectorXd obj = Eigen::VectorXd::Zero(meas.grid_size());
        for (int b = 0; b < meas.grid_size(); ++b)
            for (int k = 0; k < P; ++k)
                obj(b) += std::norm(corr(b * P + k));
        return obj;
    }

    namespace
    {
        // Joint LS over the selected blocks. The selected F_tilde columns of
        // pilot k live only in row block k, so the pseudo-inverse splits into
        // one Ns x |support| problem per pilot.
        CVector block_residual(const BlockMeasurement &meas, const std::vector<int> &blocks)
        {
            const int Ns = meas.Ns;
            const int n = static_cast<int>(blocks.size());
            CVector r(meas.y_bar.size());
            for (int k = 0; k < meas.pilots(); ++k)
            {
                CMatrix A(Ns, n);
                for (int j = 0; j < n; ++j)
                    A.col(j) = meas.per_pilot[k].col(blocks[j]);
                CVector yk = meas.y_bar.segment(k * Ns, Ns);
                CVector x;
                try
                {
                    x = solve_least_squares(A, yk);
                }
                catch (const RankDeficientError &e)
                {
                    throw RankDeficientError("stage 1 at pilot subcarrier " + std::to_string(meas.pilot_indices[k]) +
                                                 ": blocks " + std::to_string(blocks[e.column_a()]) + " and " +
                                                 std::to_string(blocks[e.column_b()]) + ": " + e.what(),
                                             blocks[e.column_a()], blocks[e.column_b()]);
                }
                r.segment(k * Ns, Ns) = yk - A * x;
            }
            return r;
        }
    } // namespace

    AngleSupport make_support(const std::vector<int> &indices, const AngularGrid &grid)
    {
        AngleSupport s;
        s.indices = indices;
        for (int i : indices)
        {
            if (i < 0 || i >= grid.size)
                throw Error("support index " + std::to_string(i) + " outside the grid");
            s.angles.push_back(grid.angle(i));
        }
        return s;
    }

    AngleSupport stage1_angle_recovery(const BlockMeasurement &meas, const SystemConfig &cfg)
    {
        const int Nd = meas.grid_size();
        if (meas.y_bar.size() != static_cast<Eigen::Index>(meas.Ns) * meas.pilots())
            throw Error("stage 1: y_bar must have length Ns * Np1");
        if (!(cfg.zeta > 0.0))
            throw Error("stage 1: zeta must be > 0");

        AngleSupport support;
        const double y2 = meas.y_bar.squaredNorm();
        CVector r = meas.y_bar;
        support.residual_norms.push_back(r.norm());
        if (y2 == 0.0)
            return support;

        std::vector<char> taken(Nd, 0);
        while (true)
        {
            if (r.squaredNorm() <= cfg.zeta * y2)
                break;
            if (static_cast<int>(support.indices.size()) >= Nd)
                throw Error("stage 1: selected blocks exceed Nd without meeting the stop rule");

            Eigen::VectorXd obj = block_objective(meas, r);
            int best = -1;
            double best_val = -1.0;
            for (int b = 0; b < Nd; ++b)
                if (!taken[b] && obj(b) > best_val)
                {
                    best_val = obj(b);
                    best = b;
                }

            std::vector<int> candidate = support.indices;
            candidate.push_back(best);
            CVector r_new = block_residual(meas, candidate);
            if ((r - r_new).squaredNorm() / y2 <= cfg.zeta)
                break;

            taken[best] = 1;
            support.indices.push_back(best);
            support.angles.push_back(meas.grid.angle(best));
            support.residual_norms.push_back(r_new.norm());
            r = std::move(r_new);
        }
        return support;
    }

    AngleSupport refine_angle_support(const BlockMeasurement &meas, const AngleSupport &support,
                                      const SystemConfig &cfg)
    {
        const int Nd = meas.grid_size();
        if (!meas.grid.squint || meas.grid.step * Nd < 2.0 || support.indices.empty())
            return support;

        const double y2 = meas.y_bar.squaredNorm();
        std::vector<int> idx = support.indices;
        double best = block_residual(meas, idx).squaredNorm();
        auto contains = [&](int b) { return std::find(idx.begin(), idx.end(), b) != idx.end(); };

        for (int pass = 0; pass < 4; ++pass)
        {
            bool changed = false;
            for (auto &slot : idx)
                for (int alt : {slot - Nd / 2, slot + Nd / 2})
                {
                    if (alt < 0 || alt >= Nd || contains(alt))
                        continue;
                    const int keep = slot;
                    slot = alt;
                    double r2 = std::numeric_limits<double>::infinity();
                    try
                    {
                        r2 = block_residual(meas, idx).squaredNorm();
                    }
                    catch (const RankDeficientError &)
                    {
                    }
                    if (r2 < best)
                    {
                        best = r2;
                        changed = true;
                    }
                    else
                        slot = keep;
                }
            if (!changed)
                break;
        }

        for (bool dropped = true; dropped && idx.size() > 1;)
        {
            dropped = false;
            for (std::size_t j = 0; j < idx.size(); ++j)
            {
                std::vector<int> fewer = idx;
                fewer.erase(fewer.begin() + static_cast<std::ptrdiff_t>(j));
                const double r2 = block_residual(meas, fewer).squaredNorm();
                if (r2 - best <= cfg.zeta * y2)
                {
                    idx = std::move(fewer);
                    best = r2;
                    dropped = true;
                    break;
                }
            }
        }

        AngleSupport out = make_support(idx, meas.grid);
        out.residual_norms = support.residual_norms;
        if (out.residual_norms.empty())
            out.residual_norms.push_back(meas.y_bar.norm());
        if (out.residual_norms.size() < 2)
            out.residual_norms.push_back(std::sqrt(best));
        else
            out.residual_norms.back() = std::sqrt(best);
        return out;
    }

    CVector ls_refine(const CMatrix &F_np, const AngleSupport &support, const CVector &y_np)
    {
        if (F_np.rows() != y_np.size())
            throw Error("ls_refine: F and y row counts differ");
        const int n = static_cast<int>(support.indices.size());
        if (n > F_np.rows())
            throw Error("ls_refine: support larger than Ns");

        CMatrix A(F_np.rows(), n);
        for (int j = 0; j < n; ++j)
        {
            if (support.indices[j] < 0 || support.indices[j] >= F_np.cols())
                throw Error("ls_refine: support index outside the dictionary");
            A.col(j) = F_np.col(support.indices[j]);
        }

        CVector z = CVector::Zero(F_np.cols());
        if (n == 0)
            return z;
        CVector x;
        try
        {
            x = solve_least_squares(A, y_np);
        }
        catch (const RankDeficientError &e)
        {
            throw RankDeficientError("ls_refine: dictionary columns " + std::to_string(support.indices[e.column_a()]) +
                                         " and " + std::to_string(support.indices[e.column_b()]) +
                                         " are linearly dependent",
                                     support.indices[e.column_a()], support.indices[e.column_b()]);
        }
        for (int j = 0; j < n; ++j)
            z(support.indices[j]) = x(j);
        return z;
    }

    CMatrix build_delay_dictionary(const std::vector<int> &pilots, const SystemConfig &cfg)
    {
        const int P = static_cast<int>(pilots.size());
        CMatrix B(P, cfg.Ntau);
        const double spacing = cfg.W / cfg.Np;
        for (int k = 0; k < cfg.Ntau; ++k)
            for (int p = 0; p < P; ++p)
                B(p, k) = unit_phasor(spacing * (k * cfg.delay_step()) * pilots[p]);
        return B;
    }

    namespace
    {
        struct DelayFit
        {
            std::vector<int> support;
            CVector coef;
            CVector residual;
        };

        DelayFit fit_delays(const CMatrix &B, const CVector &z, std::vector<int> support)
        {
            CMatrix A(B.rows(), support.size());
            for (std::size_t j = 0; j < support.size(); ++j)
                A.col(j) = B.col(support[j]);
            DelayFit f{std::move(support), solve_least_squares(A, z), {}};
            f.residual = z - A * f.coef;
            return f;
        }

        // Single-atom exchanges until none lowers the residual.
        void swap_delays(const CMatrix &B, const CVector &z, DelayFit &fit)
        {
            const int Ntau = static_cast<int>(B.cols());
            double best = fit.residual.squaredNorm();
            for (int pass = 0; pass < Ntau; ++pass)
            {
                bool improved = false;
                for (std::size_t j = 0; j < fit.support.size(); ++j)
                    for (int k = 0; k < Ntau; ++k)
                    {
                        if (std::find(fit.support.begin(), fit.support.end(), k) != fit.support.end())
                            continue;
                        std::vector<int> trial = fit.support;
                        trial[j] = k;
                        try
                        {
                            DelayFit t = fit_delays(B, z, std::move(trial));
                            const double res = t.residual.squaredNorm();
                            if (res < best * (1.0 - 1e-9))
                            {
                                fit = std::move(t);
                                best = res;
                                improved = true;
                            }
                        }
                        catch (const RankDeficientError &)
                        {
                        }
                    }
                if (!improved)
                    break;
            }
        }

        // Best LS subset of the given size by enumeration.
        DelayFit best_subset(const CMatrix &B, const CVector &z, int size)
        {
            const int Ntau = static_cast<int>(B.cols());
            std::vector<int> pick(size);
            for (int j = 0; j < size; ++j)
                pick[j] = j;
            DelayFit best{{}, CVector(0), z};
            double best_res = std::numeric_limits<double>::infinity();
            while (true)
            {
                try
                {
                    DelayFit f = fit_delays(B, z, pick);
                    const double res = f.residual.squaredNorm();
                    if (res < best_res)
                    {
                        best = std::move(f);
                        best_res = res;
                    }
                }
                catch (const RankDeficientError &)
                {
                }
                int j = size - 1;
                while (j >= 0 && pick[j] == Ntau - size + j)
                    --j;
                if (j < 0)
                    break;
                ++pick[j];
                for (int i = j + 1; i < size; ++i)
                    pick[i] = pick[i - 1] + 1;
            }
            return best;
        }

        double subset_count(int n, int k)
        {
            double c = 1.0;
            for (int i = 0; i < k; ++i)
                c = c * (n - i) / (i + 1);
            return c;
        }

        constexpr double kMaxEnumeratedSubsets = 4096.0;
    } // namespace

    DelayGainEstimate stage2_delay_gain(const CVector &z_i, const CMatrix &B, const SystemConfig &cfg)
    {
        if (z_i.size() != B.rows())
            throw Error("stage 2: z_i length must equal the number of pilots");
        const double z2 = z_i.squaredNorm();
        if (z2 == 0.0)
            throw Error("stage 2: z_i is identically zero");

        const int P = static_cast<int>(B.rows());
        const int Ntau = static_cast<int>(B.cols());
        DelayFit cur{{}, CVector(0), z_i};
        while (true)
        {
            const CVector &r = cur.residual;
            if (r.squaredNorm() <= cfg.zeta * z2)
                break;
            if (static_cast<int>(cur.support.size()) == Ntau)
                break;
            if (static_cast<int>(cur.support.size()) >= P)
                throw Error("stage 2: more than Np1 delay atoms required");

            const CVector corr = B.adjoint() * r;
            int best = -1;
            double best_val = -1.0;
            for (int k = 0; k < Ntau; ++k)
                if (std::find(cur.support.begin(), cur.support.end(), k) == cur.support.end() &&
                    std::norm(corr(k)) > best_val)
                {
                    best_val = std::norm(corr(k));
                    best = k;
                }

            std::vector<int> candidate = cur.support;
            candidate.push_back(best);
            DelayFit next = fit_delays(B, z_i, std::move(candidate));
            if (cfg.refine_delays)
            {
                const int size = static_cast<int>(next.support.size());
                if (subset_count(Ntau, size) <= kMaxEnumeratedSubsets)
                {
                    DelayFit e = best_subset(B, z_i, size);
                    if (e.residual.squaredNorm() < next.residual.squaredNorm())
                        next = std::move(e);
                }
                else
                    swap_delays(B, z_i, next);
            }
            if ((r - next.residual).squaredNorm() / z2 <= cfg.zeta)
                break;
            cur = std::move(next);
        }

        DelayGainEstimate est;
        est.delay_indices = cur.support;
        for (std::size_t j = 0; j < cur.support.size(); ++j)
        {
            est.delays.push_back(cur.support[j] * cfg.delay_step());
            est.gains.push_back(cur.coef(j));
        }
        return est;
    }

    std::vector<CascadedPath> ChannelEstimate::paths() const
    {
        std::vector<CascadedPath> out;
        for (const auto &a : per_angle)
            for (std::size_t j = 0; j < a.delays.size(); ++j)
                out.push_back({grid.angle(a.angle_index), a.gains[j], a.delays[j]});
        return out;
    }

    CMatrix ChannelEstimate::z_all_subcarriers(const SystemConfig &cfg) const
    {
        CMatrix z = CMatrix::Zero(grid.size, cfg.Np);
        for (const auto &a : per_angle)
            for (int n = 0; n < cfg.Np; ++n)
            {
                const double f = cfg.subcarrier_frequency(n);
                for (std::size_t j = 0; j < a.delays.size(); ++j)
                    z(a.angle_index, n) += a.gains[j] * unit_phasor_product(f, a.delays[j]);
            }
        return z;
    }

    CMatrix reconstruct_channel(std::span<const CascadedPath> paths, const SystemConfig &cfg, bool squint)
    {
        if (squint)
            return channel_response_all(paths, cfg);
        CMatrix H = CMatrix::Zero(cfg.M, cfg.Np);
        for (const auto &p : paths)
        {
            CVector a = steering_vector(p.eq_angle, cfg.M);
            for (int n = 0; n < cfg.Np; ++n)
                H.col(n) += (p.eq_gain * unit_phasor_product(cfg.subcarrier_frequency(n), p.eq_delay)) * a;
        }
        return H;
    }

    ChannelEstimate complete_estimate(const BlockMeasurement &meas, const AngleSupport &support,
                                      const SystemConfig &cfg)
    {
        ChannelEstimate est;
        est.grid = meas.grid;
        est.support = support;
        est.pilots = meas.pilot_indices;

        const int P = meas.pilots();
        const int Ns = meas.Ns;
        est.z_pilots = CMatrix::Zero(meas.grid_size(), P);
        for (int k = 0; k < P; ++k)
            est.z_pilots.col(k) = ls_refine(meas.per_pilot[k], support, meas.y_bar.segment(k * Ns, Ns));

        if (!support.indices.empty())
        {
            const CMatrix B = build_delay_dictionary(meas.pilot_indices, cfg);
            const int Na = static_cast<int>(support.indices.size());
            const bool whiten = cfg.noise_power > 0.0 && cfg.delay_noise_scale > 0.0;

            // Error variance of each LS entry, in units of noise_power.
            Eigen::MatrixXd var = Eigen::MatrixXd::Ones(Na, P);
            if (whiten)
                for (int k = 0; k < P; ++k)
                {
                    CMatrix A(Ns, Na);
                    for (int i = 0; i < Na; ++i)
                        A.col(i) = meas.per_pilot[k].col(support.indices[i]);
                    const CMatrix G = (A.adjoint() * A).inverse();
                    for (int i = 0; i < Na; ++i)
                        var(i, k) = G(i, i).real();
                }

            for (int i = 0; i < Na; ++i)
            {
                const int idx = support.indices[i];
                CVector z = est.z_pilots.row(idx).transpose();
                DelayGainEstimate dg;
                if (whiten && z.squaredNorm() > 0.0)
                {
                    const Eigen::VectorXd w = (var.row(i).transpose() * cfg.noise_power).cwiseSqrt().cwiseInverse();
                    const CVector zw = w.cast<Complex>().cwiseProduct(z);
                    const CMatrix Bw = w.cast<Complex>().asDiagonal() * B;
                    SystemConfig c = cfg;
                    c.zeta = std::max(cfg.zeta, cfg.delay_noise_scale / zw.squaredNorm());
                    dg = stage2_delay_gain(zw, Bw, c);
                }
                else
                    dg = stage2_delay_gain(z, B, cfg);
                dg.angle_index = idx;
                est.per_angle.push_back(std::move(dg));
            }
        }

        const auto paths = est.paths();
        est.h = reconstruct_channel(paths, cfg, meas.grid.squint);
        return est;
    }

    ChannelEstimate estimate_on_grid(const CVector &y_bar, const ReflectionSchedule &theta,
                                     const std::vector<int> &pilots, const SystemConfig &cfg,
                                     const AngularGrid &grid)
    {
        cfg.validate();
        BlockMeasurement meas = build_measurement(theta, pilots, cfg, grid);
        if (y_bar.size() != static_cast<Eigen::Index>(meas.Ns) * meas.pilots())
            throw Error("estimate: y_bar has length " + std::to_string(y_bar.size()) + ", expected Ns * Np1 = " +
                        std::to_string(meas.Ns * meas.pilots()));
        meas.y_bar = y_bar;
        AngleSupport support = stage1_angle_recovery(meas, cfg);
        if (cfg.refine_aliases)
            support = refine_angle_support(meas, support, cfg);
        return complete_estimate(meas, support, cfg);
    }

    ChannelEstimate tsomp_estimate(const CVector &y_bar, const ReflectionSchedule &theta,
                                   const std::vector<int> &pilots, const SystemConfig &cfg)
    {
        return estimate_on_grid(y_bar, theta, pilots, cfg, AngularGrid::extended(cfg.Nd));
    }

    CVector observe_pilots(std::span<const CascadedPath> paths, const ReflectionSchedule &theta,
                           const std::vector<int> &pilots, const SystemConfig &cfg)
    {
        const int Ns = theta.symbols();
        CVector y(static_cast<Eigen::Index>(Ns) * pilots.size());
        for (std::size_t k = 0; k < pilots.size(); ++k)
            y.segment(k * Ns, Ns) = theta.coeffs * channel_response(paths, cfg.subcarrier_frequency(pilots[k]), cfg);
        return y;
    }

} // namespace irsq
