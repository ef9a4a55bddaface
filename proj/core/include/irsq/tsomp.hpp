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

#ifndef IRSQ_TSOMP_HPP
#define IRSQ_TSOMP_HPP

#include <span>
#include <vector>

#include "irsq/types.hpp"

// Two-stage OMP estimation of the cascaded channel.
//
// Stage 1 recovers the equivalent angles shared by all pilot subcarriers with
// a block-sparse greedy search over the stacked pilot observations; stage 2
// recovers delays and gains per angle with OMP on a delay dictionary. All grid
// indices in this API are 0-based.

namespace irsq
{
    /// Uniform angular grid used by a dictionary.
    ///
    /// The extended grid covers [-1, 1) in steps of 2/Nd and applies squint
    /// scaling; the folded grid covers [-1/2, 1/2) in steps of 1/Nd with
    /// frequency-independent steering vectors.
    struct AngularGrid
    {
        int size = 0;
        double start = -1.0;
        double step = 0.0;
        bool squint = true;

        double angle(int index) const { return start + step * index; }
        // Nearest grid index, or -1 if angle lies outside the covered range.
        int nearest_index(double angle) const;

        static AngularGrid extended(int Nd) { return {Nd, -1.0, 2.0 / Nd, true}; }
        static AngularGrid folded(int Nd) { return {Nd, -0.5, 1.0 / Nd, false}; }
    };

    struct AngularDictionary
    {
        int subcarrier_index = 0;
        CMatrix columns; // M x Nd
    };

    // A(n_p): column k is a(s * grid.angle(k)), s = 1 + n_p W / (Np fc) for a
    // squinted grid and 1 otherwise.
    AngularDictionary build_angular_dictionary(int n_p, const SystemConfig &cfg);
    AngularDictionary build_angular_dictionary(int n_p, const SystemConfig &cfg, const AngularGrid &grid);

    /// Measurement matrices of the stacked pilot observations.
    ///
    /// F_tilde is the column-interleaved block-diagonal matrix: block b holds
    /// angle b at every pilot, and its k-th column is nonzero only in rows
    /// k*Ns .. (k+1)*Ns - 1. per_pilot[k] = Theta A(n_k) is kept alongside.
    struct BlockMeasurement
    {
        CVector y_bar;               // Ns*Np1, filled by the caller
        CMatrix F_tilde;             // Ns*Np1 x Np1*Nd
        std::vector<int> pilot_indices;
        std::vector<CMatrix> per_pilot;
        AngularGrid grid;
        int Ns = 0;

        int pilots() const { return static_cast<int>(pilot_indices.size()); }
        int grid_size() const { return grid.size; }

        // F_bar: block-diagonal form with per_pilot[k] as the k-th diagonal block.
        CMatrix block_diagonal() const;
    };

    BlockMeasurement build_measurement(const ReflectionSchedule &theta, const std::vector<int> &pilots,
                                       const SystemConfig &cfg);
    BlockMeasurement build_measurement(const ReflectionSchedule &theta, const std::vector<int> &pilots,
                                       const SystemConfig &cfg, const AngularGrid &grid);

    // z_tilde[b*Np1 + k] = z_bar[k*Nd + b] and its inverse.
    CVector interleave(const CVector &z_bar, int Np1, int Nd);
    CVector deinterleave(const CVector &z_tilde, int Np1, int Nd);

    // Per-block matched-filter energy sum_k |F(n_k)[:, b]^H r_k|^2 using only
    // the nonzero row block of each column, and the same quantity from full
    // F_tilde columns.
    Eigen::VectorXd block_objective(const BlockMeasurement &meas, const CVector &residual);
    Eigen::VectorXd block_objective_full(const BlockMeasurement &meas, const CVector &residual);

    struct AngleSupport
    {
        std::vector<int> indices;    // selection order
        std::vector<double> angles;  // grid.angle(indices[i])
        std::vector<double> residual_norms; // ||r|| before the first and after each accepted block
    };

    /// Stage 1: greedy block selection on y_bar.
    ///
    /// Per iteration the block with the largest block_objective is tried,
    /// joint LS over all selected blocks is refit, and the block is kept only
    /// if ||r_prev - r_new||^2 / ||y_bar||^2 exceeds zeta. Ties go to the
    /// lowest index. When ||r||^2 <= zeta ||y_bar||^2 no further block can
    /// pass that test and the loop ends without trying one.
    AngleSupport stage1_angle_recovery(const BlockMeasurement &meas, const SystemConfig &cfg);

    /// Local search on a stage-1 support.
    ///
    /// Each selected block is swapped for its alias one unit of angle away
    /// (index +- Nd/2) when that lowers the joint LS residual, then blocks whose
    /// removal raises ||r||^2 by at most zeta ||y_bar||^2 are dropped. Only
    /// meaningful on the extended grid; other grids are returned unchanged.
    AngleSupport refine_angle_support(const BlockMeasurement &meas, const AngleSupport &support,
                                      const SystemConfig &cfg);

    // LS estimate of z(n_p) restricted to the support; zeros elsewhere.
    CVector ls_refine(const CMatrix &F_np, const AngleSupport &support, const CVector &y_np);

    /// Np1 x Ntau delay dictionary; entry (p, k) = exp(-j 2 pi (W/Np) (k Ttau/Ntau) n_p).
    CMatrix build_delay_dictionary(const std::vector<int> &pilots, const SystemConfig &cfg);

    struct DelayGainEstimate
    {
        int angle_index = -1;
        std::vector<int> delay_indices;
        std::vector<double> delays;  // delay_indices[j] * Ttau / Ntau
        std::vector<Complex> gains;
    };

    /// Stage 2: OMP of z_i over B with the same stop rule as stage 1.
    ///
    /// With cfg.refine_delays the support is improved after every addition,
    /// before the stop rule is evaluated: by full enumeration while there are
    /// at most 4096 subsets of the current size, by single-atom swaps beyond.
    /// Throws irsq::Error for an all-zero z_i or if more than Np1 atoms would
    /// be needed.
    DelayGainEstimate stage2_delay_gain(const CVector &z_i, const CMatrix &B, const SystemConfig &cfg);

    struct ChannelEstimate
    {
        AngularGrid grid;
        AngleSupport support;
        std::vector<int> pilots;
        CMatrix z_pilots;            // Nd x Np1, column k = LS estimate of z(n_k)
        std::vector<DelayGainEstimate> per_angle;
        CMatrix h;                   // M x Np

        std::vector<CascadedPath> paths() const;
        // z(n) for every subcarrier built from the recovered delays and gains.
        CMatrix z_all_subcarriers(const SystemConfig &cfg) const;
    };

    // Runs LS refinement, stage 2 and reconstruction for a given support.
    // With noise_power > 0 each z_i is whitened by the LS error variance of its
    // entries and stage 2 stops once an atom removes at most delay_noise_scale
    // noise units.
    ChannelEstimate complete_estimate(const BlockMeasurement &meas, const AngleSupport &support,
                                      const SystemConfig &cfg);

    /// Full pipeline on an arbitrary grid; tsomp_estimate uses the extended grid.
    ChannelEstimate estimate_on_grid(const CVector &y_bar, const ReflectionSchedule &theta,
                                     const std::vector<int> &pilots, const SystemConfig &cfg,
                                     const AngularGrid &grid);

    ChannelEstimate tsomp_estimate(const CVector &y_bar, const ReflectionSchedule &theta,
                                   const std::vector<int> &pilots, const SystemConfig &cfg);

    // Channel at every subcarrier from path triples; squint=false drops the
    // (1 + f/fc) factor from the steering vectors.
    CMatrix reconstruct_channel(std::span<const CascadedPath> paths, const SystemConfig &cfg, bool squint);

    // Noise-free stacked observations [Theta h(f_{n_1}); ...; Theta h(f_{n_Np1})].
    CVector observe_pilots(std::span<const CascadedPath> paths, const ReflectionSchedule &theta,
                           const std::vector<int> &pilots, const SystemConfig &cfg);

    AngleSupport make_support(const std::vector<int> &indices, const AngularGrid &grid);

} // namespace irsq

#endif
