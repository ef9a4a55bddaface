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

#ifndef IRSQ_CHANNEL_HPP
#define IRSQ_CHANNEL_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "irsq/types.hpp"

namespace irsq
{
    // exp(-j 2 pi x) with x reduced modulo 1 first, so large arguments keep
    // full precision.
    Complex unit_phasor(double cycles);

    // unit_phasor(a * b) with the product reduced mod 1 before rounding.
    Complex unit_phasor_product(double a, double b);

    /// Spatial steering vector of an M-element ULA.
    ///
    /// Element m (0-based) is exp(-j 2 pi m eff_angle). The caller applies the
    /// squint scaling, i.e. passes eff_angle = (1 + f/fc) * angle.
    CVector steering_vector(double eff_angle, int M);

    // Normalized angle d sin(theta) / lambda_c for half-wavelength spacing.
    double normalized_angle_from_physical(double theta_rad);

    /// Pairs every BS->IRS hop with every IRS->user hop.
    ///
    /// Output order is row-major in (bs_irs, irs_user). Throws irsq::Error if
    /// either list is empty.
    std::vector<CascadedPath> compose_cascade(std::span<const HopPath> bs_irs,
                                              std::span<const HopPath> irs_user,
                                              double fc);

    /// Cascaded frequency response h(f), an M-vector, as the finite path sum
    /// sum_l c_l a((1 + f/fc) phi_l) exp(-j 2 pi f tau_l).
    CVector channel_response(std::span<const CascadedPath> paths, double f, const SystemConfig &cfg);

    // Responses at every subcarrier 0..Np-1, one column per subcarrier.
    CMatrix channel_response_all(std::span<const CascadedPath> paths, const SystemConfig &cfg);

    /// theta^T h + noise (plain transpose, no conjugation).
    Complex received_symbol(const CVector &theta, const CVector &h, Complex noise);

    /// Ns x M schedule with i.i.d. uniform phases, deterministic in seed.
    ReflectionSchedule generate_reflection_schedule(const SystemConfig &cfg, std::uint64_t seed);

    // Scenario CSV with header eq_angle,eq_gain_re,eq_gain_im,eq_delay_s.
    void write_scenario_csv(std::ostream &os, std::span<const CascadedPath> paths);
    std::vector<CascadedPath> read_scenario_csv(std::istream &is);

} // namespace irsq

#endif
