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

#ifndef IRSQ_TYPES_HPP
#define IRSQ_TYPES_HPP

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace irsq
{
    using Complex = std::complex<double>;
    using CVector = Eigen::VectorXcd;
    using CMatrix = Eigen::MatrixXcd;

    inline constexpr double kPi = 3.14159265358979323846;

    // Raised for every contract violation (bad shapes, invalid parameters).
    class Error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// Scalar parameters of the IRS-aided OFDM link and of both estimators.
    ///
    /// Subcarrier n (0-based) sits at baseband offset n * W / Np. Angles are in
    /// normalized cycles per element at half-wavelength spacing.
    struct SystemConfig
    {
        int M = 256;                 // IRS elements
        int Np = 128;                // OFDM subcarriers
        double W = 510e6;            // bandwidth [Hz]
        double fc = 20e9;            // carrier [Hz]
        int Ns = 32;                 // training OFDM symbols
        int Np1 = 6;                 // pilot subcarriers
        int Nd = 256;                // angular grid size, even
        int Ntau = 64;               // delay grid size
        double Ttau = 200e-9;        // maximum delay spread [s]
        double zeta = 1e-3;          // greedy stop threshold on relative residual change
        double noise_power = 0.0;    // per-observation noise variance
        bool refine_aliases = true;  // run refine_angle_support after stage 1
        bool refine_delays = true;   // swap search over the stage-2 delay support
        double delay_noise_scale = 8.0; // stage-2 stop level in units of the z noise variance; 0 = zeta only

        double subcarrier_frequency(int n) const { return static_cast<double>(n) * W / static_cast<double>(Np); }
        double squint_factor(int n) const { return 1.0 + subcarrier_frequency(n) / fc; }
        double delay_step() const { return Ttau / static_cast<double>(Ntau); }

        // Throws irsq::Error naming the first offending field.
        void validate() const;
    };

    /// One single-hop path (BS->IRS or IRS->user) referenced to element 1.
    struct HopPath
    {
        Complex gain{1.0, 0.0};      // complex path gain before carrier phase
        double delay = 0.0;          // [s], >= 0
        double norm_angle = 0.0;     // d sin(angle) / lambda_c, in [-1/2, 1/2)
    };

    /// One equivalent path of the cascaded BS->IRS->user channel.
    struct CascadedPath
    {
        double eq_angle = 0.0;       // in (-1, 1)
        Complex eq_gain{0.0, 0.0};
        double eq_delay = 0.0;       // [s], in [0, Ttau)
    };

    /// Ns x M matrix of unit-modulus reflection coefficients; row s is the IRS
    /// configuration during training symbol s.
    struct ReflectionSchedule
    {
        CMatrix coeffs;

        int symbols() const { return static_cast<int>(coeffs.rows()); }
        int elements() const { return static_cast<int>(coeffs.cols()); }
    };

    /// Strictly increasing list of pilot subcarrier indices.
    struct PilotSet
    {
        std::vector<int> indices;

        int size() const { return static_cast<int>(indices.size()); }
    };

    // Throws unless pilots are strictly increasing, within [0, Np) and (when
    // expected_count > 0) exactly expected_count long.
    void validate_pilots(const std::vector<int> &pilots, int Np, int expected_count = 0);

} // namespace irsq

#endif
