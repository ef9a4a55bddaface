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

#ifndef IRSQ_SQUINT_HPP
#define IRSQ_SQUINT_HPP

#include <map>
#include <vector>

#include "irsq/types.hpp"

namespace irsq
{
    /// |Gamma^f(x)| sampled on a uniform grid over [-1, 1).
    struct CorrelationTrace
    {
        int subcarrier_index = 0;
        std::vector<double> grid;
        std::vector<double> magnitude;
    };

    // a^H((1 + f/fc) x) h
    Complex correlation(double x, const CVector &h, double f, const SystemConfig &cfg);

    /// Location of the second correlation peak of a single path at angle phi.
    ///
    /// phi + fc/(f+fc) for phi <= 0, phi - fc/(f+fc) otherwise.
    double false_angle(double phi, double f, double fc);

    // Map an angle in (-1, 1) to the squint-free equivalent in [-1/2, 1/2).
    double fold_no_squint(double phi);

    /// One trace per entry of h_per_subcarrier over x_k = -1 + 2k/grid_size.
    std::vector<CorrelationTrace> scan(const std::map<int, CVector> &h_per_subcarrier, int grid_size,
                                       const SystemConfig &cfg);

    // Indices of points strictly greater than both neighbours. Endpoints are
    // never peaks. Plateaus produce no peak.
    std::vector<int> find_peaks(const std::vector<double> &values);

    // Peaks of a trace whose magnitude exceeds rel_threshold * max, sorted by
    // decreasing magnitude, ties toward the lower index.
    std::vector<int> dominant_peaks(const CorrelationTrace &trace, double rel_threshold);

} // namespace irsq

#endif
