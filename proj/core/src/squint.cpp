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

#include "irsq/squint.hpp"

#include <algorithm>
#include <numeric>

#include "irsq/channel.hpp"

namespace irsq
{
    Complex correlation(double x, const CVector &h, double f, const SystemConfig &cfg)
    {
        if (h.size() != cfg.M)
            throw Error("correlation: h must have length M");
        return steering_vector((1.0 + f / cfg.fc) * x, cfg.M).dot(h); // dot() conjugates the left operand
    }

    double false_angle(double phi, double f, double fc)
    {
        const double shift = fc / (f + fc);
        return phi <= 0.0 ? phi + shift : phi - shift;
    }

    double fold_no_squint(double phi)
    {
        if (phi >= 0.5)
            return phi - 1.0;
        if (phi < -0.5)
            return phi + 1.0;
        return phi;
    }

    namespace
    {
        // sum_m conj(a_m) h_m as a polynomial in w = conj(a_1), evaluated by Horner.
        Complex correlation_horner(double eff, const CVector &h)
        {
            const Complex w = std::conj(unit_phasor(eff));
            Complex acc = 0.0;
            for (Eigen::Index m = h.size() - 1; m >= 0; --m)
                acc = acc * w + h(m);
            return acc;
        }
    } // namespace

    std::vector<CorrelationTrace> scan(const std::map<int, CVector> &h_per_subcarrier, int grid_size,
                                       const SystemConfig &cfg)
    {
        if (grid_size < 2)
            throw Error("scan: grid_size must be >= 2");

        std::vector<double> grid(grid_size);
        for (int k = 0; k < grid_size; ++k)
            grid[k] = -1.0 + 2.0 * k / grid_size;

        std::vector<CorrelationTrace> traces;
        traces.reserve(h_per_subcarrier.size());
        for (const auto &[n, h] : h_per_subcarrier)
        {
            CorrelationTrace t;
            t.subcarrier_index = n;
            t.grid = grid;
            t.magnitude.resize(grid_size);
            if (h.size() != cfg.M)
                throw Error("scan: h must have length M");
            const double scale = cfg.squint_factor(n);
            for (int k = 0; k < grid_size; ++k)
                t.magnitude[k] = std::abs(correlation_horner(scale * grid[k], h));
            traces.push_back(std::move(t));
        }
        return traces;
    }

    std::vector<int> find_peaks(const std::vector<double> &values)
    {
        std::vector<int> peaks;
        for (std::size_t k = 1; k + 1 < values.size(); ++k)
            if (values[k] > values[k - 1] && values[k] > values[k + 1])
                peaks.push_back(static_cast<int>(k));
        return peaks;
    }

    std::vector<int> dominant_peaks(const CorrelationTrace &trace, double rel_threshold)
    {
        const auto &mag = trace.magnitude;
        if (mag.empty())
            return {};
        const double top = *std::max_element(mag.begin(), mag.end());
        std::vector<int> out;
        for (int k : find_peaks(mag))
            if (mag[k] > rel_threshold * top)
                out.push_back(k);
        std::stable_sort(out.begin(), out.end(), [&](int a, int b) { return mag[a] > mag[b]; });
        return out;
    }

} // namespace irsq
