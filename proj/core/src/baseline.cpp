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

#include "irsq/baseline.hpp"

namespace irsq
{
    BaselineEstimate baseline_estimate(const CVector &y_bar, const ReflectionSchedule &theta,
                                       const std::vector<int> &pilots, const SystemConfig &cfg)
    {
        return estimate_on_grid(y_bar, theta, pilots, cfg, AngularGrid::folded(cfg.Nd));
    }

} // namespace irsq
