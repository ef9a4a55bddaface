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


#include <doctest.h>

#include "generators.hpp"
#include "irsq/baseline.hpp"
#include "irsq/channel.hpp"
#include "irsq/harness.hpp"

using namespace irsq;

TEST_CASE("baseline agrees with ts-omp when squint vanishes")
{
    SystemConfig cfg;
    cfg.W = 1.0;
    cfg.zeta = 1e-9;
    std::mt19937_64 rng(51);
    for (int t = 0; t < 10; ++t)
    {
        std::vector<CascadedPath> truth;
        for (int k : gen::sorted_subset(rng, cfg.Nd / 16, 2))
            truth.push_back({-0.5 + 16.0 * k / cfg.Nd + 2.0 / cfg.Nd, gen::cn(rng), 0.0});
        const auto theta = generate_reflection_schedule(cfg, 50 + t);
        const CVector y = observe_pilots(truth, theta, gen::kPaperPilots, cfg);
        const auto a = tsomp_estimate(y, theta, gen::kPaperPilots, cfg);
        const auto b = baseline_estimate(y, theta, gen::kPaperPilots, cfg);
        CHECK(nmse(b.h, a.h) <= 1e-6);
        CHECK(nmse(b.h, channel_response_all(truth, cfg)) <= 1e-6);
    }
}

TEST_CASE("baseline dictionary is frequency independent")
{
    const SystemConfig cfg;
    const auto theta = generate_reflection_schedule(cfg, 52);
    const auto meas = build_measurement(theta, gen::kPaperPilots, cfg, AngularGrid::folded(cfg.Nd));
    for (int k = 1; k < meas.pilots(); ++k)
        CHECK((meas.per_pilot[k] - meas.per_pilot[0]).norm() == 0.0);
    const auto est = baseline_estimate(CVector::Zero(cfg.Ns * cfg.Np1), theta, gen::kPaperPilots, cfg);
    CHECK_FALSE(est.grid.squint);
    CHECK(est.grid.start == -0.5);
}

TEST_CASE("baseline angles stay in the folded range")
{
    SystemConfig cfg;
    cfg.zeta = 1e-9;
    const auto theta = generate_reflection_schedule(cfg, 53);
    const std::vector<CascadedPath> one{{0.7, {1.0, 0.0}, 10 * cfg.delay_step()}};
    const auto est = baseline_estimate(observe_pilots(one, theta, gen::kPaperPilots, cfg), theta,
                                       gen::kPaperPilots, cfg);
    REQUIRE_FALSE(est.paths().empty());
    for (const auto &p : est.paths())
    {
        CHECK(p.eq_angle >= -0.5);
        CHECK(p.eq_angle < 0.5);
        CHECK(p.eq_angle != doctest::Approx(0.7));
    }
}

TEST_CASE("baseline is worse than ts-omp at wide bandwidth")
{
    const SystemConfig cfg;
    NmseAccumulator ts, bl;
    for (int t = 0; t < 10; ++t)
    {
        const auto seed = trial_seed(54, t);
        const auto a = run_trial(cfg, Method::TsOmp, gen::kPaperPilots, 15.0, seed);
        const auto b = run_trial(cfg, Method::Baseline, gen::kPaperPilots, 15.0, seed);
        REQUIRE(a.ok);
        REQUIRE(b.ok);
        ts.merge(a.h);
        bl.merge(b.h);
    }
    CHECK(bl.value() > 10.0 * ts.value());
}
