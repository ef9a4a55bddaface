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

#include <benchmark/benchmark.h>

#include "irsq/baseline.hpp"
#include "irsq/channel.hpp"
#include "irsq/harness.hpp"
#include "irsq/pilot_design.hpp"
#include "irsq/tsomp.hpp"

using namespace irsq;

namespace
{
    const std::vector<int> kPilots{2, 20, 26, 43, 67, 91};

    struct Fixture
    {
        SystemConfig cfg;
        std::vector<CascadedPath> paths;
        ReflectionSchedule theta;
        CVector y;

        explicit Fixture(int M = 256)
        {
            cfg.M = M;
            cfg.zeta = 1e-9;
            paths = generate_scenario(cfg, 2, 3, 7);
            theta = generate_reflection_schedule(cfg, 8);
            y = observe_pilots(paths, theta, kPilots, cfg);
        }
    };

    void BM_ChannelResponseAll(benchmark::State &state)
    {
        Fixture fx(static_cast<int>(state.range(0)));
        for (auto _ : state)
            benchmark::DoNotOptimize(channel_response_all(fx.paths, fx.cfg));
    }
    BENCHMARK(BM_ChannelResponseAll)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

    void BM_BuildMeasurement(benchmark::State &state)
    {
        Fixture fx;
        fx.cfg.Nd = static_cast<int>(state.range(0));
        for (auto _ : state)
            benchmark::DoNotOptimize(build_measurement(fx.theta, kPilots, fx.cfg));
    }
    BENCHMARK(BM_BuildMeasurement)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

    void BM_Stage1(benchmark::State &state)
    {
        Fixture fx;
        BlockMeasurement meas = build_measurement(fx.theta, kPilots, fx.cfg);
        meas.y_bar = fx.y;
        for (auto _ : state)
            benchmark::DoNotOptimize(stage1_angle_recovery(meas, fx.cfg));
    }
    BENCHMARK(BM_Stage1)->Unit(benchmark::kMillisecond);

    void BM_TsOmpEstimate(benchmark::State &state)
    {
        Fixture fx;
        for (auto _ : state)
            benchmark::DoNotOptimize(tsomp_estimate(fx.y, fx.theta, kPilots, fx.cfg));
    }
    BENCHMARK(BM_TsOmpEstimate)->Unit(benchmark::kMillisecond);

    void BM_BaselineEstimate(benchmark::State &state)
    {
        Fixture fx;
        for (auto _ : state)
            benchmark::DoNotOptimize(baseline_estimate(fx.y, fx.theta, kPilots, fx.cfg));
    }
    BENCHMARK(BM_BaselineEstimate)->Unit(benchmark::kMillisecond);

    void BM_PilotObjective(benchmark::State &state)
    {
        SystemConfig cfg;
        const PilotSet p{kPilots};
        for (auto _ : state)
            benchmark::DoNotOptimize(pilot_objective(p, cfg));
    }
    BENCHMARK(BM_PilotObjective)->Unit(benchmark::kMicrosecond);

    void BM_CrossEntropyDesign(benchmark::State &state)
    {
        SystemConfig cfg;
        CrossEntropyParams ce;
        ce.Niter = static_cast<int>(state.range(0));
        for (auto _ : state)
            benchmark::DoNotOptimize(cross_entropy_design(cfg, ce));
    }
    BENCHMARK(BM_CrossEntropyDesign)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

    void BM_Trial(benchmark::State &state)
    {
        SystemConfig cfg;
        std::uint64_t seed = 0;
        for (auto _ : state)
            benchmark::DoNotOptimize(run_trial(cfg, Method::TsOmp, kPilots, 10.0, ++seed));
    }
    BENCHMARK(BM_Trial)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
