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

#ifndef IRSQ_PILOT_DESIGN_HPP
#define IRSQ_PILOT_DESIGN_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "irsq/types.hpp"

namespace irsq
{
    struct CrossEntropyParams
    {
        int Nc = 100;                // candidates per iteration
        int Ne = 20;                 // elites
        int Niter = 20;
        std::uint64_t seed = 0;
        bool elitism = true;         // re-inject the best candidate seen so far
        double probability_floor = 1e-3;
        int retry_factor = 1000;     // max draws per iteration = retry_factor * Nc

        void validate() const;
    };

    struct PilotDesignResult
    {
        PilotSet pilots;
        double objective = 0.0;
        std::vector<double> best_trace;          // best elite objective per iteration
        std::vector<double> initial_probabilities;
        std::vector<double> final_probabilities; // elite-indicator means after the last iteration
    };

    /// True iff fc/(fc + f_first) - fc/(fc + f_last) >= 2/Nd.
    bool span_constraint_satisfied(const PilotSet &pilots, const SystemConfig &cfg);

    /// ||B^H B - Np1 I||_F^2 for an Np1 x Ntau delay dictionary.
    double coherence_objective(const CMatrix &B, const SystemConfig &cfg);

    // coherence_objective of the delay dictionary built from pilots.
    double pilot_objective(const PilotSet &pilots, const SystemConfig &cfg);

    /// Draws count distinct subcarriers without replacement, each draw with
    /// probability proportional to max(p, floor) over the remaining indices.
    /// Falls back to uniform weights when fewer than count entries of
    /// probabilities exceed the floor. Result is sorted ascending.
    std::vector<int> sample_weighted_subset(const std::vector<double> &probabilities, int count, double floor,
                                            std::mt19937_64 &rng);

    // Uniformly random sorted subset; feasible_only rejects span violators and
    // throws after max_draws failures.
    PilotSet random_pilots(const SystemConfig &cfg, std::mt19937_64 &rng, bool feasible_only, int max_draws = 100000);

    /// Cross-entropy search over pilot placements.
    ///
    /// Starts from P = (Np1/Np) * 1, samples Nc span-feasible candidates per
    /// iteration, ranks them by pilot_objective and replaces P with the mean
    /// indicator vector of the Ne best. Returns the best elite of the last
    /// iteration. Throws irsq::Error when feasible candidates cannot be found
    /// within the retry cap.
    PilotDesignResult cross_entropy_design(const SystemConfig &cfg, const CrossEntropyParams &ce);

} // namespace irsq

#endif
