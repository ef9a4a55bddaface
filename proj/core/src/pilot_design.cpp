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

#include "irsq/pilot_design.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "irsq/tsomp.hpp"

namespace irsq
{
    void CrossEntropyParams::validate() const
    {
        if (Nc < 1 || Ne < 1 || Niter < 1)
            throw Error("cross-entropy: Nc, Ne and Niter must be >= 1");
        if (Ne > Nc)
            throw Error("cross-entropy: Ne must not exceed Nc");
        if (probability_floor < 0.0 || probability_floor >= 1.0)
            throw Error("cross-entropy: probability floor must be in [0, 1)");
        if (retry_factor < 1)
            throw Error("cross-entropy: retry factor must be >= 1");
    }

    bool span_constraint_satisfied(const PilotSet &pilots, const SystemConfig &cfg)
    {
        if (pilots.indices.empty())
            return false;
        const double f_first = cfg.subcarrier_frequency(pilots.indices.front());
        const double f_last = cfg.subcarrier_frequency(pilots.indices.back());
        return cfg.fc / (cfg.fc + f_first) - cfg.fc / (cfg.fc + f_last) >= 2.0 / cfg.Nd;
    }

    double coherence_objective(const CMatrix &B, const SystemConfig &cfg)
    {
        CMatrix G = B.adjoint() * B;
        G.diagonal().array() -= static_cast<double>(cfg.Np1);
        return G.squaredNorm();
    }

    double pilot_objective(const PilotSet &pilots, const SystemConfig &cfg)
    {
        SystemConfig c = cfg;
        c.Np1 = pilots.size();
        return coherence_objective(build_delay_dictionary(pilots.indices, c), c);
    }

    std::vector<int> sample_weighted_subset(const std::vector<double> &probabilities, int count, double floor,
                                            std::mt19937_64 &rng)
    {
        const int n = static_cast<int>(probabilities.size());
        if (count > n)
            throw Error("cannot draw " + std::to_string(count) + " distinct indices from " + std::to_string(n));

        const int above = static_cast<int>(
            std::count_if(probabilities.begin(), probabilities.end(), [&](double p) { return p > floor; }));
        std::vector<double> w(n);
        for (int i = 0; i < n; ++i)
            w[i] = above < count ? 1.0 : std::max(probabilities[i], floor);

        std::uniform_real_distribution<double> uni(0.0, 1.0);
        std::vector<int> picked;
        picked.reserve(count);
        for (int d = 0; d < count; ++d)
        {
            double total = 0.0;
            for (double x : w)
                total += x;
            double u = uni(rng) * total;
            int chosen = -1;
            for (int i = 0; i < n; ++i)
            {
                if (w[i] <= 0.0)
                    continue;
                chosen = i;
                u -= w[i];
                if (u < 0.0)
                    break;
            }
            picked.push_back(chosen);
            w[chosen] = 0.0;
        }
        std::sort(picked.begin(), picked.end());
        return picked;
    }

    PilotSet random_pilots(const SystemConfig &cfg, std::mt19937_64 &rng, bool feasible_only, int max_draws)
    {
        std::vector<double> uniform(cfg.Np, 1.0);
        for (int draw = 0; draw < max_draws; ++draw)
        {
            PilotSet p{sample_weighted_subset(uniform, cfg.Np1, 0.0, rng)};
            if (!feasible_only || span_constraint_satisfied(p, cfg))
                return p;
        }
        throw Error("random_pilots: no span-feasible pilot set found in " + std::to_string(max_draws) + " draws");
    }

    PilotDesignResult cross_entropy_design(const SystemConfig &cfg, const CrossEntropyParams &ce)
    {
        cfg.validate();
        ce.validate();

        std::mt19937_64 rng(ce.seed);
        PilotDesignResult res;
        std::vector<double> prob(cfg.Np, static_cast<double>(cfg.Np1) / cfg.Np);
        res.initial_probabilities = prob;

        struct Candidate
        {
            std::vector<int> indices;
            double mu;
        };
        bool have_best = false;
        Candidate best{{}, 0.0};
        const long max_draws = static_cast<long>(ce.retry_factor) * ce.Nc;

        for (int it = 0; it < ce.Niter; ++it)
        {
            std::vector<Candidate> pool;
            pool.reserve(ce.Nc + 1);
            long draws = 0;
            while (static_cast<int>(pool.size()) < ce.Nc)
            {
                if (++draws > max_draws)
                    throw Error("cross-entropy: constraint infeasible or too tight (" + std::to_string(max_draws) +
                                " draws without " + std::to_string(ce.Nc) + " feasible candidates)");
                PilotSet p{sample_weighted_subset(prob, cfg.Np1, ce.probability_floor, rng)};
                if (!span_constraint_satisfied(p, cfg))
                    continue;
                const double mu = pilot_objective(p, cfg);
                pool.push_back({std::move(p.indices), mu});
            }
            if (ce.elitism && have_best)
                pool.push_back(best);

            std::stable_sort(pool.begin(), pool.end(),
                             [](const Candidate &a, const Candidate &b) { return a.mu < b.mu; });

            std::vector<double> next(cfg.Np, 0.0);
            for (int e = 0; e < ce.Ne; ++e)
                for (int idx : pool[e].indices)
                    next[idx] += 1.0;
            for (double &x : next)
                x /= ce.Ne;
            prob = std::move(next);

            if (!have_best || pool.front().mu < best.mu)
            {
                best = pool.front();
                have_best = true;
            }
            res.best_trace.push_back(pool.front().mu);
            res.pilots.indices = pool.front().indices;
            res.objective = pool.front().mu;
        }
        res.final_probabilities = prob;
        return res;
    }

} // namespace irsq
