// Copyright 2026 The mfg-master-policy Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Exact finite-MFG primitives: mean-field propagation, exact policy
// evaluation, backward-induction best response and exploitability. All
// operations are pure functions of their inputs and safe to call
// concurrently.

#ifndef MFG_CORE_H_
#define MFG_CORE_H_

#include <utility>

#include "mfg/types.hpp"

namespace mfg {

// One-step population transition: next MF state when everyone at x' plays
// pi(.|x') and moves through p(.|x', a, mu).
Distribution StepMeanField(const Environment& env, const Distribution& mu,
                           const StationaryPolicy& pi);

// MF flow of length horizon+1 starting from mu0 under pi.
MFFlow RolloutFlow(const Environment& env, const Distribution& mu0,
                   const NonStationaryPolicy& pi, int horizon);

// Discounted return of a representative player using pi against the fixed
// flow, by exact distribution propagation (no sampling). Rewards are
// collected at steps 0..horizon.
double EvaluatePolicy(const Environment& env, const Distribution& mu0,
                      const NonStationaryPolicy& pi, const MFFlow& flow,
                      int horizon);

// Backward induction against the fixed flow with zero continuation after
// the horizon. The returned policy is greedy and deterministic with
// lowest-action-index tie-break.
std::pair<NonStationaryPolicy, ValueTable> BestResponse(const Environment& env,
                                                        const MFFlow& flow,
                                                        int horizon);

// J(mu0, BR; Phi(mu0, pi)) - J(mu0, pi; Phi(mu0, pi)); nonnegative up to
// numerical noise.
double Exploitability(const Environment& env, const Distribution& mu0,
                      const NonStationaryPolicy& pi, int horizon);

// Self-consistent rollout of a population-dependent policy: the policy is
// conditioned on the flow it itself induces. Returns the reduced
// population-agnostic policy together with that flow.
std::pair<NonStationaryPolicy, MFFlow> InducePolicy(
    const PopulationPolicy& pop_policy, const Environment& env,
    const Distribution& mu0, int horizon);

// Reduces a population-dependent policy along a fixed conditioning flow:
// pi_n(.|x) = pop_policy(x, flow[n]).
NonStationaryPolicy ReduceAlongFlow(const PopulationPolicy& pop_policy,
                                    const MFFlow& flow, int horizon);

}  // namespace mfg

#endif  // MFG_CORE_H_
