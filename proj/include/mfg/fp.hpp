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
// Equilibrium solvers: specialized Fictitious Play per initial
// distribution, the mixture-reward and unconditioned baselines, and Master
// Fictitious Play with a Q-function subroutine.

#ifndef MFG_FP_H_
#define MFG_FP_H_

#include <cstdint>
#include <memory>
#include <vector>

#include "mfg/core.hpp"
#include "mfg/envs.hpp"
#include "mfg/qlearn.hpp"
#include "mfg/types.hpp"

namespace mfg {

// Per-training-mu0 averaged flows, updated with weights k/(k+1), 1/(k+1).
struct AveragedFlowBank {
  std::vector<Distribution> mu0s;
  std::vector<MFFlow> flows;
  int iteration = 0;
};

struct ExploitabilityCurve {
  std::vector<double> average;     // one value per iteration
  Eigen::MatrixXd per_mu0;         // iterations x |M|
};

enum class SubroutineMode { kDqn, kExactFittedQ };

struct FPConfig {
  int iterations = 10;  // K
  int horizon = 30;     // N_T
  // Induced flows condition on the bank flow (the averaged-flow reading);
  // the self-consistent rollout is the alternative.
  bool self_consistent_induced_flows = false;
  SubroutineMode mode = SubroutineMode::kExactFittedQ;
  std::uint64_t seed = 0;
};

struct SpecializedFPResult {
  // Flow-weighted mixture of the past best responses (population-agnostic).
  NonStationaryPolicy mixture_policy;
  MFFlow equilibrium_flow;  // final averaged flow
  ExploitabilityCurve curve;
};

// Classic Fictitious Play with exact backward-induction best responses,
// for a single initial distribution.
SpecializedFPResult SolveSpecializedFP(const Environment& env,
                                       const Distribution& mu0, int iterations,
                                       int horizon);

// Greedy policy of the MDP whose reward averages r over the given
// equilibrium flows.
NonStationaryPolicy SolveMixtureReward(const Environment& env,
                                       const std::vector<MFFlow>& flows,
                                       int horizon);

// Uniform mixture of the per-iteration population-dependent policies, plus
// the final bank and the exploitability history.
struct MasterPolicyBundle {
  std::vector<QNetwork> networks;  // trained policies, iterations 1..K
  bool include_initial = true;     // the uniform-random initial policy
  int num_actions = 0;
  AveragedFlowBank bank;
  ExploitabilityCurve curve;

  // Mixture components: the initial uniform-random policy (when included)
  // followed by the greedy policies of the trained networks.
  std::vector<std::shared_ptr<const PopulationPolicy>> Policies() const;
  // Trained components only (excludes the initial policy).
  std::vector<std::shared_ptr<const PopulationPolicy>> TrainedPolicies() const;
};

// Master Fictitious Play: each iteration trains a population-dependent best
// response against the current bank (DQN or exact fitted-Q), rolls out the
// induced flows, and averages them into the bank.
MasterPolicyBundle MasterFictitiousPlay(const Environment& env,
                                        const DistributionSet& training_set,
                                        const FPConfig& fp_cfg,
                                        const RLConfig& rl_cfg);

// Same pipeline with the population input of the Q-network zeroed.
MasterPolicyBundle SolveUnconditioned(const Environment& env,
                                      const DistributionSet& training_set,
                                      const FPConfig& fp_cfg,
                                      const RLConfig& rl_cfg);

struct MixtureRollout {
  std::vector<MFFlow> per_policy_flows;
  MFFlow averaged_flow;
  // Flow-weighted combination equivalent to the mixture at the population
  // scale (population-agnostic).
  NonStationaryPolicy reduced_policy;
  double average_return = 0.0;
};

// K subpopulations start at mu0; subpopulation k advances with policy k
// conditioned on the running average flow.
MixtureRollout RolloutMixture(const Environment& env, const Distribution& mu0,
                              const MasterPolicyBundle& bundle, int horizon);

// Uniform average over the bank's mu0s of
// max_pi' J(mu0, pi'; bank flow) - mean_k J(mu0, policy k; bank flow).
double AverageExploitability(const Environment& env,
                             const MasterPolicyBundle& bundle, int horizon);

// Rollout against a fixed conditioning flow: transitions at step n use
// p(.|., ., conditioning[n]).
MFFlow RolloutFlowAgainst(const Environment& env, const Distribution& mu0,
                          const NonStationaryPolicy& pi,
                          const MFFlow& conditioning, int horizon);

}  // namespace mfg

#endif  // MFG_FP_H_
