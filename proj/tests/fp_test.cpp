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

#include "doctest.h"

#include <cmath>

#include "mfg/envs.hpp"
#include "mfg/fp.hpp"
#include "mfg/rng.hpp"

namespace mfg {
namespace {

Environment SmallExploration() {
  Exploration1DConfig cfg;
  cfg.size = 8;
  return MakeExploration1D(cfg);
}

RLConfig SmallRl(std::uint64_t seed) {
  RLConfig cfg;
  cfg.hidden = {32, 32};
  cfg.fit_epochs = 100;
  cfg.seed = seed;
  return cfg;
}

TEST_SUITE("fp") {

TEST_CASE("specialized fp drives exploitability down") {
  const Environment env = SmallExploration();
  const Distribution mu0 = Distribution::Delta(8, 0);
  const SpecializedFPResult res = SolveSpecializedFP(env, mu0, 15, 10);
  REQUIRE(res.curve.average.size() == 15);
  CHECK(res.curve.average.back() < res.curve.average.front() / 50.0);
  CHECK(res.curve.average.back() < 2.0);
  // A uniform initial distribution is already at equilibrium: the first
  // best response reproduces it and the curve starts at zero.
  const SpecializedFPResult eq =
      SolveSpecializedFP(env, Distribution::Uniform(8), 5, 10);
  CHECK(eq.curve.average.front() < 1e-9);
  CHECK(res.equilibrium_flow.length() == 11);
  for (const Distribution& mu : res.equilibrium_flow.states) {
    CHECK(mu.IsValid());
  }
}

TEST_CASE("the mixture policy reproduces the averaged flow") {
  // With mu-independent transitions, rolling out the flow-weighted mixture
  // must recover the uniform average of the per-iteration flows, which is
  // exactly the final bank flow.
  const Environment env = SmallExploration();
  const Distribution mu0 = Distribution::Uniform(8);
  const SpecializedFPResult res = SolveSpecializedFP(env, mu0, 8, 10);
  const MFFlow rolled = RolloutFlow(env, mu0, res.mixture_policy, 10);
  for (int n = 0; n <= 10; ++n) {
    CHECK((rolled[n].p - res.equilibrium_flow[n].p)
              .lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("mixture-reward with a single flow equals the best response") {
  const Environment env = SmallExploration();
  const MFFlow flow = MFFlow::Constant(Distribution::Uniform(8), 6);
  const NonStationaryPolicy mix = SolveMixtureReward(env, {flow}, 6);
  const auto [br, values] = BestResponse(env, flow, 6);
  for (int n = 0; n <= 6; ++n) CHECK(mix[n].table == br[n].table);
}

TEST_CASE("master fp produces one network per iteration and is deterministic") {
  const Environment env = SmallExploration();
  const DistributionSet training = MakeTrainingSet(env.states);
  FPConfig fp;
  fp.iterations = 3;
  fp.horizon = 8;
  fp.seed = 77;
  const MasterPolicyBundle a =
      MasterFictitiousPlay(env, training, fp, SmallRl(0));
  REQUIRE(static_cast<int>(a.networks.size()) == 3);
  REQUIRE(static_cast<int>(a.curve.average.size()) == 3);
  CHECK(a.curve.per_mu0.rows() == 3);
  CHECK(a.curve.per_mu0.cols() == 4);
  CHECK(a.bank.iteration == 3);
  for (const MFFlow& f : a.bank.flows) {
    REQUIRE(f.length() == 9);
    for (const Distribution& mu : f.states) CHECK(mu.IsValid());
  }
  const MasterPolicyBundle b =
      MasterFictitiousPlay(env, training, fp, SmallRl(0));
  for (size_t k = 0; k < a.networks.size(); ++k) {
    CHECK(a.networks[k].FlattenParams() == b.networks[k].FlattenParams());
  }
  CHECK(a.curve.average == b.curve.average);
}

TEST_CASE("unconditioned mode zeroes the population input") {
  const Environment env = SmallExploration();
  const DistributionSet training = MakeTrainingSet(env.states);
  FPConfig fp;
  fp.iterations = 2;
  fp.horizon = 6;
  fp.seed = 78;
  const MasterPolicyBundle bundle =
      SolveUnconditioned(env, training, fp, SmallRl(0));
  for (const QNetwork& net : bundle.networks) {
    CHECK(net.zero_mu_input());
    CHECK(net.Forward(2, Distribution::Uniform(8)) ==
          net.Forward(2, Distribution::Delta(8, 5)));
  }
}

TEST_CASE("mixture rollout averages the subpopulation flows") {
  const Environment env = SmallExploration();
  const DistributionSet training = MakeTrainingSet(env.states);
  FPConfig fp;
  fp.iterations = 2;
  fp.horizon = 6;
  fp.seed = 79;
  const MasterPolicyBundle bundle =
      MasterFictitiousPlay(env, training, fp, SmallRl(0));
  const Distribution mu0 = Distribution::Uniform(8);
  const MixtureRollout roll = RolloutMixture(env, mu0, bundle, 6);
  // Initial uniform policy + 2 trained networks.
  REQUIRE(roll.per_policy_flows.size() == 3);
  REQUIRE(roll.averaged_flow.length() == 7);
  for (int n = 0; n <= 6; ++n) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(8);
    for (const MFFlow& f : roll.per_policy_flows) mean += f[n].p;
    mean /= 3.0;
    CHECK((roll.averaged_flow[n].p - mean).lpNorm<Eigen::Infinity>() < 1e-9);
    CHECK(roll.reduced_policy[n].IsValid());
  }
  CHECK(std::isfinite(roll.average_return));
}

TEST_CASE("average exploitability of a trained bundle beats uniform-random") {
  // The uniform-random policy is a strong baseline in the exploration game,
  // so the crossing needs the full-size environment and enough iterations.
  const Environment env = MakeExploration1D({});
  const DistributionSet training = MakeTrainingSet(env.states);
  FPConfig fp;
  fp.iterations = 20;
  fp.horizon = 30;
  fp.seed = 80;
  RLConfig rl;
  rl.hidden = {64, 64};
  rl.fit_epochs = 200;
  const MasterPolicyBundle trained =
      MasterFictitiousPlay(env, training, fp, rl);

  // Same bank, but only the uniform-random initial policy remains.
  MasterPolicyBundle uniform = trained;
  uniform.networks.clear();
  const double e_trained = AverageExploitability(env, trained, fp.horizon);
  const double e_uniform = AverageExploitability(env, uniform, fp.horizon);
  CHECK(e_trained >= -1e-9);
  CHECK(e_trained < e_uniform);
}

TEST_CASE("rollout against a conditioning flow uses its transitions") {
  // For mu-independent transitions, conditioning on any flow gives the same
  // trajectory as a plain rollout.
  const Environment env = SmallExploration();
  const Distribution mu0 = Distribution::Delta(8, 4);
  const NonStationaryPolicy pi =
      NonStationaryPolicy::Repeat(StationaryPolicy::Pure(8, 3, 2), 6);
  const MFFlow conditioning = MFFlow::Constant(Distribution::Uniform(8), 6);
  const MFFlow against = RolloutFlowAgainst(env, mu0, pi, conditioning, 6);
  const MFFlow plain = RolloutFlow(env, mu0, pi, 6);
  for (int n = 0; n <= 6; ++n) {
    CHECK((against[n].p - plain[n].p).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

}  // TEST_SUITE

}  // namespace
}  // namespace mfg
