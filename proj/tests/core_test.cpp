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
#include <random>

#include "mfg/core.hpp"
#include "mfg/exhaustive.hpp"
#include "mfg/rng.hpp"

namespace mfg {
namespace {

StationaryPolicy RandomStochasticPolicy(int nx, int na, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  Eigen::MatrixXd t(nx, na);
  for (int x = 0; x < nx; ++x) {
    for (int a = 0; a < na; ++a) t(x, a) = u(rng);
    t.row(x) /= t.row(x).sum();
  }
  return StationaryPolicy(std::move(t));
}

TEST_SUITE("core") {

TEST_CASE("step mean field conserves mass on 1000 random cases") {
  auto rng = MakeRng(SubSeed(7, "mass"));
  for (int t = 0; t < 1000; ++t) {
    const ToyMfg toy = RandomToyMfg(SubSeed(7, "mass-toy", t));
    const StationaryPolicy pi = RandomStochasticPolicy(
        toy.env.num_states(), toy.env.num_actions(), rng);
    const Distribution next = StepMeanField(toy.env, toy.mu0, pi);
    CHECK(next.size() == toy.env.num_states());
    CHECK(std::abs(next.p.sum() - 1.0) < 1e-12);
    CHECK(next.p.minCoeff() >= 0.0);
  }
}

TEST_CASE("evaluate_policy reproduces the geometric series exactly") {
  // Constant reward c at every step: J = c * (1 - gamma^{N+1}) / (1 - gamma).
  Environment env;
  env.states = StateSpace::Line(3);
  env.actions = ActionSpace::Line1D();
  env.gamma = 0.9;
  env.reward_action = [](int, int) { return 0.25; };
  env.reward_mf = [](int, const Distribution&) { return 0.0; };
  env.kernels.assign(3, Eigen::MatrixXd::Identity(3, 3));

  const int horizon = 30;
  const NonStationaryPolicy pi = NonStationaryPolicy::Repeat(
      StationaryPolicy::Uniform(3, 3), horizon);
  const MFFlow flow = MFFlow::Constant(Distribution::Uniform(3), horizon);
  const double expected =
      0.25 * (1.0 - std::pow(0.9, horizon + 1)) / (1.0 - 0.9);
  CHECK(EvaluatePolicy(env, Distribution::Uniform(3), pi, flow, horizon) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("evaluate_policy matches a Monte Carlo rollout oracle") {
  const ToyMfg toy = RandomToyMfg(SubSeed(11, "mc"));
  auto rng = MakeRng(SubSeed(11, "mc-policy"));
  NonStationaryPolicy pi;
  for (int n = 0; n <= toy.horizon; ++n) {
    pi.steps.push_back(RandomStochasticPolicy(toy.env.num_states(),
                                              toy.env.num_actions(), rng));
  }
  const NonStationaryPolicy uniform = NonStationaryPolicy::Repeat(
      StationaryPolicy::Uniform(toy.env.num_states(), toy.env.num_actions()),
      toy.horizon);
  const MFFlow flow = RolloutFlow(toy.env, toy.mu0, uniform, toy.horizon);
  const double exact = EvaluatePolicy(toy.env, toy.mu0, pi, flow, toy.horizon);

  auto mc_rng = MakeRng(SubSeed(11, "mc-sim"));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto sample = [&](const Eigen::VectorXd& p) {
    double v = u(mc_rng);
    for (int i = 0; i < p.size(); ++i) {
      v -= p[i];
      if (v <= 0.0) return i;
    }
    return static_cast<int>(p.size()) - 1;
  };
  const int episodes = 400000;
  double mean = 0.0, m2 = 0.0;
  for (int e = 0; e < episodes; ++e) {
    int x = sample(toy.mu0.p);
    double ret = 0.0, disc = 1.0;
    for (int n = 0; n <= toy.horizon; ++n) {
      const int a = sample(pi[n].table.row(x).transpose());
      ret += disc * toy.env.Reward(x, a, flow[n]);
      disc *= toy.env.gamma;
      if (n < toy.horizon) x = sample(toy.env.TransitionRow(x, a, flow[n]));
    }
    const double delta = ret - mean;
    mean += delta / (e + 1);
    m2 += delta * (ret - mean);
  }
  const double stderr_mc = std::sqrt(m2 / (episodes - 1) / episodes);
  CHECK(std::abs(mean - exact) < 5.0 * stderr_mc + 1e-6);
}

TEST_CASE("best_response ties break to the lowest action index") {
  // Two identical actions: the greedy policy must pick action 0 everywhere.
  Environment env;
  env.states = StateSpace::Line(4);
  env.actions = ActionSpace{{{0, 0}, {0, 0}}};
  env.gamma = 0.5;
  env.reward_action = [](int, int) { return 1.0; };
  env.reward_mf = [](int, const Distribution&) { return 0.0; };
  env.kernels.assign(2, Eigen::MatrixXd::Identity(4, 4));
  const MFFlow flow = MFFlow::Constant(Distribution::Uniform(4), 5);
  const auto [pi, values] = BestResponse(env, flow, 5);
  for (int n = 0; n <= 5; ++n) {
    for (int x = 0; x < 4; ++x) {
      CHECK(pi[n].table(x, 0) == 1.0);
      CHECK(pi[n].table(x, 1) == 0.0);
    }
  }
}

TEST_CASE("best_response value dominates every enumerated policy") {
  for (int t = 0; t < 10; ++t) {
    const ToyMfg toy = RandomToyMfg(SubSeed(13, "dominate", t));
    const NonStationaryPolicy uniform = NonStationaryPolicy::Repeat(
        StationaryPolicy::Uniform(toy.env.num_states(), toy.env.num_actions()),
        toy.horizon);
    const MFFlow flow = RolloutFlow(toy.env, toy.mu0, uniform, toy.horizon);
    const auto [br, values] = BestResponse(toy.env, flow, toy.horizon);
    const double j_br = EvaluatePolicy(toy.env, toy.mu0, br, flow, toy.horizon);
    const double j_enum =
        ExhaustiveBestResponseValue(toy.env, toy.mu0, flow, toy.horizon);
    CHECK(j_br == doctest::Approx(j_enum).epsilon(1e-12));
  }
}

TEST_CASE("best_response q-table at the horizon is the bare reward") {
  const ToyMfg toy = RandomToyMfg(SubSeed(17, "terminal"));
  const MFFlow flow = MFFlow::Constant(toy.mu0, toy.horizon);
  const auto [pi, table] = BestResponse(toy.env, flow, toy.horizon);
  for (int x = 0; x < toy.env.num_states(); ++x) {
    for (int a = 0; a < toy.env.num_actions(); ++a) {
      CHECK(table.q[toy.horizon](x, a) ==
            doctest::Approx(toy.env.Reward(x, a, flow[toy.horizon])));
    }
  }
}

TEST_CASE("exploitability is nonnegative on random policies") {
  auto rng = MakeRng(SubSeed(19, "expl"));
  for (int t = 0; t < 100; ++t) {
    const ToyMfg toy = RandomToyMfg(SubSeed(19, "expl-toy", t));
    NonStationaryPolicy pi;
    for (int n = 0; n <= toy.horizon; ++n) {
      pi.steps.push_back(RandomStochasticPolicy(toy.env.num_states(),
                                                toy.env.num_actions(), rng));
    }
    CHECK(Exploitability(toy.env, toy.mu0, pi, toy.horizon) >= -1e-9);
  }
}

TEST_CASE("argmax policy is invariant to constant reward shifts") {
  const ToyMfg toy = RandomToyMfg(SubSeed(23, "shift"));
  Environment shifted = toy.env;
  const auto base_ra = toy.env.reward_action;
  shifted.reward_action = [base_ra](int x, int a) {
    return base_ra(x, a) + 42.0;
  };
  const MFFlow flow = MFFlow::Constant(toy.mu0, toy.horizon);
  const auto [pi_a, va] = BestResponse(toy.env, flow, toy.horizon);
  const auto [pi_b, vb] = BestResponse(shifted, flow, toy.horizon);
  for (int n = 0; n <= toy.horizon; ++n) {
    CHECK(pi_a[n].table == pi_b[n].table);
  }
}

TEST_CASE("induce_policy on a time-indexed wrapper matches rollout_flow") {
  const ToyMfg toy = RandomToyMfg(SubSeed(29, "induce"));
  auto rng = MakeRng(SubSeed(29, "induce-policy"));
  NonStationaryPolicy pi;
  for (int n = 0; n <= toy.horizon; ++n) {
    pi.steps.push_back(RandomStochasticPolicy(toy.env.num_states(),
                                              toy.env.num_actions(), rng));
  }
  const UnconditionedPopulationPolicy wrapper(pi);
  const auto [reduced, flow] =
      InducePolicy(wrapper, toy.env, toy.mu0, toy.horizon);
  const MFFlow direct = RolloutFlow(toy.env, toy.mu0, pi, toy.horizon);
  for (int n = 0; n <= toy.horizon; ++n) {
    CHECK((flow[n].p - direct[n].p).lpNorm<Eigen::Infinity>() < 1e-15);
    CHECK((reduced[n].table - pi[n].table).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("reduce_along_flow evaluates the policy at the given flow") {
  const ToyMfg toy = RandomToyMfg(SubSeed(31, "reduce"));
  const UniformRandomPopulationPolicy uniform(toy.env.num_actions());
  const MFFlow flow = MFFlow::Constant(toy.mu0, toy.horizon);
  const NonStationaryPolicy pi = ReduceAlongFlow(uniform, flow, toy.horizon);
  for (int n = 0; n <= toy.horizon; ++n) {
    CHECK(pi[n].table.isApproxToConstant(1.0 / toy.env.num_actions(), 1e-15));
  }
}

}  // TEST_SUITE

}  // namespace
}  // namespace mfg
