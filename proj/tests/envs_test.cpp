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
#include "mfg/rng.hpp"

namespace mfg {
namespace {

TEST_SUITE("envs") {

TEST_CASE("exploration-1d kernels are deterministic with clamped walls") {
  const Environment env = MakeExploration1D({});
  REQUIRE(env.num_states() == 32);
  REQUIRE(env.num_actions() == 3);
  for (int a = 0; a < 3; ++a) {
    for (int x = 0; x < 32; ++x) {
      CHECK(env.kernels[a].row(x).sum() == 1.0);
      CHECK(env.kernels[a].row(x).maxCoeff() == 1.0);  // deterministic
    }
  }
  // Left move from the left wall stays put; interior moves shift by one.
  CHECK(env.kernels[0](0, 0) == 1.0);
  CHECK(env.kernels[0](5, 4) == 1.0);
  CHECK(env.kernels[1](5, 5) == 1.0);
  CHECK(env.kernels[2](5, 6) == 1.0);
  CHECK(env.kernels[2](31, 31) == 1.0);
}

TEST_CASE("exploration-1d reward formula, hand-checked") {
  const Environment env = MakeExploration1D({});
  const Distribution mu = Distribution::Uniform(32);
  // r(x, a, mu) = -log(mu(x)) - |a|/|X|.
  CHECK(env.Reward(3, 1, mu) == doctest::Approx(std::log(32.0)));
  CHECK(env.Reward(3, 0, mu) ==
        doctest::Approx(std::log(32.0) - 1.0 / 32.0));
  CHECK(env.Reward(3, 2, mu) ==
        doctest::Approx(std::log(32.0) - 1.0 / 32.0));
  // The clip bounds the crowd reward at -log(mu_clip).
  Distribution nearly_empty = Distribution::Delta(32, 0);
  CHECK(env.Reward(5, 1, nearly_empty) ==
        doctest::Approx(-std::log(1e-10)));
}

TEST_CASE("beach-bar-2d reward includes the normalized bar distance") {
  BeachBar2DConfig cfg;
  cfg.width = 4;
  cfg.height = 4;
  cfg.mu_clip = 1e-12;
  const Environment env = MakeBeachBar2D(cfg);
  REQUIRE(env.num_states() == 16);
  REQUIRE(env.num_actions() == 5);
  const StateSpace space = env.states;
  const int bar = space.IndexOf(2, 2);
  const Distribution mu = Distribution::Uniform(16);
  // Stay at the bar: d_bar = 0, move cost 0.
  CHECK(env.Reward(bar, 0, mu) == doctest::Approx(std::log(16.0)));
  // One step away: d_bar = -1/(w+h).
  const int near = space.IndexOf(1, 2);
  CHECK(env.Reward(near, 0, mu) ==
        doctest::Approx(std::log(16.0) - 1.0 / 8.0));
  // Moving costs 1/|X| on top.
  CHECK(env.Reward(near, 3, mu) ==
        doctest::Approx(std::log(16.0) - 1.0 / 8.0 - 1.0 / 16.0));
}

TEST_CASE("beach-bar-2d four-move variant drops the stay action") {
  BeachBar2DConfig cfg;
  cfg.include_stay = false;
  const Environment env = MakeBeachBar2D(cfg);
  CHECK(env.num_actions() == 4);
  for (int a = 0; a < 4; ++a) CHECK(env.actions.L1Cost(a) == 1);
}

TEST_CASE("gaussian distribution matches the scalar density on a line") {
  const StateSpace line = StateSpace::Line(9);
  const double mean = 4.0, var = 2.25;
  const Distribution mu = GaussianDistribution(line, {mean, 0.0}, var);
  double norm = 0.0;
  for (int x = 0; x < 9; ++x) {
    norm += std::exp(-(x - mean) * (x - mean) / (2.0 * var));
  }
  for (int x = 0; x < 9; ++x) {
    const double expected =
        std::exp(-(x - mean) * (x - mean) / (2.0 * var)) / norm;
    CHECK(mu.p[x] == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(mu.IsValid());
}

TEST_CASE("training and testing sets have the contracted sizes") {
  for (const StateSpace space :
       {StateSpace::Line(32), StateSpace::Grid(16, 16)}) {
    const DistributionSet training = MakeTrainingSet(space);
    const DistributionSet testing = MakeTestingSet(space, 99);
    CHECK(training.size() == 4);
    CHECK(testing.size() == 7);
    for (const auto& e : training.entries) CHECK(e.mu.IsValid());
    for (const auto& e : testing.entries) {
      CHECK(e.mu.IsValid());
      CHECK(!e.provenance.empty());
    }
  }
}

TEST_CASE("random distributions are reproducible and strictly positive") {
  const StateSpace line = StateSpace::Line(32);
  const Distribution a = RandomDistribution(line, 1234);
  const Distribution b = RandomDistribution(line, 1234);
  CHECK(a.p == b.p);
  CHECK(a.p.minCoeff() > 0.0);
}

TEST_CASE("monotonicity holds on both environments") {
  const MonotonicityReport r1 =
      CheckMonotonicity(MakeExploration1D({}), 1000, 5);
  CHECK(r1.pairs == 1000);
  CHECK(r1.violations == 0);
  CHECK(r1.min_margin < 0.0);
  const MonotonicityReport r2 = CheckMonotonicity(MakeBeachBar2D({}), 1000, 5);
  CHECK(r2.violations == 0);
}

TEST_CASE("a sign-flipped crowd reward fails the monotonicity check") {
  Environment env = MakeExploration1D({});
  const auto base = env.reward_mf;
  env.reward_mf = [base](int x, const Distribution& mu) {
    return -base(x, mu);  // crowd-seeking instead of crowd-averse
  };
  const MonotonicityReport r = CheckMonotonicity(env, 200, 5);
  CHECK(r.violations == 200);
}

}  // TEST_SUITE

}  // namespace
}  // namespace mfg
