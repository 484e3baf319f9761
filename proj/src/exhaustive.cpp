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

#include "mfg/exhaustive.hpp"

#include <limits>
#include <random>
#include <stdexcept>

#include "mfg/core.hpp"
#include "mfg/rng.hpp"

namespace mfg {
namespace {

// Decodes `code` in base |A| into one action per (step, state).
NonStationaryPolicy DecodePolicy(long long code, int nx, int na, int horizon) {
  NonStationaryPolicy pi;
  pi.steps.reserve(horizon + 1);
  for (int n = 0; n <= horizon; ++n) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(nx, na);
    for (int x = 0; x < nx; ++x) {
      t(x, static_cast<int>(code % na)) = 1.0;
      code /= na;
    }
    pi.steps.emplace_back(std::move(t));
  }
  return pi;
}

long long PolicyCount(int nx, int na, int horizon) {
  long long count = 1;
  for (int i = 0; i < nx * (horizon + 1); ++i) {
    count *= na;
    if (count > (1LL << 40)) {
      throw std::invalid_argument("exhaustive: policy space too large");
    }
  }
  return count;
}

}  // namespace

ToyMfg RandomToyMfg(std::uint64_t seed) {
  auto rng = MakeRng(SubSeed(seed, "toy-mfg"));
  std::uniform_int_distribution<int> nx_d(1, 3), na_d(1, 2), h_d(1, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0), n11(-1.0, 1.0);

  ToyMfg toy;
  const int nx = nx_d(rng);
  const int na = na_d(rng);
  toy.horizon = h_d(rng);

  Environment env;
  env.states = StateSpace::Line(nx);
  env.actions.moves.assign(na, Eigen::Vector2i::Zero());
  env.gamma = 0.05 + 0.9 * u(rng);
  env.transition_mu_independent = true;
  for (int a = 0; a < na; ++a) {
    Eigen::MatrixXd k(nx, nx);
    for (int x = 0; x < nx; ++x) {
      for (int y = 0; y < nx; ++y) k(x, y) = 0.05 + u(rng);
      k.row(x) /= k.row(x).sum();
    }
    env.kernels.push_back(std::move(k));
  }
  Eigen::MatrixXd ra(nx, na);
  Eigen::VectorXd w(nx), v(nx);
  for (int x = 0; x < nx; ++x) {
    for (int a = 0; a < na; ++a) ra(x, a) = n11(rng);
    w[x] = n11(rng);
    v[x] = n11(rng);
  }
  env.reward_action = [ra](int x, int a) { return ra(x, a); };
  env.reward_mf = [w, v](int x, const Distribution& mu) {
    return w[x] * mu.p[x] + v[x];
  };

  Eigen::VectorXd p(nx);
  for (int x = 0; x < nx; ++x) p[x] = 0.05 + u(rng);
  toy.mu0 = Distribution(p / p.sum());
  toy.env = std::move(env);
  return toy;
}

double ExhaustiveBestResponseValue(const Environment& env,
                                   const Distribution& mu0, const MFFlow& flow,
                                   int horizon) {
  const int nx = env.num_states();
  const int na = env.num_actions();
  const long long count = PolicyCount(nx, na, horizon);
  double best = -std::numeric_limits<double>::infinity();
  for (long long code = 0; code < count; ++code) {
    const NonStationaryPolicy pi = DecodePolicy(code, nx, na, horizon);
    best = std::max(best, EvaluatePolicy(env, mu0, pi, flow, horizon));
  }
  return best;
}

double ExhaustiveExploitability(const Environment& env, const Distribution& mu0,
                                const NonStationaryPolicy& pi, int horizon) {
  const MFFlow flow = RolloutFlow(env, mu0, pi, horizon);
  return ExhaustiveBestResponseValue(env, mu0, flow, horizon) -
         EvaluatePolicy(env, mu0, pi, flow, horizon);
}

}  // namespace mfg
