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

#include "mfg/core.hpp"

#include <stdexcept>

namespace mfg {
namespace {

void CheckPolicyShape(const Environment& env, const StationaryPolicy& pi) {
  if (pi.table.rows() != env.num_states() ||
      pi.table.cols() != env.num_actions()) {
    throw std::invalid_argument("policy table does not match env dimensions");
  }
}

void CheckFlowLength(const MFFlow& flow, int horizon) {
  if (flow.length() < horizon + 1) {
    throw std::invalid_argument("flow shorter than horizon + 1");
  }
}

void CheckPolicyLength(const NonStationaryPolicy& pi, int horizon) {
  if (pi.length() < horizon + 1) {
    throw std::invalid_argument("policy shorter than horizon + 1");
  }
}

}  // namespace

Distribution StepMeanField(const Environment& env, const Distribution& mu,
                           const StationaryPolicy& pi) {
  env.CheckDistribution(mu);
  CheckPolicyShape(env, pi);
  const int nx = env.num_states();
  const int na = env.num_actions();
  Eigen::VectorXd next = Eigen::VectorXd::Zero(nx);
  if (!env.kernels.empty() && env.transition_mu_independent) {
    for (int a = 0; a < na; ++a) {
      next.noalias() +=
          env.kernels[a].transpose() * mu.p.cwiseProduct(pi.table.col(a));
    }
  } else {
    for (int x = 0; x < nx; ++x) {
      if (mu.p[x] == 0.0) continue;
      for (int a = 0; a < na; ++a) {
        const double w = mu.p[x] * pi.table(x, a);
        if (w == 0.0) continue;
        next += w * env.TransitionRow(x, a, mu);
      }
    }
  }
  Distribution out(std::move(next));
  // Renormalize after every step to kill drift.
  out.Renormalize();
  return out;
}

MFFlow RolloutFlow(const Environment& env, const Distribution& mu0,
                   const NonStationaryPolicy& pi, int horizon) {
  env.CheckDistribution(mu0);
  if (horizon > 0) CheckPolicyLength(pi, horizon - 1);
  MFFlow flow;
  flow.states.reserve(horizon + 1);
  flow.states.push_back(mu0);
  for (int n = 0; n < horizon; ++n) {
    flow.states.push_back(StepMeanField(env, flow.states.back(), pi[n]));
  }
  return flow;
}

double EvaluatePolicy(const Environment& env, const Distribution& mu0,
                      const NonStationaryPolicy& pi, const MFFlow& flow,
                      int horizon) {
  env.CheckDistribution(mu0);
  CheckFlowLength(flow, horizon);
  CheckPolicyLength(pi, horizon);
  const int nx = env.num_states();
  const int na = env.num_actions();
  Distribution rho = mu0;
  double total = 0.0;
  double discount = 1.0;
  for (int n = 0; n <= horizon; ++n) {
    const Distribution& mu_n = flow[n];
    double step_reward = 0.0;
    for (int x = 0; x < nx; ++x) {
      if (rho.p[x] == 0.0) continue;
      const double rm = env.reward_mf(x, mu_n);
      for (int a = 0; a < na; ++a) {
        const double w = pi[n].table(x, a);
        if (w == 0.0) continue;
        step_reward += rho.p[x] * w * (env.reward_action(x, a) + rm);
      }
    }
    total += discount * step_reward;
    discount *= env.gamma;
    if (n < horizon) {
      // Propagate the player's own state distribution through pi and the
      // transitions driven by the given flow.
      Eigen::VectorXd next = Eigen::VectorXd::Zero(nx);
      if (!env.kernels.empty() && env.transition_mu_independent) {
        for (int a = 0; a < na; ++a) {
          next.noalias() += env.kernels[a].transpose() *
                            rho.p.cwiseProduct(pi[n].table.col(a));
        }
      } else {
        for (int x = 0; x < nx; ++x) {
          if (rho.p[x] == 0.0) continue;
          for (int a = 0; a < na; ++a) {
            const double w = rho.p[x] * pi[n].table(x, a);
            if (w == 0.0) continue;
            next += w * env.TransitionRow(x, a, mu_n);
          }
        }
      }
      rho = Distribution(std::move(next));
      rho.Renormalize();
    }
  }
  return total;
}

std::pair<NonStationaryPolicy, ValueTable> BestResponse(const Environment& env,
                                                        const MFFlow& flow,
                                                        int horizon) {
  CheckFlowLength(flow, horizon);
  const int nx = env.num_states();
  const int na = env.num_actions();

  ValueTable table;
  table.values = Eigen::MatrixXd::Zero(horizon + 1, nx);
  table.q.assign(horizon + 1, Eigen::MatrixXd::Zero(nx, na));
  NonStationaryPolicy pi(std::vector<StationaryPolicy>(
      horizon + 1, StationaryPolicy(Eigen::MatrixXd::Zero(nx, na))));

  Eigen::VectorXd v_next = Eigen::VectorXd::Zero(nx);
  for (int n = horizon; n >= 0; --n) {
    const Distribution& mu_n = flow[n];
    Eigen::MatrixXd& q = table.q[n];
    for (int a = 0; a < na; ++a) {
      for (int x = 0; x < nx; ++x) {
        q(x, a) = env.Reward(x, a, mu_n);
      }
      if (n < horizon) {
        if (!env.kernels.empty() && env.transition_mu_independent) {
          q.col(a).noalias() += env.gamma * (env.kernels[a] * v_next);
        } else {
          for (int x = 0; x < nx; ++x) {
            q(x, a) += env.gamma * env.TransitionRow(x, a, mu_n).dot(v_next);
          }
        }
      }
    }
    for (int x = 0; x < nx; ++x) {
      int best = 0;
      double best_q = q(x, 0);
      for (int a = 1; a < na; ++a) {
        if (q(x, a) > best_q) {  // strict: ties break to lowest index
          best_q = q(x, a);
          best = a;
        }
      }
      table.values(n, x) = best_q;
      pi[n].table(x, best) = 1.0;
    }
    v_next = table.values.row(n).transpose();
  }
  return {std::move(pi), std::move(table)};
}

double Exploitability(const Environment& env, const Distribution& mu0,
                      const NonStationaryPolicy& pi, int horizon) {
  const MFFlow flow = RolloutFlow(env, mu0, pi, horizon);
  const auto [br, values] = BestResponse(env, flow, horizon);
  const double j_br = EvaluatePolicy(env, mu0, br, flow, horizon);
  const double j_pi = EvaluatePolicy(env, mu0, pi, flow, horizon);
  return j_br - j_pi;
}

std::pair<NonStationaryPolicy, MFFlow> InducePolicy(
    const PopulationPolicy& pop_policy, const Environment& env,
    const Distribution& mu0, int horizon) {
  env.CheckDistribution(mu0);
  MFFlow flow;
  flow.states.reserve(horizon + 1);
  flow.states.push_back(mu0);
  NonStationaryPolicy pi;
  pi.steps.reserve(horizon + 1);
  for (int n = 0; n <= horizon; ++n) {
    const Distribution& mu_n = flow.states.back();
    const StationaryPolicy step(pop_policy.ActAll(mu_n, n));
    pi.steps.push_back(step);
    if (n < horizon) {
      flow.states.push_back(StepMeanField(env, mu_n, step));
    }
  }
  return {std::move(pi), std::move(flow)};
}

NonStationaryPolicy ReduceAlongFlow(const PopulationPolicy& pop_policy,
                                    const MFFlow& flow, int horizon) {
  CheckFlowLength(flow, horizon);
  NonStationaryPolicy pi;
  pi.steps.reserve(horizon + 1);
  for (int n = 0; n <= horizon; ++n) {
    pi.steps.emplace_back(pop_policy.ActAll(flow[n], n));
  }
  return pi;
}

}  // namespace mfg
