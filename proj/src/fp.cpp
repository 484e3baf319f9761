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

#include "mfg/fp.hpp"

#include <stdexcept>
#include <tuple>

#include "mfg/rng.hpp"

namespace mfg {
namespace {

// Convex bank update mu_bar <- (k/(k+1)) mu_bar + (1/(k+1)) flow.
void AverageInto(MFFlow& bank_flow, const MFFlow& flow, int k) {
  const double w_old = static_cast<double>(k) / (k + 1);
  const double w_new = 1.0 / (k + 1);
  for (int n = 0; n < bank_flow.length(); ++n) {
    bank_flow[n].p = w_old * bank_flow[n].p + w_new * flow[n].p;
    bank_flow[n].Renormalize();
  }
}

Distribution StepMeanFieldAgainst(const Environment& env,
                                  const Distribution& mu,
                                  const StationaryPolicy& pi,
                                  const Distribution& conditioning) {
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
        next += w * env.TransitionRow(x, a, conditioning);
      }
    }
  }
  Distribution out(std::move(next));
  out.Renormalize();
  return out;
}

// Flow-weighted mixture of population-agnostic policies: the stationary
// policy the whole population is equivalently playing when subpopulation j
// follows policies[j] along subflows[j].
NonStationaryPolicy FlowWeightedMixture(
    const std::vector<NonStationaryPolicy>& policies,
    const std::vector<MFFlow>& subflows, int horizon) {
  const int m = static_cast<int>(policies.size());
  const int nx = subflows[0][0].size();
  const int na = static_cast<int>(policies[0][0].table.cols());
  NonStationaryPolicy mix;
  mix.steps.reserve(horizon + 1);
  for (int n = 0; n <= horizon; ++n) {
    StationaryPolicy step(Eigen::MatrixXd::Zero(nx, na));
    for (int x = 0; x < nx; ++x) {
      double denom = 0.0;
      for (int j = 0; j < m; ++j) denom += subflows[j][n].p[x];
      if (denom > 0.0) {
        for (int j = 0; j < m; ++j) {
          step.table.row(x) +=
              (subflows[j][n].p[x] / denom) * policies[j][n].table.row(x);
        }
      } else {
        for (int j = 0; j < m; ++j) {
          step.table.row(x) += policies[j][n].table.row(x) / m;
        }
      }
    }
    mix.steps.push_back(std::move(step));
  }
  return mix;
}

std::vector<std::shared_ptr<const PopulationPolicy>> PoliciesForEvaluation(
    const MasterPolicyBundle& bundle) {
  auto trained = bundle.TrainedPolicies();
  if (!trained.empty()) return trained;
  return bundle.Policies();
}

// Per-mu0 average exploitability against the bank flows.
Eigen::VectorXd AverageExploitabilityPerMu0(const Environment& env,
                                            const MasterPolicyBundle& bundle,
                                            int horizon) {
  const auto policies = PoliciesForEvaluation(bundle);
  const int m = static_cast<int>(bundle.bank.mu0s.size());
  Eigen::VectorXd out(m);
  for (int i = 0; i < m; ++i) {
    const Distribution& mu0 = bundle.bank.mu0s[i];
    const MFFlow& bank_flow = bundle.bank.flows[i];
    const auto [br, values] = BestResponse(env, bank_flow, horizon);
    const double j_max = EvaluatePolicy(env, mu0, br, bank_flow, horizon);
    double j_avg = 0.0;
    for (const auto& pol : policies) {
      const NonStationaryPolicy pi = ReduceAlongFlow(*pol, bank_flow, horizon);
      j_avg += EvaluatePolicy(env, mu0, pi, bank_flow, horizon);
    }
    j_avg /= static_cast<double>(policies.size());
    out[i] = j_max - j_avg;
  }
  return out;
}

MasterPolicyBundle RunMasterFP(const Environment& env,
                               const DistributionSet& training_set,
                               const FPConfig& fp_cfg, RLConfig rl_cfg) {
  if (training_set.size() == 0) {
    throw std::invalid_argument("master FP: empty training set");
  }
  if (fp_cfg.iterations < 1) {
    throw std::invalid_argument("master FP: iterations must be >= 1");
  }
  rl_cfg.horizon = fp_cfg.horizon;
  rl_cfg.Validate();
  const int horizon = fp_cfg.horizon;

  MasterPolicyBundle bundle;
  bundle.num_actions = env.num_actions();
  for (const DistributionSetEntry& e : training_set.entries) {
    bundle.bank.mu0s.push_back(e.mu);
    bundle.bank.flows.push_back(MFFlow::Constant(e.mu, horizon));
  }
  const int m = training_set.size();
  bundle.curve.per_mu0.resize(fp_cfg.iterations, m);

  for (int k = 1; k <= fp_cfg.iterations; ++k) {
    RLConfig it_cfg = rl_cfg;
    it_cfg.seed = SubSeed(fp_cfg.seed, "fp-subroutine", k);
    QNetwork net =
        fp_cfg.mode == SubroutineMode::kExactFittedQ
            ? FitQExact(env, bundle.bank.flows, it_cfg).net
            : TrainDqn(env, bundle.bank.mu0s, bundle.bank.flows, it_cfg);
    bundle.networks.push_back(std::move(net));
    const GreedyQPolicy policy(
        std::make_shared<const QNetwork>(bundle.networks.back()));

    for (int i = 0; i < m; ++i) {
      NonStationaryPolicy pi;
      MFFlow flow;
      if (fp_cfg.self_consistent_induced_flows) {
        std::tie(pi, flow) =
            InducePolicy(policy, env, bundle.bank.mu0s[i], horizon);
      } else {
        pi = ReduceAlongFlow(policy, bundle.bank.flows[i], horizon);
        flow = RolloutFlowAgainst(env, bundle.bank.mu0s[i], pi,
                                  bundle.bank.flows[i], horizon);
      }
      AverageInto(bundle.bank.flows[i], flow, k);
    }
    bundle.bank.iteration = k;

    const Eigen::VectorXd per_mu0 =
        AverageExploitabilityPerMu0(env, bundle, horizon);
    bundle.curve.per_mu0.row(k - 1) = per_mu0.transpose();
    bundle.curve.average.push_back(per_mu0.mean());
  }
  return bundle;
}

}  // namespace

std::vector<std::shared_ptr<const PopulationPolicy>>
MasterPolicyBundle::Policies() const {
  std::vector<std::shared_ptr<const PopulationPolicy>> out;
  if (include_initial) {
    out.push_back(std::make_shared<UniformRandomPopulationPolicy>(num_actions));
  }
  for (const QNetwork& net : networks) {
    out.push_back(std::make_shared<GreedyQPolicy>(
        std::make_shared<const QNetwork>(net)));
  }
  return out;
}

std::vector<std::shared_ptr<const PopulationPolicy>>
MasterPolicyBundle::TrainedPolicies() const {
  std::vector<std::shared_ptr<const PopulationPolicy>> out;
  for (const QNetwork& net : networks) {
    out.push_back(std::make_shared<GreedyQPolicy>(
        std::make_shared<const QNetwork>(net)));
  }
  return out;
}

MFFlow RolloutFlowAgainst(const Environment& env, const Distribution& mu0,
                          const NonStationaryPolicy& pi,
                          const MFFlow& conditioning, int horizon) {
  env.CheckDistribution(mu0);
  MFFlow flow;
  flow.states.reserve(horizon + 1);
  flow.states.push_back(mu0);
  for (int n = 0; n < horizon; ++n) {
    flow.states.push_back(StepMeanFieldAgainst(env, flow.states.back(), pi[n],
                                               conditioning[n]));
  }
  return flow;
}

SpecializedFPResult SolveSpecializedFP(const Environment& env,
                                       const Distribution& mu0, int iterations,
                                       int horizon) {
  if (iterations < 1) {
    throw std::invalid_argument("specialized FP: iterations must be >= 1");
  }
  env.CheckDistribution(mu0);

  std::vector<NonStationaryPolicy> policies;
  std::vector<MFFlow> subflows;
  // The mu0-constant flow seeds the first best response and is then
  // discarded: the bank is the uniform average of the best-response flows,
  // so the flow-weighted mixture of the best responses reproduces it.
  MFFlow bank = MFFlow::Constant(mu0, horizon);

  SpecializedFPResult result;
  result.curve.per_mu0.resize(iterations, 1);
  for (int k = 1; k <= iterations; ++k) {
    auto [br, values] = BestResponse(env, bank, horizon);
    subflows.push_back(RolloutFlow(env, mu0, br, horizon));
    policies.push_back(std::move(br));
    AverageInto(bank, subflows.back(), k - 1);

    const NonStationaryPolicy mixture =
        FlowWeightedMixture(policies, subflows, horizon);
    const double expl = Exploitability(env, mu0, mixture, horizon);
    result.curve.per_mu0(k - 1, 0) = expl;
    result.curve.average.push_back(expl);
  }
  result.mixture_policy = FlowWeightedMixture(policies, subflows, horizon);
  result.equilibrium_flow = std::move(bank);
  return result;
}

NonStationaryPolicy SolveMixtureReward(const Environment& env,
                                       const std::vector<MFFlow>& flows,
                                       int horizon) {
  if (flows.empty()) {
    throw std::invalid_argument("mixture reward: empty flow list");
  }
  const int nx = env.num_states();
  const int na = env.num_actions();
  const int m = static_cast<int>(flows.size());

  NonStationaryPolicy pi(std::vector<StationaryPolicy>(
      horizon + 1, StationaryPolicy(Eigen::MatrixXd::Zero(nx, na))));
  Eigen::VectorXd v_next = Eigen::VectorXd::Zero(nx);
  for (int n = horizon; n >= 0; --n) {
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(nx, na);
    for (int a = 0; a < na; ++a) {
      for (int x = 0; x < nx; ++x) {
        double r = 0.0;
        for (int i = 0; i < m; ++i) r += env.Reward(x, a, flows[i][n]);
        q(x, a) = r / m;
      }
      if (n < horizon) {
        if (!env.kernels.empty() && env.transition_mu_independent) {
          q.col(a).noalias() += env.gamma * (env.kernels[a] * v_next);
        } else {
          for (int x = 0; x < nx; ++x) {
            q(x, a) +=
                env.gamma * env.TransitionRow(x, a, flows[0][n]).dot(v_next);
          }
        }
      }
    }
    Eigen::VectorXd v(nx);
    for (int x = 0; x < nx; ++x) {
      int best = 0;
      for (int a = 1; a < na; ++a) {
        if (q(x, a) > q(x, best)) best = a;
      }
      v[x] = q(x, best);
      pi[n].table(x, best) = 1.0;
    }
    v_next = std::move(v);
  }
  return pi;
}

MasterPolicyBundle MasterFictitiousPlay(const Environment& env,
                                        const DistributionSet& training_set,
                                        const FPConfig& fp_cfg,
                                        const RLConfig& rl_cfg) {
  return RunMasterFP(env, training_set, fp_cfg, rl_cfg);
}

MasterPolicyBundle SolveUnconditioned(const Environment& env,
                                      const DistributionSet& training_set,
                                      const FPConfig& fp_cfg,
                                      const RLConfig& rl_cfg) {
  RLConfig cfg = rl_cfg;
  cfg.zero_mu_input = true;
  return RunMasterFP(env, training_set, fp_cfg, cfg);
}

MixtureRollout RolloutMixture(const Environment& env, const Distribution& mu0,
                              const MasterPolicyBundle& bundle, int horizon) {
  const auto policies = bundle.Policies();
  const int kp = static_cast<int>(policies.size());
  if (kp == 0) throw std::invalid_argument("rollout mixture: empty bundle");
  env.CheckDistribution(mu0);
  const int nx = env.num_states();

  MixtureRollout out;
  out.per_policy_flows.assign(kp, MFFlow(std::vector<Distribution>{mu0}));
  out.averaged_flow.states.push_back(mu0);

  std::vector<NonStationaryPolicy> step_policies(kp);
  for (int n = 0; n <= horizon; ++n) {
    const Distribution& avg = out.averaged_flow[n];
    // Every subpopulation reacts to the running average distribution.
    for (int k = 0; k < kp; ++k) {
      step_policies[k].steps.emplace_back(policies[k]->ActAll(avg, n));
    }
    if (n == horizon) break;
    Eigen::VectorXd avg_next = Eigen::VectorXd::Zero(nx);
    for (int k = 0; k < kp; ++k) {
      Distribution next = StepMeanFieldAgainst(
          env, out.per_policy_flows[k][n], step_policies[k][n], avg);
      avg_next += next.p;
      out.per_policy_flows[k].states.push_back(std::move(next));
    }
    Distribution avg_dist(avg_next / kp);
    avg_dist.Renormalize();
    out.averaged_flow.states.push_back(std::move(avg_dist));
  }

  std::vector<MFFlow> subflows;
  subflows.reserve(kp);
  for (const MFFlow& f : out.per_policy_flows) subflows.push_back(f);
  out.reduced_policy = FlowWeightedMixture(step_policies, subflows, horizon);

  double j_sum = 0.0;
  for (int k = 0; k < kp; ++k) {
    j_sum += EvaluatePolicy(env, mu0, step_policies[k], out.averaged_flow,
                            horizon);
  }
  out.average_return = j_sum / kp;
  return out;
}

double AverageExploitability(const Environment& env,
                             const MasterPolicyBundle& bundle, int horizon) {
  return AverageExploitabilityPerMu0(env, bundle, horizon).mean();
}

}  // namespace mfg
