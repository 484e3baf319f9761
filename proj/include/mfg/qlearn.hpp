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
// Population-conditioned Q-function approximation. The network consumes a
// one-hot state concatenated with the population histogram; the 2-D variant
// embeds both planes through small ConvNets before a dense trunk. Training
// (DQN or exact fitted-Q regression) is deterministic given a seed.

#ifndef MFG_QLEARN_H_
#define MFG_QLEARN_H_

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "mfg/core.hpp"
#include "mfg/types.hpp"

namespace mfg {

struct DenseLayer {
  Eigen::MatrixXd w;  // out x in
  Eigen::VectorXd b;
};

// 3x3 kernels with zero "same" padding, stride 1, stored as out_ch x (in_ch*9).
struct ConvLayer {
  int in_ch = 0;
  int out_ch = 0;
  Eigen::MatrixXd w;
  Eigen::VectorXd b;
};

struct NetParams {
  std::vector<ConvLayer> conv_state;  // branch on the one-hot state plane
  std::vector<ConvLayer> conv_mu;     // branch on the histogram plane
  std::vector<DenseLayer> dense;      // trunk (hidden layers + linear output)
};

enum class NetArch { kMlp, kConv2D };

class QNetwork {
 public:
  QNetwork() = default;

  // Fully connected net on [one-hot x ; mu].
  static QNetwork Mlp(int num_states, int num_actions,
                      const std::vector<int>& hidden, bool zero_mu_input,
                      std::uint64_t seed);
  // Two conv branches (8 then 16 channels, 3x3) + dense trunk.
  static QNetwork Conv2D(const StateSpace& space, int num_actions,
                         const std::vector<int>& trunk_hidden,
                         bool zero_mu_input, std::uint64_t seed);

  NetArch arch() const { return arch_; }
  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  int input_dim() const { return 2 * num_states_; }
  bool zero_mu_input() const { return zero_mu_input_; }
  const StateSpace& space() const { return space_; }
  const NetParams& params() const { return params_; }
  NetParams& mutable_params() { return params_; }
  const std::vector<int>& hidden() const { return hidden_; }

  // Feature vector [one-hot x ; mu] (mu zeroed in unconditioned mode).
  Eigen::VectorXd BuildInput(int x, const Distribution& mu) const;

  // Action values for a single (x, mu) pair.
  Eigen::VectorXd Forward(int x, const Distribution& mu) const;

  struct ForwardCache {
    Eigen::MatrixXd input;
    struct Branch {
      std::vector<Eigen::MatrixXd> col;  // im2col inputs per conv layer
      std::vector<Eigen::MatrixXd> pre;  // preactivations, ch x (B*wh)
    } state_branch, mu_branch;
    std::vector<Eigen::MatrixXd> dense_in;
    std::vector<Eigen::MatrixXd> dense_pre;
  };

  // Columns of `input` are samples; returns num_actions x B.
  Eigen::MatrixXd ForwardBatch(const Eigen::MatrixXd& input,
                               ForwardCache* cache = nullptr) const;

  // dLoss/dParams for the batch recorded in `cache`, given dLoss/dOutput.
  NetParams BackwardBatch(const ForwardCache& cache,
                          const Eigen::MatrixXd& d_out) const;

  // Activation of the last hidden trunk layer (input to the output layer);
  // used for the closed-form output-layer refit.
  Eigen::MatrixXd LastHiddenBatch(const Eigen::MatrixXd& input) const;

  NetParams ZeroGrads() const;
  int NumParams() const;
  Eigen::VectorXd FlattenParams() const;
  void UnflattenParams(const Eigen::VectorXd& flat);
  static Eigen::VectorXd Flatten(const NetParams& p);

 private:
  NetArch arch_ = NetArch::kMlp;
  int num_states_ = 0;
  int num_actions_ = 0;
  bool zero_mu_input_ = false;
  StateSpace space_;
  std::vector<int> hidden_;
  NetParams params_;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class AdamOptimizer {
 public:
  explicit AdamOptimizer(const QNetwork& net, AdamConfig cfg = {});
  void Step(QNetwork& net, const NetParams& grads);

 private:
  AdamConfig cfg_;
  NetParams m_;
  NetParams v_;
  long t_ = 0;
};

struct Transition {
  int x = 0;
  int a = 0;
  Distribution mu;
  double r = 0.0;
  int x_next = 0;
  Distribution mu_next;
  int step = 0;
  bool terminal = false;
};

// FIFO ring buffer; minibatches are sampled uniformly without replacement.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity) : capacity_(capacity) {}
  void Add(Transition t);
  int size() const { return static_cast<int>(data_.size()); }
  int capacity() const { return capacity_; }
  std::vector<const Transition*> SampleBatch(int batch_size,
                                             std::mt19937_64& rng) const;

 private:
  int capacity_;
  int next_ = 0;
  std::vector<Transition> data_;
};

struct RLConfig {
  int episodes = 400;      // N_episodes
  int inner_steps = 30;    // N, steps collected per episode
  int batch_size = 64;     // minibatch size
  int horizon = 30;        // estimation horizon N_T
  int target_sync = 50;    // C, gradient steps between target syncs
  double epsilon = 0.1;
  double learning_rate = 1e-3;
  int buffer_capacity = 20000;
  std::vector<int> hidden = {64, 64};  // MLP hidden sizes
  std::vector<int> trunk_hidden = {128};  // dense trunk after the conv embed
  NetArch arch = NetArch::kMlp;
  bool zero_mu_input = false;

  // Exact fitted-Q regression.
  int fit_epochs = 400;
  int fit_batch = 256;
  int fit_subsample = 0;  // 0 = use the whole dataset
  int fit_augment = 8;    // extra synthetic conditioning flows
  // Regress on advantages (per-sample action-mean removed). The greedy
  // policy is invariant to per-(x, mu) constant shifts, and the centered
  // targets keep the regression accuracy uniform across population states
  // instead of being dominated by the large shared value component.
  bool fit_advantage = false;
  bool fit_final_least_squares = true;

  std::uint64_t seed = 0;

  void Validate() const;
};

QNetwork MakeNetwork(const Environment& env, const RLConfig& cfg,
                     std::uint64_t seed);

// DQN against fixed per-mu0 conditioning flows (one flow per entry of mu0s).
QNetwork TrainDqn(const Environment& env,
                  const std::vector<Distribution>& mu0s,
                  const std::vector<MFFlow>& bank_flows, const RLConfig& cfg);

struct FitResult {
  QNetwork net;
  double final_loss = 0.0;  // mean squared error per (sample, action)
};

// Exact q-targets against one conditioning flow: backward induction with a
// stationary continuation at the flow's final distribution, so identical
// (x, mu) inputs always receive identical targets.
std::vector<Eigen::MatrixXd> ExactQTargets(const Environment& env,
                                           const MFFlow& flow, int horizon);

// Regression of the network on exact backward-induction q-targets computed
// against each bank flow.
FitResult FitQExact(const Environment& env,
                    const std::vector<MFFlow>& bank_flows,
                    const RLConfig& cfg);

// Deterministic greedy policy of a Q-network (lowest-index tie-break).
class GreedyQPolicy : public PopulationPolicy {
 public:
  explicit GreedyQPolicy(std::shared_ptr<const QNetwork> net)
      : net_(std::move(net)) {}
  Eigen::VectorXd Act(int x, const Distribution& mu, int n) const override;
  Eigen::MatrixXd ActAll(const Distribution& mu, int n) const override;
  const QNetwork& net() const { return *net_; }

 private:
  std::shared_ptr<const QNetwork> net_;
};

struct GradientCheckReport {
  int probes = 0;
  int skipped = 0;  // probes discarded because a ReLU flipped under +-h
  double max_rel_err = 0.0;
};

// Central finite differences vs. backprop on randomly chosen parameters.
GradientCheckReport GradientCheck(const QNetwork& net, int n_probes,
                                  std::uint64_t seed);

}  // namespace mfg

#endif  // MFG_QLEARN_H_
