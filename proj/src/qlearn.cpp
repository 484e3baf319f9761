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

#include "mfg/qlearn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mfg/envs.hpp"
#include "mfg/rng.hpp"

namespace mfg {
namespace {

constexpr int kKernelSize = 3;
constexpr int kConvChannels1 = 8;
constexpr int kConvChannels2 = 16;

template <class Params, class F>
void VisitTensors(Params&& p, F&& f) {
  for (auto& c : p.conv_state) {
    f(c.w);
    f(c.b);
  }
  for (auto& c : p.conv_mu) {
    f(c.w);
    f(c.b);
  }
  for (auto& d : p.dense) {
    f(d.w);
    f(d.b);
  }
}

Eigen::MatrixXd HeInitMatrix(int rows, int cols, int fan_in,
                             std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / fan_in));
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

DenseLayer MakeDense(int out, int in, std::mt19937_64& rng) {
  return {HeInitMatrix(out, in, in, rng), Eigen::VectorXd::Zero(out)};
}

ConvLayer MakeConv(int out_ch, int in_ch, std::mt19937_64& rng) {
  ConvLayer c;
  c.in_ch = in_ch;
  c.out_ch = out_ch;
  c.w = HeInitMatrix(out_ch, in_ch * kKernelSize * kKernelSize,
                     in_ch * kKernelSize * kKernelSize, rng);
  c.b = Eigen::VectorXd::Zero(out_ch);
  return c;
}

// Samples are laid out pixel-major: column s*wh + p holds pixel p of sample
// s. Patches use 3x3 neighborhoods with zero padding.
Eigen::MatrixXd Im2Col(const Eigen::MatrixXd& in, int batch,
                       const StateSpace& space) {
  const int wh = space.size();
  const int in_ch = static_cast<int>(in.rows());
  Eigen::MatrixXd col =
      Eigen::MatrixXd::Zero(in_ch * 9, static_cast<long>(batch) * wh);
  for (int s = 0; s < batch; ++s) {
    for (int p = 0; p < wh; ++p) {
      const int px = space.XOf(p), py = space.YOf(p);
      int k = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx, ++k) {
          const int qx = px + dx, qy = py + dy;
          if (qx < 0 || qx >= space.width || qy < 0 || qy >= space.height) {
            continue;
          }
          const long src = static_cast<long>(s) * wh + space.IndexOf(qx, qy);
          const long dst = static_cast<long>(s) * wh + p;
          for (int c = 0; c < in_ch; ++c) {
            col(c * 9 + k, dst) = in(c, src);
          }
        }
      }
    }
  }
  return col;
}

Eigen::MatrixXd Col2Im(const Eigen::MatrixXd& d_col, int batch,
                       const StateSpace& space, int in_ch) {
  const int wh = space.size();
  Eigen::MatrixXd d_in =
      Eigen::MatrixXd::Zero(in_ch, static_cast<long>(batch) * wh);
  for (int s = 0; s < batch; ++s) {
    for (int p = 0; p < wh; ++p) {
      const int px = space.XOf(p), py = space.YOf(p);
      int k = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx, ++k) {
          const int qx = px + dx, qy = py + dy;
          if (qx < 0 || qx >= space.width || qy < 0 || qy >= space.height) {
            continue;
          }
          const long src = static_cast<long>(s) * wh + space.IndexOf(qx, qy);
          const long dst = static_cast<long>(s) * wh + p;
          for (int c = 0; c < in_ch; ++c) {
            d_in(c, src) += d_col(c * 9 + k, dst);
          }
        }
      }
    }
  }
  return d_in;
}

Eigen::MatrixXd Relu(const Eigen::MatrixXd& m) { return m.cwiseMax(0.0); }

}  // namespace

QNetwork QNetwork::Mlp(int num_states, int num_actions,
                       const std::vector<int>& hidden, bool zero_mu_input,
                       std::uint64_t seed) {
  QNetwork net;
  net.arch_ = NetArch::kMlp;
  net.num_states_ = num_states;
  net.num_actions_ = num_actions;
  net.zero_mu_input_ = zero_mu_input;
  net.space_ = StateSpace::Line(num_states);
  net.hidden_ = hidden;
  auto rng = MakeRng(SubSeed(seed, "net-init"));
  int in = 2 * num_states;
  for (int h : hidden) {
    net.params_.dense.push_back(MakeDense(h, in, rng));
    in = h;
  }
  net.params_.dense.push_back(MakeDense(num_actions, in, rng));
  return net;
}

QNetwork QNetwork::Conv2D(const StateSpace& space, int num_actions,
                          const std::vector<int>& trunk_hidden,
                          bool zero_mu_input, std::uint64_t seed) {
  QNetwork net;
  net.arch_ = NetArch::kConv2D;
  net.num_states_ = space.size();
  net.num_actions_ = num_actions;
  net.zero_mu_input_ = zero_mu_input;
  net.space_ = space;
  net.hidden_ = trunk_hidden;
  auto rng = MakeRng(SubSeed(seed, "net-init"));
  for (auto* branch : {&net.params_.conv_state, &net.params_.conv_mu}) {
    branch->push_back(MakeConv(kConvChannels1, 1, rng));
    branch->push_back(MakeConv(kConvChannels2, kConvChannels1, rng));
  }
  int in = 2 * kConvChannels2 * space.size();
  for (int h : trunk_hidden) {
    net.params_.dense.push_back(MakeDense(h, in, rng));
    in = h;
  }
  net.params_.dense.push_back(MakeDense(num_actions, in, rng));
  return net;
}

Eigen::VectorXd QNetwork::BuildInput(int x, const Distribution& mu) const {
  if (x < 0 || x >= num_states_ || mu.size() != num_states_) {
    throw std::invalid_argument("QNetwork: input shape mismatch");
  }
  Eigen::VectorXd in = Eigen::VectorXd::Zero(2 * num_states_);
  in[x] = 1.0;
  if (!zero_mu_input_) in.tail(num_states_) = mu.p;
  return in;
}

Eigen::VectorXd QNetwork::Forward(int x, const Distribution& mu) const {
  return ForwardBatch(BuildInput(x, mu)).col(0);
}

Eigen::MatrixXd QNetwork::ForwardBatch(const Eigen::MatrixXd& input,
                                       ForwardCache* cache) const {
  if (input.rows() != input_dim()) {
    throw std::invalid_argument("QNetwork: batch input shape mismatch");
  }
  const int batch = static_cast<int>(input.cols());
  Eigen::MatrixXd in = input;
  if (zero_mu_input_) in.bottomRows(num_states_).setZero();
  if (cache) cache->input = in;

  Eigen::MatrixXd trunk_in;
  if (arch_ == NetArch::kMlp) {
    trunk_in = in;
  } else {
    const int wh = num_states_;
    // Reshape each plane to pixel-major rows of a 1-channel image batch.
    auto run_branch = [&](const std::vector<ConvLayer>& layers, int row_offset,
                          ForwardCache::Branch* bcache) {
      Eigen::MatrixXd act(1, static_cast<long>(batch) * wh);
      for (int s = 0; s < batch; ++s) {
        for (int p = 0; p < wh; ++p) {
          act(0, static_cast<long>(s) * wh + p) = in(row_offset + p, s);
        }
      }
      for (const ConvLayer& layer : layers) {
        Eigen::MatrixXd col = Im2Col(act, batch, space_);
        Eigen::MatrixXd pre = layer.w * col;
        pre.colwise() += layer.b;
        if (bcache) {
          bcache->col.push_back(std::move(col));
          bcache->pre.push_back(pre);
        }
        act = Relu(pre);
      }
      return act;
    };
    Eigen::MatrixXd s_out = run_branch(params_.conv_state, 0,
                                       cache ? &cache->state_branch : nullptr);
    Eigen::MatrixXd m_out = run_branch(params_.conv_mu, num_states_,
                                       cache ? &cache->mu_branch : nullptr);
    const int feat = kConvChannels2 * wh;
    trunk_in.resize(2 * feat, batch);
    for (int s = 0; s < batch; ++s) {
      for (int c = 0; c < kConvChannels2; ++c) {
        for (int p = 0; p < wh; ++p) {
          trunk_in(c * wh + p, s) = s_out(c, static_cast<long>(s) * wh + p);
          trunk_in(feat + c * wh + p, s) =
              m_out(c, static_cast<long>(s) * wh + p);
        }
      }
    }
  }

  Eigen::MatrixXd h = trunk_in;
  const int n_dense = static_cast<int>(params_.dense.size());
  for (int i = 0; i < n_dense; ++i) {
    if (cache) cache->dense_in.push_back(h);
    Eigen::MatrixXd pre = params_.dense[i].w * h;
    pre.colwise() += params_.dense[i].b;
    if (i + 1 < n_dense) {
      if (cache) cache->dense_pre.push_back(pre);
      h = Relu(pre);
    } else {
      h = std::move(pre);  // linear output
    }
  }
  return h;
}

NetParams QNetwork::BackwardBatch(const ForwardCache& cache,
                                  const Eigen::MatrixXd& d_out) const {
  NetParams grads = ZeroGrads();
  const int batch = static_cast<int>(cache.input.cols());
  const int n_dense = static_cast<int>(params_.dense.size());

  Eigen::MatrixXd d = d_out;
  for (int i = n_dense - 1; i >= 0; --i) {
    grads.dense[i].w = d * cache.dense_in[i].transpose();
    grads.dense[i].b = d.rowwise().sum();
    if (i > 0) {
      d = params_.dense[i].w.transpose() * d;
      d.array() *= (cache.dense_pre[i - 1].array() > 0.0).cast<double>();
    } else if (arch_ == NetArch::kConv2D) {
      d = params_.dense[0].w.transpose() * d;
    }
  }
  if (arch_ == NetArch::kMlp) return grads;

  const int wh = num_states_;
  const int feat = kConvChannels2 * wh;
  auto branch_backward = [&](const std::vector<ConvLayer>& layers,
                             const ForwardCache::Branch& bcache,
                             std::vector<ConvLayer>& branch_grads,
                             int feat_offset) {
    // Un-reshape the trunk gradient into the conv output layout.
    Eigen::MatrixXd d_act(kConvChannels2, static_cast<long>(batch) * wh);
    for (int s = 0; s < batch; ++s) {
      for (int c = 0; c < kConvChannels2; ++c) {
        for (int p = 0; p < wh; ++p) {
          d_act(c, static_cast<long>(s) * wh + p) =
              d(feat_offset + c * wh + p, s);
        }
      }
    }
    for (int i = static_cast<int>(layers.size()) - 1; i >= 0; --i) {
      d_act.array() *= (bcache.pre[i].array() > 0.0).cast<double>();
      branch_grads[i].w = d_act * bcache.col[i].transpose();
      branch_grads[i].b = d_act.rowwise().sum();
      if (i > 0) {
        Eigen::MatrixXd d_col = layers[i].w.transpose() * d_act;
        d_act = Col2Im(d_col, batch, space_, layers[i].in_ch);
      }
    }
  };
  branch_backward(params_.conv_state, cache.state_branch, grads.conv_state, 0);
  branch_backward(params_.conv_mu, cache.mu_branch, grads.conv_mu, feat);
  return grads;
}

Eigen::MatrixXd QNetwork::LastHiddenBatch(const Eigen::MatrixXd& input) const {
  ForwardCache cache;
  ForwardBatch(input, &cache);
  return cache.dense_in.back();
}

NetParams QNetwork::ZeroGrads() const {
  NetParams g = params_;
  VisitTensors(g, [](auto& t) { t.setZero(); });
  return g;
}

int QNetwork::NumParams() const {
  int n = 0;
  VisitTensors(params_, [&n](const auto& t) { n += static_cast<int>(t.size()); });
  return n;
}

Eigen::VectorXd QNetwork::Flatten(const NetParams& p) {
  int n = 0;
  VisitTensors(p, [&n](const auto& t) { n += static_cast<int>(t.size()); });
  Eigen::VectorXd flat(n);
  int at = 0;
  VisitTensors(p, [&](const auto& t) {
    flat.segment(at, t.size()) =
        Eigen::Map<const Eigen::VectorXd>(t.data(), t.size());
    at += static_cast<int>(t.size());
  });
  return flat;
}

Eigen::VectorXd QNetwork::FlattenParams() const { return Flatten(params_); }

void QNetwork::UnflattenParams(const Eigen::VectorXd& flat) {
  int at = 0;
  VisitTensors(params_, [&](auto& t) {
    Eigen::Map<Eigen::VectorXd>(t.data(), t.size()) =
        flat.segment(at, t.size());
    at += static_cast<int>(t.size());
  });
  if (at != flat.size()) {
    throw std::invalid_argument("UnflattenParams: size mismatch");
  }
}

AdamOptimizer::AdamOptimizer(const QNetwork& net, AdamConfig cfg)
    : cfg_(cfg), m_(net.ZeroGrads()), v_(net.ZeroGrads()) {}

void AdamOptimizer::Step(QNetwork& net, const NetParams& grads) {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
  auto& params = net.mutable_params();

  auto update = [&](auto& p, auto& m, auto& v, const auto& g) {
    m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
    v = cfg_.beta2 * v.array().matrix() +
        (1.0 - cfg_.beta2) * g.array().square().matrix();
    p.array() -= cfg_.lr * (m.array() / bc1) /
                 ((v.array() / bc2).sqrt() + cfg_.eps);
  };
  for (size_t i = 0; i < params.conv_state.size(); ++i) {
    update(params.conv_state[i].w, m_.conv_state[i].w, v_.conv_state[i].w,
           grads.conv_state[i].w);
    update(params.conv_state[i].b, m_.conv_state[i].b, v_.conv_state[i].b,
           grads.conv_state[i].b);
  }
  for (size_t i = 0; i < params.conv_mu.size(); ++i) {
    update(params.conv_mu[i].w, m_.conv_mu[i].w, v_.conv_mu[i].w,
           grads.conv_mu[i].w);
    update(params.conv_mu[i].b, m_.conv_mu[i].b, v_.conv_mu[i].b,
           grads.conv_mu[i].b);
  }
  for (size_t i = 0; i < params.dense.size(); ++i) {
    update(params.dense[i].w, m_.dense[i].w, v_.dense[i].w, grads.dense[i].w);
    update(params.dense[i].b, m_.dense[i].b, v_.dense[i].b, grads.dense[i].b);
  }
}

void ReplayBuffer::Add(Transition t) {
  if (size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[next_] = std::move(t);  // FIFO eviction
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<const Transition*> ReplayBuffer::SampleBatch(
    int batch_size, std::mt19937_64& rng) const {
  const int n = size();
  const int k = std::min(batch_size, n);
  // Partial Fisher-Yates over an index vector: uniform without replacement.
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<const Transition*> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
    out.push_back(&data_[idx[i]]);
  }
  return out;
}

void RLConfig::Validate() const {
  if (episodes < 1 || inner_steps < 1 || batch_size < 1 || horizon < 1 ||
      target_sync < 1 || buffer_capacity < 1 || learning_rate <= 0.0 ||
      fit_epochs < 0 || fit_batch < 1 || fit_augment < 0) {
    throw std::invalid_argument("RLConfig: all sizes must be positive");
  }
  if (epsilon < 0.0 || epsilon > 1.0) {
    throw std::invalid_argument("RLConfig: epsilon must be in [0,1]");
  }
}

QNetwork MakeNetwork(const Environment& env, const RLConfig& cfg,
                     std::uint64_t seed) {
  if (cfg.arch == NetArch::kConv2D) {
    return QNetwork::Conv2D(env.states, env.num_actions(), cfg.trunk_hidden,
                            cfg.zero_mu_input, seed);
  }
  return QNetwork::Mlp(env.num_states(), env.num_actions(), cfg.hidden,
                       cfg.zero_mu_input, seed);
}

QNetwork TrainDqn(const Environment& env,
                  const std::vector<Distribution>& mu0s,
                  const std::vector<MFFlow>& bank_flows, const RLConfig& cfg) {
  cfg.Validate();
  if (mu0s.empty() || mu0s.size() != bank_flows.size()) {
    throw std::invalid_argument("TrainDqn: mu0s and bank flows must match");
  }
  for (const MFFlow& f : bank_flows) {
    if (f.length() < cfg.horizon + 1) {
      throw std::invalid_argument("TrainDqn: bank flow shorter than horizon");
    }
  }

  QNetwork net = MakeNetwork(env, cfg, SubSeed(cfg.seed, "dqn-init"));
  QNetwork target = net;
  AdamOptimizer opt(net, {cfg.learning_rate});
  ReplayBuffer buffer(cfg.buffer_capacity);
  auto env_rng = MakeRng(SubSeed(cfg.seed, "dqn-env"));
  auto batch_rng = MakeRng(SubSeed(cfg.seed, "dqn-minibatch"));
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  auto sample_index = [&](const Eigen::VectorXd& probs,
                          std::mt19937_64& rng) {
    double u = unif(rng);
    for (int i = 0; i < probs.size(); ++i) {
      u -= probs[i];
      if (u <= 0.0) return i;
    }
    return static_cast<int>(probs.size()) - 1;
  };

  long grad_steps = 0;
  for (int episode = 0; episode < cfg.episodes; ++episode) {
    std::uniform_int_distribution<int> pick_mu(
        0, static_cast<int>(mu0s.size()) - 1);
    const int mi = pick_mu(env_rng);
    const MFFlow& flow = bank_flows[mi];
    int x = sample_index(mu0s[mi].p, env_rng);

    const int steps = std::min(cfg.inner_steps, cfg.horizon);
    for (int n = 0; n < steps; ++n) {
      int a;
      if (unif(env_rng) < cfg.epsilon) {
        std::uniform_int_distribution<int> pick_a(0, env.num_actions() - 1);
        a = pick_a(env_rng);
      } else {
        // Greedy action from the target network, as collected behavior.
        const Eigen::VectorXd q = target.Forward(x, flow[n]);
        int best = 0;
        for (int j = 1; j < q.size(); ++j) {
          if (q[j] > q[best]) best = j;
        }
        a = best;
      }
      const double r = env.Reward(x, a, flow[n]);
      const int x_next = sample_index(env.TransitionRow(x, a, flow[n]), env_rng);
      Transition t;
      t.x = x;
      t.a = a;
      t.mu = flow[n];
      t.r = r;
      t.x_next = x_next;
      t.mu_next = flow[n + 1];
      t.step = n;
      t.terminal = (n + 1 == cfg.horizon);
      buffer.Add(std::move(t));
      x = x_next;
    }

    if (buffer.size() < cfg.batch_size) continue;
    const auto batch = buffer.SampleBatch(cfg.batch_size, batch_rng);
    const int bs = static_cast<int>(batch.size());
    Eigen::MatrixXd inputs(net.input_dim(), bs);
    Eigen::MatrixXd next_inputs(net.input_dim(), bs);
    for (int i = 0; i < bs; ++i) {
      inputs.col(i) = net.BuildInput(batch[i]->x, batch[i]->mu);
      next_inputs.col(i) = net.BuildInput(batch[i]->x_next, batch[i]->mu_next);
    }
    const Eigen::MatrixXd q_next = net.ForwardBatch(next_inputs);
    Eigen::VectorXd targets(bs);
    for (int i = 0; i < bs; ++i) {
      double cont = batch[i]->terminal ? 0.0 : q_next.col(i).maxCoeff();
      targets[i] = batch[i]->r + env.gamma * cont;
    }
    QNetwork::ForwardCache cache;
    const Eigen::MatrixXd q = net.ForwardBatch(inputs, &cache);
    Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(env.num_actions(), bs);
    for (int i = 0; i < bs; ++i) {
      d_out(batch[i]->a, i) =
          2.0 * (q(batch[i]->a, i) - targets[i]) / bs;
    }
    opt.Step(net, net.BackwardBatch(cache, d_out));
    ++grad_steps;
    if (grad_steps % cfg.target_sync == 0) target = net;
  }
  return net;
}

// Backward-induction q-tables with a stationary tail: beyond the horizon the
// mean field is frozen at its final value and the continuation is the fixed
// point of the frozen Bellman operator. This makes the targets a function of
// (x, mu) alone — the Q of the stationary MDP on the extended state — so a
// network without a time input can represent them consistently.
std::vector<Eigen::MatrixXd> ExactQTargets(const Environment& env,
                                           const MFFlow& flow, int horizon) {
  const int nx = env.num_states();
  const int na = env.num_actions();
  const Distribution& mu_tail = flow[horizon];

  Eigen::MatrixXd r_tail(nx, na);
  std::vector<Eigen::MatrixXd> rows_tail;  // only for mu-dependent kernels
  for (int a = 0; a < na; ++a) {
    for (int x = 0; x < nx; ++x) {
      r_tail(x, a) = env.Reward(x, a, mu_tail);
    }
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(nx);
  for (int it = 0; it < 10000; ++it) {
    Eigen::VectorXd v_new(nx);
    Eigen::MatrixXd q(nx, na);
    for (int a = 0; a < na; ++a) {
      if (!env.kernels.empty() && env.transition_mu_independent) {
        q.col(a) = r_tail.col(a) + env.gamma * (env.kernels[a] * v);
      } else {
        for (int x = 0; x < nx; ++x) {
          q(x, a) =
              r_tail(x, a) + env.gamma * env.TransitionRow(x, a, mu_tail).dot(v);
        }
      }
    }
    v_new = q.rowwise().maxCoeff();
    const double delta = (v_new - v).lpNorm<Eigen::Infinity>();
    v = std::move(v_new);
    if (delta < 1e-13) break;
  }

  std::vector<Eigen::MatrixXd> q_tables(horizon + 1,
                                        Eigen::MatrixXd::Zero(nx, na));
  Eigen::VectorXd v_next = v;
  for (int n = horizon; n >= 0; --n) {
    const Distribution& mu_n = flow[n];
    Eigen::MatrixXd& q = q_tables[n];
    for (int a = 0; a < na; ++a) {
      for (int x = 0; x < nx; ++x) {
        q(x, a) = env.Reward(x, a, mu_n);
      }
      if (!env.kernels.empty() && env.transition_mu_independent) {
        q.col(a).noalias() += env.gamma * (env.kernels[a] * v_next);
      } else {
        for (int x = 0; x < nx; ++x) {
          q(x, a) += env.gamma * env.TransitionRow(x, a, mu_n).dot(v_next);
        }
      }
    }
    v_next = q.rowwise().maxCoeff();
  }
  return q_tables;
}

FitResult FitQExact(const Environment& env,
                    const std::vector<MFFlow>& bank_flows,
                    const RLConfig& cfg) {
  cfg.Validate();
  if (bank_flows.empty()) {
    throw std::invalid_argument("FitQExact: empty bank");
  }
  QNetwork net = MakeNetwork(env, cfg, SubSeed(cfg.seed, "fit-init"));
  const int na = env.num_actions();
  const int nx = env.num_states();

  // Conditioning-flow coverage: the bank flows, plus synthetic flows so the
  // network behaves sensibly on population states it will meet at rollout
  // time (convex combinations of the bank and diffusive rollouts from random
  // initial distributions). Targets stay exact for every flow.
  std::vector<MFFlow> flows = bank_flows;
  if (cfg.fit_augment > 0) {
    const NonStationaryPolicy diffuse = NonStationaryPolicy::Repeat(
        StationaryPolicy::Uniform(nx, na), cfg.horizon);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int j = 0; j < cfg.fit_augment; ++j) {
      auto rng = MakeRng(SubSeed(cfg.seed, "fit-augment", j));
      if (j % 2 == 0) {
        Eigen::VectorXd w(bank_flows.size());
        for (int i = 0; i < w.size(); ++i) w[i] = unit(rng);
        w /= w.sum();
        MFFlow mixed;
        for (int n = 0; n <= cfg.horizon; ++n) {
          Eigen::VectorXd p = Eigen::VectorXd::Zero(nx);
          for (int i = 0; i < w.size(); ++i) {
            p += w[i] * bank_flows[i][n].p;
          }
          Distribution d(std::move(p));
          d.Renormalize();
          mixed.states.push_back(std::move(d));
        }
        flows.push_back(std::move(mixed));
      } else {
        const Distribution mu0 = RandomDistribution(
            env.states, SubSeed(cfg.seed, "fit-augment-mu0", j));
        flows.push_back(RolloutFlow(env, mu0, diffuse, cfg.horizon));
      }
    }
  }

  // Exact q-targets by backward induction against each flow, with a
  // stationary tail so equal (x, mu) pairs get equal targets.
  std::vector<std::vector<Eigen::MatrixXd>> tables;
  tables.reserve(flows.size());
  for (const MFFlow& flow : flows) {
    tables.push_back(ExactQTargets(env, flow, cfg.horizon));
  }

  const long total =
      static_cast<long>(flows.size()) * (cfg.horizon + 1) * nx;
  std::vector<long> selected(total);
  std::iota(selected.begin(), selected.end(), 0L);
  auto rng = MakeRng(SubSeed(cfg.seed, "fit-subsample"));
  if (cfg.fit_subsample > 0 && cfg.fit_subsample < total) {
    std::shuffle(selected.begin(), selected.end(), rng);
    selected.resize(cfg.fit_subsample);
    std::sort(selected.begin(), selected.end());
  }
  const long n_samples = static_cast<long>(selected.size());

  Eigen::MatrixXd inputs(net.input_dim(), n_samples);
  Eigen::MatrixXd targets(na, n_samples);
  for (long i = 0; i < n_samples; ++i) {
    const long id = selected[i];
    const int x = static_cast<int>(id % nx);
    const int n = static_cast<int>((id / nx) % (cfg.horizon + 1));
    const int f = static_cast<int>(id / (static_cast<long>(nx) *
                                         (cfg.horizon + 1)));
    inputs.col(i) = net.BuildInput(x, flows[f][n]);
    targets.col(i) = tables[f][n].row(x).transpose();
  }
  if (cfg.fit_advantage) {
    targets.array().rowwise() -= targets.array().colwise().mean();
  }

  // Standardized targets keep the regression well-conditioned; the affine
  // map is folded back into the linear output layer afterwards.
  const double t_mean = targets.mean();
  const double t_std =
      std::sqrt((targets.array() - t_mean).square().mean());
  const double t_scale = t_std > 0.0 ? t_std : 1.0;
  const Eigen::MatrixXd norm_targets =
      (targets.array() - t_mean) / t_scale;

  AdamOptimizer opt(net, {cfg.learning_rate});
  auto shuffle_rng = MakeRng(SubSeed(cfg.seed, "fit-shuffle"));
  std::vector<long> order(n_samples);
  std::iota(order.begin(), order.end(), 0L);
  for (int epoch = 0; epoch < cfg.fit_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (long at = 0; at < n_samples; at += cfg.fit_batch) {
      const long bs = std::min<long>(cfg.fit_batch, n_samples - at);
      Eigen::MatrixXd bin(net.input_dim(), bs);
      Eigen::MatrixXd btg(na, bs);
      for (long i = 0; i < bs; ++i) {
        bin.col(i) = inputs.col(order[at + i]);
        btg.col(i) = norm_targets.col(order[at + i]);
      }
      QNetwork::ForwardCache cache;
      const Eigen::MatrixXd out = net.ForwardBatch(bin, &cache);
      const Eigen::MatrixXd d_out = 2.0 * (out - btg) / (bs * na);
      opt.Step(net, net.BackwardBatch(cache, d_out));
    }
  }
  if (!net.params().dense.empty()) {
    DenseLayer& out_layer = net.mutable_params().dense.back();
    out_layer.w *= t_scale;
    out_layer.b = (out_layer.b.array() * t_scale + t_mean).matrix();
  }

  if (cfg.fit_final_least_squares && !net.params().dense.empty()) {
    // Closed-form ridge refit of the linear output layer on the trained
    // hidden features.
    const Eigen::MatrixXd h = net.LastHiddenBatch(inputs);
    const long hd = h.rows();
    Eigen::MatrixXd hb(hd + 1, n_samples);
    hb.topRows(hd) = h;
    hb.row(hd).setOnes();
    const double ridge = 1e-10 * n_samples;
    Eigen::MatrixXd gram = hb * hb.transpose();
    gram.diagonal().array() += ridge;
    const Eigen::MatrixXd sol =
        gram.ldlt().solve(hb * targets.transpose());  // (hd+1) x na
    DenseLayer& out_layer = net.mutable_params().dense.back();
    out_layer.w = sol.topRows(hd).transpose();
    out_layer.b = sol.row(hd).transpose();
  }

  const Eigen::MatrixXd final_out = net.ForwardBatch(inputs);
  const double loss =
      (final_out - targets).squaredNorm() / (n_samples * na);
  return {std::move(net), loss};
}

Eigen::VectorXd GreedyQPolicy::Act(int x, const Distribution& mu,
                                   int /*n*/) const {
  const Eigen::VectorXd q = net_->Forward(x, mu);
  int best = 0;
  for (int a = 1; a < q.size(); ++a) {
    if (q[a] > q[best]) best = a;
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(q.size());
  out[best] = 1.0;
  return out;
}

Eigen::MatrixXd GreedyQPolicy::ActAll(const Distribution& mu,
                                      int /*n*/) const {
  const int nx = net_->num_states();
  Eigen::MatrixXd inputs = Eigen::MatrixXd::Zero(net_->input_dim(), nx);
  inputs.topRows(nx) = Eigen::MatrixXd::Identity(nx, nx);
  if (!net_->zero_mu_input()) inputs.bottomRows(nx).colwise() = mu.p;
  const Eigen::MatrixXd q = net_->ForwardBatch(inputs);
  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(nx, q.rows());
  for (int x = 0; x < nx; ++x) {
    int best = 0;
    for (int a = 1; a < q.rows(); ++a) {
      if (q(a, x) > q(best, x)) best = a;
    }
    table(x, best) = 1.0;
  }
  return table;
}

namespace {

// Concatenated ReLU activation signs for kink filtering.
std::vector<bool> ActivationPattern(const QNetwork::ForwardCache& cache) {
  std::vector<bool> pattern;
  auto add = [&pattern](const std::vector<Eigen::MatrixXd>& pres) {
    for (const auto& pre : pres) {
      for (long i = 0; i < pre.size(); ++i) {
        pattern.push_back(pre.data()[i] > 0.0);
      }
    }
  };
  add(cache.state_branch.pre);
  add(cache.mu_branch.pre);
  add(cache.dense_pre);
  return pattern;
}

}  // namespace

GradientCheckReport GradientCheck(const QNetwork& net, int n_probes,
                                  std::uint64_t seed) {
  GradientCheckReport report;
  auto rng = MakeRng(SubSeed(seed, "gradcheck"));
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const int batch = 8;
  Eigen::MatrixXd inputs(net.input_dim(), batch);
  Eigen::MatrixXd targets(net.num_actions(), batch);
  for (int j = 0; j < batch; ++j) {
    for (int i = 0; i < net.input_dim(); ++i) inputs(i, j) = unif(rng);
    for (int i = 0; i < net.num_actions(); ++i) targets(i, j) = unif(rng);
  }

  QNetwork work = net;
  QNetwork::ForwardCache cache;
  const Eigen::MatrixXd out = work.ForwardBatch(inputs, &cache);
  const Eigen::MatrixXd d_out = out - targets;  // loss = 0.5 ||out - T||^2
  const Eigen::VectorXd grad = QNetwork::Flatten(
      work.BackwardBatch(cache, d_out));
  Eigen::VectorXd theta = work.FlattenParams();

  auto loss_and_pattern = [&](const Eigen::VectorXd& params,
                              std::vector<bool>* pattern) {
    work.UnflattenParams(params);
    QNetwork::ForwardCache c;
    const Eigen::MatrixXd o = work.ForwardBatch(inputs, &c);
    if (pattern) *pattern = ActivationPattern(c);
    return 0.5 * (o - targets).squaredNorm();
  };
  std::vector<bool> base_pattern = ActivationPattern(cache);

  std::uniform_int_distribution<int> pick(0, static_cast<int>(theta.size()) - 1);
  const double h = 1e-5;
  for (int probe = 0; probe < n_probes; ++probe) {
    const int i = pick(rng);
    Eigen::VectorXd tp = theta, tm = theta;
    const double step = h * std::max(1.0, std::abs(theta[i]));
    tp[i] += step;
    tm[i] -= step;
    std::vector<bool> pat_p, pat_m;
    const double lp = loss_and_pattern(tp, &pat_p);
    const double lm = loss_and_pattern(tm, &pat_m);
    if (pat_p != base_pattern || pat_m != base_pattern) {
      ++report.skipped;  // perturbation crossed a ReLU kink
      continue;
    }
    const double fd = (lp - lm) / (2.0 * step);
    const double denom = std::max(1e-8, std::abs(fd) + std::abs(grad[i]));
    report.max_rel_err =
        std::max(report.max_rel_err, std::abs(fd - grad[i]) / denom);
    ++report.probes;
  }
  work.UnflattenParams(theta);
  return report;
}

}  // namespace mfg
