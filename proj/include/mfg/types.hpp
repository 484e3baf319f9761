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

#ifndef MFG_TYPES_H_
#define MFG_TYPES_H_

#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace mfg {

constexpr double kProbTolerance = 1e-9;

// Finite state space on a 1-D line or a 2-D grid. States are indexed
// row-major: index = y * width + x.
struct StateSpace {
  enum class Geometry { kLine, kGrid };

  Geometry geometry = Geometry::kLine;
  int width = 1;
  int height = 1;

  static StateSpace Line(int n) {
    if (n < 1) throw std::invalid_argument("StateSpace::Line: n must be >= 1");
    return {Geometry::kLine, n, 1};
  }
  static StateSpace Grid(int w, int h) {
    if (w < 1 || h < 1) {
      throw std::invalid_argument("StateSpace::Grid: dims must be >= 1");
    }
    return {Geometry::kGrid, w, h};
  }

  int size() const { return width * height; }
  int XOf(int index) const { return index % width; }
  int YOf(int index) const { return index / width; }
  int IndexOf(int x, int y) const { return y * width + x; }

  // L1 distance between two states in grid units.
  int L1Distance(int i, int j) const {
    return std::abs(XOf(i) - XOf(j)) + std::abs(YOf(i) - YOf(j));
  }
  // Largest L1 distance between any two states.
  int Diameter() const { return (width - 1) + (height - 1); }
};

// Displacement actions; (dx, dy) with dy = 0 on a line.
struct ActionSpace {
  std::vector<Eigen::Vector2i> moves;

  int size() const { return static_cast<int>(moves.size()); }
  int L1Cost(int a) const {
    return std::abs(moves[a].x()) + std::abs(moves[a].y());
  }

  // {-1, 0, +1} on a line.
  static ActionSpace Line1D() {
    return {{{-1, 0}, {0, 0}, {1, 0}}};
  }
  // {stay, up, down, left, right}.
  static ActionSpace Grid5() {
    return {{{0, 0}, {0, -1}, {0, 1}, {-1, 0}, {1, 0}}};
  }
  // Four moves only, no stay.
  static ActionSpace Grid4() {
    return {{{0, -1}, {0, 1}, {-1, 0}, {1, 0}}};
  }
};

// Probability vector over the state space (an MF state).
struct Distribution {
  Eigen::VectorXd p;

  Distribution() = default;
  explicit Distribution(Eigen::VectorXd probs) : p(std::move(probs)) {}

  int size() const { return static_cast<int>(p.size()); }

  bool IsValid(double tol = kProbTolerance) const {
    if (p.size() < 1) return false;
    if ((p.array() < -tol).any()) return false;
    return std::abs(p.sum() - 1.0) <= tol;
  }

  void Renormalize() {
    p = p.cwiseMax(0.0);
    const double s = p.sum();
    if (s <= 0.0) throw std::runtime_error("Distribution: zero total mass");
    p /= s;
  }

  static Distribution Delta(int n, int x) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v[x] = 1.0;
    return Distribution(std::move(v));
  }
  static Distribution Uniform(int n) {
    return Distribution(Eigen::VectorXd::Constant(n, 1.0 / n));
  }
};

// Truncated MF flow: distributions at steps 0..N_T.
struct MFFlow {
  std::vector<Distribution> states;

  MFFlow() = default;
  explicit MFFlow(std::vector<Distribution> s) : states(std::move(s)) {}

  int length() const { return static_cast<int>(states.size()); }
  const Distribution& operator[](int n) const { return states[n]; }
  Distribution& operator[](int n) { return states[n]; }

  static MFFlow Constant(const Distribution& mu, int horizon) {
    return MFFlow(std::vector<Distribution>(horizon + 1, mu));
  }
};

// Row x holds the action distribution played in state x.
struct StationaryPolicy {
  Eigen::MatrixXd table;  // |X| x |A|

  StationaryPolicy() = default;
  explicit StationaryPolicy(Eigen::MatrixXd t) : table(std::move(t)) {}

  bool IsValid(double tol = kProbTolerance) const {
    if (table.size() == 0) return false;
    for (int x = 0; x < table.rows(); ++x) {
      if ((table.row(x).array() < -tol).any()) return false;
      if (std::abs(table.row(x).sum() - 1.0) > tol) return false;
    }
    return true;
  }

  static StationaryPolicy Uniform(int num_states, int num_actions) {
    return StationaryPolicy(Eigen::MatrixXd::Constant(num_states, num_actions,
                                                      1.0 / num_actions));
  }
  // Deterministic policy playing `a` everywhere.
  static StationaryPolicy Pure(int num_states, int num_actions, int a) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(num_states, num_actions);
    t.col(a).setOnes();
    return StationaryPolicy(std::move(t));
  }
};

struct NonStationaryPolicy {
  std::vector<StationaryPolicy> steps;

  NonStationaryPolicy() = default;
  explicit NonStationaryPolicy(std::vector<StationaryPolicy> s)
      : steps(std::move(s)) {}

  int length() const { return static_cast<int>(steps.size()); }
  const StationaryPolicy& operator[](int n) const { return steps[n]; }
  StationaryPolicy& operator[](int n) { return steps[n]; }

  static NonStationaryPolicy Repeat(const StationaryPolicy& pi, int horizon) {
    return NonStationaryPolicy(
        std::vector<StationaryPolicy>(horizon + 1, pi));
  }
};

// Policy conditioned on (state, MF state). The step index is provided for
// wrappers around time-indexed policies; most implementations ignore it.
class PopulationPolicy {
 public:
  virtual ~PopulationPolicy() = default;
  // Returns a probability vector over actions.
  virtual Eigen::VectorXd Act(int x, const Distribution& mu, int n) const = 0;

  // Action distributions for every state at once (|X| x |A|). Overridden
  // where a batched evaluation is cheaper than |X| single queries.
  virtual Eigen::MatrixXd ActAll(const Distribution& mu, int n) const {
    const Eigen::VectorXd first = Act(0, mu, n);
    Eigen::MatrixXd t(mu.size(), first.size());
    t.row(0) = first.transpose();
    for (int x = 1; x < mu.size(); ++x) {
      t.row(x) = Act(x, mu, n).transpose();
    }
    return t;
  }
};

class UniformRandomPopulationPolicy : public PopulationPolicy {
 public:
  explicit UniformRandomPopulationPolicy(int num_actions)
      : num_actions_(num_actions) {}
  Eigen::VectorXd Act(int, const Distribution&, int) const override {
    return Eigen::VectorXd::Constant(num_actions_, 1.0 / num_actions_);
  }

 private:
  int num_actions_;
};

// Ignores the population and replays a fixed time-indexed policy; past the
// horizon the last step is repeated.
class UnconditionedPopulationPolicy : public PopulationPolicy {
 public:
  explicit UnconditionedPopulationPolicy(NonStationaryPolicy pi)
      : pi_(std::move(pi)) {}
  Eigen::VectorXd Act(int x, const Distribution&, int n) const override {
    const int m = std::min(n, pi_.length() - 1);
    return pi_[m].table.row(x).transpose();
  }

 private:
  NonStationaryPolicy pi_;
};

// Transition kernel, separable reward r = r_A + r_M, and discount.
struct Environment {
  StateSpace states;
  ActionSpace actions;
  double gamma = 0.9;
  bool transition_mu_independent = true;

  std::function<double(int x, int a)> reward_action;
  std::function<double(int x, const Distribution& mu)> reward_mf;
  // Row distribution over next states. Only consulted when `kernels` is
  // empty or the transition depends on mu.
  std::function<Eigen::VectorXd(int x, int a, const Distribution& mu)>
      transition_fn;
  // Per-action row-stochastic |X| x |X| matrices, usable when the transition
  // ignores mu.
  std::vector<Eigen::MatrixXd> kernels;

  int num_states() const { return states.size(); }
  int num_actions() const { return actions.size(); }

  double Reward(int x, int a, const Distribution& mu) const {
    return reward_action(x, a) + reward_mf(x, mu);
  }

  Eigen::VectorXd TransitionRow(int x, int a, const Distribution& mu) const {
    if (!kernels.empty() && transition_mu_independent) {
      return kernels[a].row(x).transpose();
    }
    return transition_fn(x, a, mu);
  }

  void CheckDistribution(const Distribution& mu) const {
    if (mu.size() != num_states()) {
      throw std::invalid_argument("distribution size does not match env");
    }
  }
};

// Backward-induction value and q tables at steps 0..N_T.
struct ValueTable {
  Eigen::MatrixXd values;            // (N_T+1) x |X|
  std::vector<Eigen::MatrixXd> q;    // per step: |X| x |A|
};

}  // namespace mfg

#endif  // MFG_TYPES_H_
