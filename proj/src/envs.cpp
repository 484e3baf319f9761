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

#include "mfg/envs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mfg/rng.hpp"

namespace mfg {
namespace {

// Deterministic displacement with clamped walls: moving into a boundary
// leaves the state unchanged (the move cost is still charged).
std::vector<Eigen::MatrixXd> ClampedKernels(const StateSpace& space,
                                            const ActionSpace& actions) {
  const int nx = space.size();
  std::vector<Eigen::MatrixXd> kernels(actions.size(),
                                       Eigen::MatrixXd::Zero(nx, nx));
  for (int a = 0; a < actions.size(); ++a) {
    for (int s = 0; s < nx; ++s) {
      const int x = std::clamp(space.XOf(s) + actions.moves[a].x(), 0,
                               space.width - 1);
      const int y = std::clamp(space.YOf(s) + actions.moves[a].y(), 0,
                               space.height - 1);
      kernels[a](s, space.IndexOf(x, y)) = 1.0;
    }
  }
  return kernels;
}

}  // namespace

Environment MakeExploration1D(const Exploration1DConfig& cfg) {
  if (cfg.size < 2) throw std::invalid_argument("exploration1d: size < 2");
  if (cfg.mu_clip <= 0.0 || cfg.mu_clip >= 1.0 / cfg.size) {
    throw std::invalid_argument("exploration1d: mu_clip out of range");
  }
  Environment env;
  env.states = StateSpace::Line(cfg.size);
  env.actions = ActionSpace::Line1D();
  env.gamma = cfg.gamma;
  env.transition_mu_independent = true;
  env.kernels = ClampedKernels(env.states, env.actions);

  const double move_cost = 1.0 / cfg.size;
  const ActionSpace actions = env.actions;
  env.reward_action = [actions, move_cost](int, int a) {
    return -move_cost * actions.L1Cost(a);
  };
  const double clip = cfg.mu_clip;
  env.reward_mf = [clip](int x, const Distribution& mu) {
    return -std::log(std::max(mu.p[x], clip));
  };
  return env;
}

Environment MakeBeachBar2D(const BeachBar2DConfig& cfg) {
  if (cfg.width < 2 || cfg.height < 2) {
    throw std::invalid_argument("beachbar2d: grid too small");
  }
  const int nx = cfg.width * cfg.height;
  if (cfg.mu_clip <= 0.0 || cfg.mu_clip >= 1.0 / nx) {
    throw std::invalid_argument("beachbar2d: mu_clip out of range");
  }
  const int bar_x = cfg.bar_x < 0 ? cfg.width / 2 : cfg.bar_x;
  const int bar_y = cfg.bar_y < 0 ? cfg.height / 2 : cfg.bar_y;
  if (bar_x < 0 || bar_x >= cfg.width || bar_y < 0 || bar_y >= cfg.height) {
    throw std::invalid_argument("beachbar2d: bar outside grid");
  }

  Environment env;
  env.states = StateSpace::Grid(cfg.width, cfg.height);
  env.actions = cfg.include_stay ? ActionSpace::Grid5() : ActionSpace::Grid4();
  env.gamma = cfg.gamma;
  env.transition_mu_independent = true;
  env.kernels = ClampedKernels(env.states, env.actions);

  const double move_cost = 1.0 / nx;
  const ActionSpace actions = env.actions;
  env.reward_action = [actions, move_cost](int, int a) {
    return -move_cost * actions.L1Cost(a);
  };

  const StateSpace space = env.states;
  const int bar = space.IndexOf(bar_x, bar_y);
  const double dist_scale = 1.0 / (cfg.width + cfg.height);
  const double clip = cfg.mu_clip;
  env.reward_mf = [space, bar, dist_scale, clip](int x,
                                                 const Distribution& mu) {
    const double d_bar = -dist_scale * space.L1Distance(x, bar);
    return d_bar - std::log(std::max(mu.p[x], clip));
  };
  return env;
}

Distribution GaussianDistribution(const StateSpace& space,
                                  const Eigen::Vector2d& mean,
                                  double variance) {
  if (variance <= 0.0) {
    throw std::invalid_argument("gaussian: variance must be positive");
  }
  const int nx = space.size();
  Eigen::VectorXd p(nx);
  for (int s = 0; s < nx; ++s) {
    const double dx = space.XOf(s) - mean.x();
    const double dy = space.YOf(s) - mean.y();
    p[s] = std::exp(-(dx * dx + dy * dy) / (2.0 * variance));
  }
  Distribution out(std::move(p));
  out.Renormalize();
  return out;
}

Distribution RandomDistribution(const StateSpace& space, std::uint64_t seed) {
  const int nx = space.size();
  auto rng = MakeRng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd p(nx);
  for (int s = 0; s < nx; ++s) {
    double v = unif(rng);
    while (v == 0.0) v = unif(rng);  // keep every entry strictly positive
    p[s] = v;
  }
  Distribution out(std::move(p));
  out.Renormalize();
  return out;
}

DistributionSet MakeTrainingSet(const StateSpace& space) {
  DistributionSet set;
  set.kind = DistributionSet::Kind::kTraining;
  if (space.geometry == StateSpace::Geometry::kLine) {
    const int n = space.width;
    const double sigma = n / 10.0;
    for (int i = 1; i <= 4; ++i) {
      const double mean = std::round(i * n / 5.0);
      DistributionSetEntry e;
      e.name = "train_gauss_" + std::to_string(i - 1);
      e.mu = GaussianDistribution(space, {mean, 0.0}, sigma * sigma);
      e.provenance = "gaussian mean=" + std::to_string(mean) +
                     " var=" + std::to_string(sigma * sigma);
      set.entries.push_back(std::move(e));
    }
  } else {
    // Quadrant centers.
    const double w = space.width, h = space.height;
    const double sigma = std::min(w, h) / 8.0;
    const Eigen::Vector2d means[4] = {{w / 4.0, h / 4.0},
                                      {3.0 * w / 4.0, h / 4.0},
                                      {w / 4.0, 3.0 * h / 4.0},
                                      {3.0 * w / 4.0, 3.0 * h / 4.0}};
    for (int i = 0; i < 4; ++i) {
      DistributionSetEntry e;
      e.name = "train_gauss_" + std::to_string(i);
      e.mu = GaussianDistribution(space, means[i], sigma * sigma);
      e.provenance = "gaussian mean=(" + std::to_string(means[i].x()) + "," +
                     std::to_string(means[i].y()) +
                     ") var=" + std::to_string(sigma * sigma);
      set.entries.push_back(std::move(e));
    }
  }
  return set;
}

DistributionSet MakeTestingSet(const StateSpace& space, std::uint64_t seed) {
  DistributionSet set;
  set.kind = DistributionSet::Kind::kTesting;
  for (int i = 0; i < 4; ++i) {
    DistributionSetEntry e;
    const std::uint64_t s = SubSeed(seed, "testing-random", i);
    e.name = "test_random_" + std::to_string(i);
    e.mu = RandomDistribution(space, s);
    e.provenance = "random seed=" + std::to_string(s);
    set.entries.push_back(std::move(e));
  }
  if (space.geometry == StateSpace::Geometry::kLine) {
    // Means halfway between the training means, varied variances.
    const int n = space.width;
    const double base = n / 10.0;
    const double means[3] = {1.5 * n / 5.0, 2.5 * n / 5.0, 3.5 * n / 5.0};
    const double sigmas[3] = {0.6 * base, base, 1.5 * base};
    for (int i = 0; i < 3; ++i) {
      DistributionSetEntry e;
      e.name = "test_gauss_" + std::to_string(i);
      e.mu = GaussianDistribution(space, {means[i], 0.0},
                                  sigmas[i] * sigmas[i]);
      e.provenance = "gaussian mean=" + std::to_string(means[i]) +
                     " var=" + std::to_string(sigmas[i] * sigmas[i]);
      set.entries.push_back(std::move(e));
    }
  } else {
    const double w = space.width, h = space.height;
    const double base = std::min(w, h) / 8.0;
    const Eigen::Vector2d means[3] = {
        {w / 2.0, h / 2.0}, {w / 2.0, h / 4.0}, {w / 4.0, h / 2.0}};
    const double sigmas[3] = {0.6 * base, base, 1.5 * base};
    for (int i = 0; i < 3; ++i) {
      DistributionSetEntry e;
      e.name = "test_gauss_" + std::to_string(i);
      e.mu = GaussianDistribution(space, means[i], sigmas[i] * sigmas[i]);
      e.provenance = "gaussian mean=(" + std::to_string(means[i].x()) + "," +
                     std::to_string(means[i].y()) +
                     ") var=" + std::to_string(sigmas[i] * sigmas[i]);
      set.entries.push_back(std::move(e));
    }
  }
  return set;
}

MonotonicityReport CheckMonotonicity(const Environment& env, int n_pairs,
                                     std::uint64_t seed) {
  MonotonicityReport report;
  report.pairs = n_pairs;
  report.min_margin = -std::numeric_limits<double>::infinity();
  const int nx = env.num_states();
  for (int i = 0; i < n_pairs; ++i) {
    Distribution mu = RandomDistribution(env.states, SubSeed(seed, "mono-a", i));
    Distribution nu = RandomDistribution(env.states, SubSeed(seed, "mono-b", i));
    int redraw = 0;
    while ((mu.p - nu.p).lpNorm<Eigen::Infinity>() == 0.0) {
      nu = RandomDistribution(env.states,
                              SubSeed(seed, "mono-redraw", i * 1000 + redraw++));
    }
    double sum = 0.0;
    for (int x = 0; x < nx; ++x) {
      sum += (mu.p[x] - nu.p[x]) * (env.reward_mf(x, mu) - env.reward_mf(x, nu));
    }
    if (sum >= 0.0) ++report.violations;
    report.min_margin = std::max(report.min_margin, sum);
  }
  return report;
}

}  // namespace mfg
