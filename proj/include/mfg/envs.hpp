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
// The two benchmark environments, distribution-set generators and the
// monotonicity checker.

#ifndef MFG_ENVS_H_
#define MFG_ENVS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "mfg/types.hpp"

namespace mfg {

// 1-D crowd-aversion environment: r(x, a, mu) = -log(mu(x)) - |a| / |X|,
// deterministic moves with clamped walls.
struct Exploration1DConfig {
  int size = 32;
  double gamma = 0.9;
  double mu_clip = 1e-10;  // epsilon inside the log
};

// 2-D beach bar: r(x, a, mu) = d_bar(x) - log(mu(x)) - ||a||_1 / |X| where
// d_bar is the negated L1 distance to the bar, normalized by w + h.
struct BeachBar2DConfig {
  int width = 16;
  int height = 16;
  int bar_x = -1;  // -1: center of the grid
  int bar_y = -1;
  double gamma = 0.9;
  double mu_clip = 1e-10;
  bool include_stay = true;  // four-move variant when false
};

Environment MakeExploration1D(const Exploration1DConfig& cfg);
Environment MakeBeachBar2D(const BeachBar2DConfig& cfg);

// Isotropic Gaussian density sampled at cell centers, then normalized.
Distribution GaussianDistribution(const StateSpace& space,
                                  const Eigen::Vector2d& mean,
                                  double variance);

// Independent uniform(0,1) weight per state, normalized. Reproducible.
Distribution RandomDistribution(const StateSpace& space, std::uint64_t seed);

struct DistributionSetEntry {
  std::string name;
  Distribution mu;
  // Provenance: Gaussian parameters or the RNG seed.
  std::string provenance;
};

struct DistributionSet {
  enum class Kind { kTraining, kTesting };
  Kind kind = Kind::kTraining;
  std::vector<DistributionSetEntry> entries;

  int size() const { return static_cast<int>(entries.size()); }
  const Distribution& mu(int i) const { return entries[i].mu; }
};

// Four Gaussians with evenly spaced means covering the domain.
DistributionSet MakeTrainingSet(const StateSpace& space);

// Random distributions plus Gaussians with means between the training means
// and various variances.
DistributionSet MakeTestingSet(const StateSpace& space, std::uint64_t seed);

struct MonotonicityReport {
  int pairs = 0;
  int violations = 0;       // samples with nonnegative monotonicity sum
  double min_margin = 0.0;  // largest (least negative) sampled sum
};

// Samples random pairs mu != mu' and evaluates
// sum_x (mu - mu')(x) (r_M(x, mu) - r_M(x, mu')).
MonotonicityReport CheckMonotonicity(const Environment& env, int n_pairs,
                                     std::uint64_t seed);

}  // namespace mfg

#endif  // MFG_ENVS_H_
