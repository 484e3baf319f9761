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
// Wasserstein distance between MF states (exact optimal transport), flow
// distance, and the benchmark performance matrices.

#ifndef MFG_METRICS_H_
#define MFG_METRICS_H_

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mfg/core.hpp"
#include "mfg/envs.hpp"
#include "mfg/types.hpp"

namespace mfg {

// Pairwise L1 grid distances, optionally normalized by the domain diameter
// so 1-D and 2-D numbers are comparable.
struct GroundMetric {
  StateSpace space;
  bool normalized = true;
  Eigen::MatrixXd distances;  // |X| x |X|

  static GroundMetric FromStateSpace(const StateSpace& space,
                                     bool normalized = true);
  double operator()(int i, int j) const { return distances(i, j); }
};

// Exact W1 via the CDF difference; Line geometry only.
double WassersteinClosedForm1D(const Distribution& mu, const Distribution& nu,
                               const GroundMetric& g);

// Exact W1 via min-cost flow (successive shortest paths with potentials) on
// integer-scaled masses; works on any geometry.
double WassersteinMinCostFlow(const Distribution& mu, const Distribution& nu,
                              const GroundMetric& g);

// Dispatches to the closed form on Line geometry and min-cost flow on Grid.
double Wasserstein(const Distribution& mu, const Distribution& nu,
                   const GroundMetric& g);

// Time-averaged Wasserstein distance between two flows over steps
// 0..horizon.
double FlowDistance(const MFFlow& a, const MFFlow& b, const GroundMetric& g,
                    int horizon);

enum class MatrixKind { kWasserstein, kExploitability };

struct PerformanceMatrix {
  MatrixKind kind = MatrixKind::kWasserstein;
  std::vector<std::string> row_labels;  // policies
  std::vector<std::string> col_labels;  // initial distributions
  Eigen::MatrixXd values;
};

// A benchmark row: given an initial distribution, produce the reduced
// population-agnostic policy played from it together with its induced flow.
struct BenchmarkRow {
  std::string label;
  std::function<std::pair<NonStationaryPolicy, MFFlow>(const Distribution&)>
      realize;
};

// W[i][j]: time-averaged distance between the flow of policy i from mu0^j
// and the reference (equilibrium) flow for column j.
// E[i][j]: exploitability of policy i from mu0^j.
std::pair<PerformanceMatrix, PerformanceMatrix> PerformanceMatrices(
    const Environment& env, const std::vector<BenchmarkRow>& rows,
    const DistributionSet& distributions,
    const std::vector<MFFlow>& reference_flows, int horizon,
    const GroundMetric& g);

// log10 with zeros floored at 1e-12, for heatmap-style exports.
Eigen::MatrixXd Log10Floored(const Eigen::MatrixXd& values);

}  // namespace mfg

#endif  // MFG_METRICS_H_
