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

#include "mfg/metrics.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>

namespace mfg {
namespace {

// Masses are scaled to integers so the transport problem is solved exactly;
// the residual quantization error is bounded by |X| * diameter / kMassScale.
constexpr double kMassScale = 1e12;

void CheckSameSpace(const Distribution& mu, const Distribution& nu,
                    const GroundMetric& g) {
  if (mu.size() != nu.size() || mu.size() != g.space.size()) {
    throw std::invalid_argument("wasserstein: dimension mismatch");
  }
}

// Min-cost max-flow with Dijkstra on reduced costs (Johnson potentials).
// Costs are nonnegative doubles; capacities are integers.
class MinCostFlowSolver {
 public:
  explicit MinCostFlowSolver(int n) : graph_(n), potential_(n, 0.0) {}

  void AddEdge(int from, int to, std::int64_t capacity, double cost) {
    graph_[from].push_back(
        {to, static_cast<int>(graph_[to].size()), capacity, cost});
    graph_[to].push_back(
        {from, static_cast<int>(graph_[from].size()) - 1, 0, -cost});
  }

  // Returns total cost of the min-cost flow of the given amount.
  double Solve(int source, int sink, std::int64_t amount) {
    const int n = static_cast<int>(graph_.size());
    double total_cost = 0.0;
    while (amount > 0) {
      std::vector<double> dist(n, std::numeric_limits<double>::infinity());
      std::vector<int> prev_node(n, -1), prev_edge(n, -1);
      using Item = std::pair<double, int>;
      std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
      dist[source] = 0.0;
      pq.push({0.0, source});
      while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        for (int e = 0; e < static_cast<int>(graph_[u].size()); ++e) {
          const Edge& edge = graph_[u][e];
          if (edge.capacity <= 0) continue;
          const double nd =
              d + edge.cost + potential_[u] - potential_[edge.to];
          if (nd < dist[edge.to] - 1e-15) {
            dist[edge.to] = nd;
            prev_node[edge.to] = u;
            prev_edge[edge.to] = e;
            pq.push({nd, edge.to});
          }
        }
      }
      if (!std::isfinite(dist[sink])) {
        throw std::runtime_error("min-cost flow: sink unreachable");
      }
      for (int v = 0; v < n; ++v) {
        if (std::isfinite(dist[v])) potential_[v] += dist[v];
      }
      std::int64_t push = amount;
      for (int v = sink; v != source; v = prev_node[v]) {
        push = std::min(push, graph_[prev_node[v]][prev_edge[v]].capacity);
      }
      for (int v = sink; v != source; v = prev_node[v]) {
        Edge& e = graph_[prev_node[v]][prev_edge[v]];
        e.capacity -= push;
        graph_[v][e.rev].capacity += push;
        total_cost += push * e.cost;
      }
      amount -= push;
    }
    return total_cost;
  }

 private:
  struct Edge {
    int to;
    int rev;
    std::int64_t capacity;
    double cost;
  };
  std::vector<std::vector<Edge>> graph_;
  std::vector<double> potential_;
};

// Rounds the signed excesses mu - nu to integers that sum to zero exactly.
std::vector<std::int64_t> ScaledExcess(const Distribution& mu,
                                       const Distribution& nu) {
  const int n = mu.size();
  std::vector<std::int64_t> excess(n);
  std::int64_t total = 0;
  int largest = 0;
  for (int i = 0; i < n; ++i) {
    excess[i] = std::llround((mu.p[i] - nu.p[i]) * kMassScale);
    total += excess[i];
    if (std::abs(mu.p[i] - nu.p[i]) > std::abs(mu.p[largest] - nu.p[largest]))
      largest = i;
  }
  excess[largest] -= total;
  return excess;
}

}  // namespace

GroundMetric GroundMetric::FromStateSpace(const StateSpace& space,
                                          bool normalized) {
  GroundMetric g;
  g.space = space;
  g.normalized = normalized;
  const int n = space.size();
  const double scale =
      normalized && space.Diameter() > 0 ? 1.0 / space.Diameter() : 1.0;
  g.distances.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      g.distances(i, j) = scale * space.L1Distance(i, j);
    }
  }
  return g;
}

double WassersteinClosedForm1D(const Distribution& mu, const Distribution& nu,
                               const GroundMetric& g) {
  CheckSameSpace(mu, nu, g);
  if (g.space.geometry != StateSpace::Geometry::kLine) {
    throw std::invalid_argument("closed form requires Line geometry");
  }
  const int n = mu.size();
  if (n == 1) return 0.0;
  const double spacing = g.normalized ? 1.0 / (n - 1) : 1.0;
  double cdf_gap = 0.0;
  double total = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    cdf_gap += mu.p[i] - nu.p[i];
    total += std::abs(cdf_gap);
  }
  return spacing * total;
}

double WassersteinMinCostFlow(const Distribution& mu, const Distribution& nu,
                              const GroundMetric& g) {
  CheckSameSpace(mu, nu, g);
  const int n = mu.size();
  const std::vector<std::int64_t> excess = ScaledExcess(mu, nu);
  std::vector<int> sources, sinks;
  for (int i = 0; i < n; ++i) {
    if (excess[i] > 0) sources.push_back(i);
    if (excess[i] < 0) sinks.push_back(i);
  }
  if (sources.empty()) return 0.0;

  // Node layout: 0 = super source, 1 = super sink, then sources, then sinks.
  MinCostFlowSolver solver(2 + static_cast<int>(sources.size()) +
                           static_cast<int>(sinks.size()));
  std::int64_t supply = 0;
  for (int i = 0; i < static_cast<int>(sources.size()); ++i) {
    solver.AddEdge(0, 2 + i, excess[sources[i]], 0.0);
    supply += excess[sources[i]];
  }
  const int sink_base = 2 + static_cast<int>(sources.size());
  for (int j = 0; j < static_cast<int>(sinks.size()); ++j) {
    solver.AddEdge(sink_base + j, 1, -excess[sinks[j]], 0.0);
  }
  for (int i = 0; i < static_cast<int>(sources.size()); ++i) {
    for (int j = 0; j < static_cast<int>(sinks.size()); ++j) {
      solver.AddEdge(2 + i, sink_base + j,
                     std::numeric_limits<std::int64_t>::max() / 4,
                     g(sources[i], sinks[j]));
    }
  }
  return solver.Solve(0, 1, supply) / kMassScale;
}

double Wasserstein(const Distribution& mu, const Distribution& nu,
                   const GroundMetric& g) {
  if (g.space.geometry == StateSpace::Geometry::kLine) {
    return WassersteinClosedForm1D(mu, nu, g);
  }
  return WassersteinMinCostFlow(mu, nu, g);
}

double FlowDistance(const MFFlow& a, const MFFlow& b, const GroundMetric& g,
                    int horizon) {
  if (a.length() < horizon + 1 || b.length() < horizon + 1) {
    throw std::invalid_argument("flow distance: flows shorter than horizon");
  }
  double total = 0.0;
  for (int n = 0; n <= horizon; ++n) {
    total += Wasserstein(a[n], b[n], g);
  }
  return total / (horizon + 1);
}

std::pair<PerformanceMatrix, PerformanceMatrix> PerformanceMatrices(
    const Environment& env, const std::vector<BenchmarkRow>& rows,
    const DistributionSet& distributions,
    const std::vector<MFFlow>& reference_flows, int horizon,
    const GroundMetric& g) {
  if (reference_flows.size() != static_cast<size_t>(distributions.size())) {
    throw std::invalid_argument(
        "performance matrices: missing reference flow for a column");
  }
  const int nr = static_cast<int>(rows.size());
  const int nc = distributions.size();
  PerformanceMatrix w{MatrixKind::kWasserstein, {}, {},
                      Eigen::MatrixXd::Zero(nr, nc)};
  PerformanceMatrix e{MatrixKind::kExploitability, {}, {},
                      Eigen::MatrixXd::Zero(nr, nc)};
  for (const BenchmarkRow& row : rows) {
    w.row_labels.push_back(row.label);
    e.row_labels.push_back(row.label);
  }
  for (const DistributionSetEntry& entry : distributions.entries) {
    w.col_labels.push_back(entry.name);
    e.col_labels.push_back(entry.name);
  }
  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < nc; ++j) {
      const auto [pi, flow] = rows[i].realize(distributions.mu(j));
      w.values(i, j) = FlowDistance(flow, reference_flows[j], g, horizon);
      e.values(i, j) = Exploitability(env, distributions.mu(j), pi, horizon);
    }
  }
  return {std::move(w), std::move(e)};
}

Eigen::MatrixXd Log10Floored(const Eigen::MatrixXd& values) {
  return values.cwiseMax(1e-12).array().log10();
}

}  // namespace mfg
