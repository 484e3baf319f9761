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

#include "doctest.h"

#include <cmath>

#include "lp_oracle.h"
#include "mfg/envs.hpp"
#include "mfg/metrics.hpp"
#include "mfg/rng.hpp"

namespace mfg {
namespace {

using test_oracle::TransportLp;

TEST_SUITE("metrics") {

TEST_CASE("wasserstein between deltas is the normalized grid distance") {
  const StateSpace line = StateSpace::Line(8);
  const GroundMetric g = GroundMetric::FromStateSpace(line);
  CHECK(Wasserstein(Distribution::Delta(8, 0), Distribution::Delta(8, 7), g) ==
        doctest::Approx(1.0));
  CHECK(Wasserstein(Distribution::Delta(8, 2), Distribution::Delta(8, 4), g) ==
        doctest::Approx(2.0 / 7.0));

  const StateSpace grid = StateSpace::Grid(4, 4);
  const GroundMetric gg = GroundMetric::FromStateSpace(grid);
  const int a = grid.IndexOf(0, 0), b = grid.IndexOf(3, 2);
  CHECK(Wasserstein(Distribution::Delta(16, a), Distribution::Delta(16, b),
                    gg) == doctest::Approx(5.0 / 6.0).epsilon(1e-9));
}

TEST_CASE("1-d closed form, hand-worked two-point split") {
  // mu = (1, 0), nu = (0, 1) on a 2-state line: move all mass one cell.
  const StateSpace line = StateSpace::Line(2);
  const GroundMetric g = GroundMetric::FromStateSpace(line);
  CHECK(WassersteinClosedForm1D(Distribution::Delta(2, 0),
                                Distribution::Delta(2, 1), g) ==
        doctest::Approx(1.0));
  // Half the mass moves: W = 0.5.
  Distribution half(Eigen::Vector2d(0.5, 0.5));
  CHECK(WassersteinClosedForm1D(Distribution::Delta(2, 0), half, g) ==
        doctest::Approx(0.5));
}

TEST_CASE("closed form agrees with min-cost flow on 100 random pairs") {
  const StateSpace line = StateSpace::Line(32);
  const GroundMetric g = GroundMetric::FromStateSpace(line);
  for (int t = 0; t < 100; ++t) {
    const Distribution a = RandomDistribution(line, SubSeed(3, "wa", t));
    const Distribution b = RandomDistribution(line, SubSeed(3, "wb", t));
    CHECK(WassersteinClosedForm1D(a, b, g) ==
          doctest::Approx(WassersteinMinCostFlow(a, b, g)).epsilon(1e-9));
  }
}

TEST_CASE("min-cost flow agrees with a dense simplex LP on 8 states") {
  for (const StateSpace space : {StateSpace::Line(8), StateSpace::Grid(4, 2)}) {
    const GroundMetric g = GroundMetric::FromStateSpace(space);
    for (int t = 0; t < 20; ++t) {
      const Distribution a = RandomDistribution(space, SubSeed(5, "lpa", t));
      const Distribution b = RandomDistribution(space, SubSeed(5, "lpb", t));
      const double w = WassersteinMinCostFlow(a, b, g);
      const double lp = TransportLp(a, b, g);
      CHECK(std::abs(w - lp) < 1e-9);
    }
  }
}

TEST_CASE("metric axioms on 200 random triples") {
  for (const StateSpace space :
       {StateSpace::Line(16), StateSpace::Grid(5, 5)}) {
    const GroundMetric g = GroundMetric::FromStateSpace(space);
    for (int t = 0; t < 100; ++t) {
      const Distribution a = RandomDistribution(space, SubSeed(9, "ta", t));
      const Distribution b = RandomDistribution(space, SubSeed(9, "tb", t));
      const Distribution c = RandomDistribution(space, SubSeed(9, "tc", t));
      const double ab = Wasserstein(a, b, g);
      const double ba = Wasserstein(b, a, g);
      const double ac = Wasserstein(a, c, g);
      const double cb = Wasserstein(c, b, g);
      CHECK(Wasserstein(a, a, g) == doctest::Approx(0.0).epsilon(1e-12));
      CHECK(ab >= 0.0);
      CHECK(ab == doctest::Approx(ba).epsilon(1e-9));
      CHECK(ab <= ac + cb + 1e-9);
    }
  }
}

TEST_CASE("flow distance averages the per-step distances") {
  const StateSpace line = StateSpace::Line(8);
  const GroundMetric g = GroundMetric::FromStateSpace(line);
  MFFlow a, b;
  for (int n = 0; n < 3; ++n) {
    a.states.push_back(Distribution::Delta(8, 0));
    b.states.push_back(Distribution::Delta(8, n));
  }
  // Distances 0, 1/7, 2/7 -> mean 1/7.
  CHECK(FlowDistance(a, b, g, 2) == doctest::Approx(1.0 / 7.0));
}

TEST_CASE("log10 export floors zeros at 1e-12") {
  Eigen::MatrixXd m(1, 3);
  m << 0.0, 1e-3, 1.0;
  const Eigen::MatrixXd out = Log10Floored(m);
  CHECK(out(0, 0) == doctest::Approx(-12.0));
  CHECK(out(0, 1) == doctest::Approx(-3.0));
  CHECK(out(0, 2) == doctest::Approx(0.0));
}

}  // TEST_SUITE

}  // namespace
}  // namespace mfg
