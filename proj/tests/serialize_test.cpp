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

#include "mfg/envs.hpp"
#include "mfg/rng.hpp"
#include "mfg/serialize.hpp"

namespace mfg {
namespace {

TEST_SUITE("serialize") {

TEST_CASE("distribution round-trips through json") {
  const Distribution mu = RandomDistribution(StateSpace::Line(16), 4);
  const Json j = ToJson(mu);
  CHECK(j.contains("probs"));
  const Distribution back = DistributionFromJson(j);
  CHECK(back.p == mu.p);
}

TEST_CASE("flow and policy round-trips preserve every coefficient") {
  MFFlow flow;
  for (int n = 0; n < 4; ++n) {
    flow.states.push_back(RandomDistribution(StateSpace::Line(8), 10 + n));
  }
  const MFFlow flow_back = FlowFromJson(ToJson(flow));
  REQUIRE(flow_back.length() == 4);
  for (int n = 0; n < 4; ++n) CHECK(flow_back[n].p == flow[n].p);

  const NonStationaryPolicy pi =
      NonStationaryPolicy::Repeat(StationaryPolicy::Uniform(8, 3), 3);
  const Json j = ToJson(pi);
  CHECK(j.contains("steps"));
  const NonStationaryPolicy pi_back = NonStationaryPolicyFromJson(j);
  REQUIRE(pi_back.length() == 4);
  for (int n = 0; n < 4; ++n) CHECK(pi_back[n].table == pi[n].table);
}

TEST_CASE("q-networks of both architectures round-trip") {
  for (const QNetwork& net :
       {QNetwork::Mlp(8, 3, {16, 16}, false, 21),
        QNetwork::Conv2D(StateSpace::Grid(4, 4), 5, {32}, true, 22)}) {
    const QNetwork back = QNetworkFromJson(ToJson(net));
    CHECK(back.FlattenParams() == net.FlattenParams());
    CHECK(back.arch() == net.arch());
    CHECK(back.zero_mu_input() == net.zero_mu_input());
    const Distribution mu = Distribution::Uniform(net.num_states());
    CHECK(back.Forward(1, mu) == net.Forward(1, mu));
  }
}

TEST_CASE("distribution sets keep provenance metadata") {
  const DistributionSet set = MakeTestingSet(StateSpace::Line(16), 33);
  const DistributionSet back = DistributionSetFromJson(ToJson(set));
  REQUIRE(back.size() == set.size());
  CHECK(back.kind == DistributionSet::Kind::kTesting);
  for (int i = 0; i < set.size(); ++i) {
    CHECK(back.entries[i].name == set.entries[i].name);
    CHECK(back.entries[i].provenance == set.entries[i].provenance);
    CHECK(back.entries[i].mu.p == set.entries[i].mu.p);
  }
}

TEST_CASE("format_double round-trips and stays short") {
  for (double v : {0.1, 1.0 / 3.0, 1e-12, -2.5, 0.0, 12345.678}) {
    CHECK(std::stod(FormatDouble(v)) == v);
  }
  CHECK(FormatDouble(0.1) == "0.1");
  CHECK(FormatDouble(-2.5) == "-2.5");
}

TEST_CASE("csv escaping follows rfc 4180") {
  CHECK(CsvEscape("plain") == "plain");
  CHECK(CsvEscape("a,b") == "\"a,b\"");
  CHECK(CsvEscape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(CsvEscape("line\nbreak") == "\"line\nbreak\"");
}

TEST_CASE("matrix csv uses crlf rows and label headers") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 0.5, 0.25, 0.125;
  const std::string csv = MatrixToCsv({"r0", "r1"}, {"c0", "c1"}, m);
  CHECK(csv ==
        "policy,c0,c1\r\n"
        "r0,1,0.5\r\n"
        "r1,0.25,0.125\r\n");
}

TEST_CASE("json dumps are deterministic") {
  const QNetwork net = QNetwork::Mlp(8, 3, {16}, false, 5);
  CHECK(ToJson(net).dump(2) == ToJson(net).dump(2));
}

}  // TEST_SUITE

}  // namespace
}  // namespace mfg
