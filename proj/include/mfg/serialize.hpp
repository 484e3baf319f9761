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
// JSON round-trips for distributions, flows, policies, networks and
// distribution sets, plus deterministic CSV writers for the benchmark
// matrices. CSV doubles use the shortest round-trip decimal form.

#ifndef MFG_SERIALIZE_H_
#define MFG_SERIALIZE_H_

#include <string>
#include <vector>

#include "json.hpp"

#include "mfg/envs.hpp"
#include "mfg/fp.hpp"
#include "mfg/metrics.hpp"
#include "mfg/qlearn.hpp"
#include "mfg/types.hpp"

namespace mfg {

using Json = nlohmann::json;

Json ToJson(const Distribution& mu);
Json ToJson(const MFFlow& flow);
Json ToJson(const StationaryPolicy& pi);
Json ToJson(const NonStationaryPolicy& pi);
Json ToJson(const QNetwork& net);
Json ToJson(const DistributionSet& set);
Json ToJson(const ExploitabilityCurve& curve);

Distribution DistributionFromJson(const Json& j);
MFFlow FlowFromJson(const Json& j);
StationaryPolicy StationaryPolicyFromJson(const Json& j);
NonStationaryPolicy NonStationaryPolicyFromJson(const Json& j);
QNetwork QNetworkFromJson(const Json& j);
DistributionSet DistributionSetFromJson(const Json& j);
ExploitabilityCurve CurveFromJson(const Json& j);

// Shortest round-trip decimal form ("0.1", not "0.10000000000000001").
std::string FormatDouble(double v);

// RFC-4180 quoting: fields containing commas, quotes or newlines are quoted
// and embedded quotes doubled.
std::string CsvEscape(const std::string& field);

// Header row "policy,<col...>"; one row per row label.
std::string MatrixToCsv(const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels,
                        const Eigen::MatrixXd& values);
std::string MatrixToCsv(const PerformanceMatrix& m);

void WriteTextFile(const std::string& path, const std::string& content);
std::string ReadTextFile(const std::string& path);
void WriteJsonFile(const std::string& path, const Json& j);
Json ReadJsonFile(const std::string& path);

}  // namespace mfg

#endif  // MFG_SERIALIZE_H_
