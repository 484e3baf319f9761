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

#include "mfg/serialize.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mfg {
namespace {

constexpr int kNetworkFormatVersion = 1;

Json VectorToJson(const Eigen::VectorXd& v) {
  Json arr = Json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd VectorFromJson(const Json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected a JSON array");
  Eigen::VectorXd v(j.size());
  for (int i = 0; i < static_cast<int>(j.size()); ++i) {
    v[i] = j[i].get<double>();
  }
  return v;
}

Json MatrixToJson(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    rows.push_back(VectorToJson(m.row(i).transpose()));
  }
  return rows;
}

Eigen::MatrixXd MatrixFromJson(const Json& j) {
  if (!j.is_array() || j.empty()) {
    throw std::invalid_argument("expected a non-empty JSON array of rows");
  }
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j[i].size()) != cols) {
      throw std::invalid_argument("ragged matrix rows");
    }
    m.row(i) = VectorFromJson(j[i]).transpose();
  }
  return m;
}

Json DenseToJson(const DenseLayer& layer) {
  return Json{{"w", MatrixToJson(layer.w)}, {"b", VectorToJson(layer.b)}};
}

DenseLayer DenseFromJson(const Json& j) {
  return {MatrixFromJson(j.at("w")), VectorFromJson(j.at("b"))};
}

Json ConvToJson(const ConvLayer& layer) {
  return Json{{"in_ch", layer.in_ch},
              {"out_ch", layer.out_ch},
              {"w", MatrixToJson(layer.w)},
              {"b", VectorToJson(layer.b)}};
}

ConvLayer ConvFromJson(const Json& j) {
  ConvLayer layer;
  layer.in_ch = j.at("in_ch").get<int>();
  layer.out_ch = j.at("out_ch").get<int>();
  layer.w = MatrixFromJson(j.at("w"));
  layer.b = VectorFromJson(j.at("b"));
  return layer;
}

}  // namespace

Json ToJson(const Distribution& mu) { return Json{{"probs", VectorToJson(mu.p)}}; }

Json ToJson(const MFFlow& flow) {
  Json states = Json::array();
  for (const Distribution& mu : flow.states) states.push_back(VectorToJson(mu.p));
  return Json{{"states", std::move(states)}};
}

Json ToJson(const StationaryPolicy& pi) {
  return Json{{"table", MatrixToJson(pi.table)}};
}

Json ToJson(const NonStationaryPolicy& pi) {
  Json steps = Json::array();
  for (const StationaryPolicy& step : pi.steps) {
    steps.push_back(MatrixToJson(step.table));
  }
  return Json{{"steps", std::move(steps)}};
}

Json ToJson(const QNetwork& net) {
  Json j;
  j["format_version"] = kNetworkFormatVersion;
  j["arch"] = net.arch() == NetArch::kMlp ? "mlp" : "conv2d";
  j["num_actions"] = net.num_actions();
  j["zero_mu_input"] = net.zero_mu_input();
  j["space"] = Json{
      {"geometry",
       net.space().geometry == StateSpace::Geometry::kLine ? "line" : "grid"},
      {"width", net.space().width},
      {"height", net.space().height}};
  j["hidden"] = net.hidden();
  Json params;
  Json conv_state = Json::array(), conv_mu = Json::array(),
       dense = Json::array();
  for (const ConvLayer& c : net.params().conv_state) {
    conv_state.push_back(ConvToJson(c));
  }
  for (const ConvLayer& c : net.params().conv_mu) conv_mu.push_back(ConvToJson(c));
  for (const DenseLayer& d : net.params().dense) dense.push_back(DenseToJson(d));
  params["conv_state"] = std::move(conv_state);
  params["conv_mu"] = std::move(conv_mu);
  params["dense"] = std::move(dense);
  j["params"] = std::move(params);
  return j;
}

Json ToJson(const DistributionSet& set) {
  Json entries = Json::array();
  for (const DistributionSetEntry& e : set.entries) {
    entries.push_back(Json{{"name", e.name},
                           {"provenance", e.provenance},
                           {"probs", VectorToJson(e.mu.p)}});
  }
  return Json{
      {"kind",
       set.kind == DistributionSet::Kind::kTraining ? "training" : "testing"},
      {"entries", std::move(entries)}};
}

Json ToJson(const ExploitabilityCurve& curve) {
  return Json{{"average", curve.average},
              {"per_mu0", MatrixToJson(curve.per_mu0)}};
}

Distribution DistributionFromJson(const Json& j) {
  return Distribution(VectorFromJson(j.at("probs")));
}

MFFlow FlowFromJson(const Json& j) {
  MFFlow flow;
  for (const Json& s : j.at("states")) {
    flow.states.emplace_back(VectorFromJson(s));
  }
  return flow;
}

StationaryPolicy StationaryPolicyFromJson(const Json& j) {
  return StationaryPolicy(MatrixFromJson(j.at("table")));
}

NonStationaryPolicy NonStationaryPolicyFromJson(const Json& j) {
  NonStationaryPolicy pi;
  for (const Json& s : j.at("steps")) {
    pi.steps.emplace_back(MatrixFromJson(s));
  }
  return pi;
}

QNetwork QNetworkFromJson(const Json& j) {
  const int version = j.at("format_version").get<int>();
  if (version != kNetworkFormatVersion) {
    throw std::invalid_argument("unsupported network format version " +
                                std::to_string(version));
  }
  const std::string arch = j.at("arch").get<std::string>();
  const Json& space_j = j.at("space");
  const std::string geometry = space_j.at("geometry").get<std::string>();
  StateSpace space =
      geometry == "line"
          ? StateSpace::Line(space_j.at("width").get<int>())
          : StateSpace::Grid(space_j.at("width").get<int>(),
                             space_j.at("height").get<int>());
  const int num_actions = j.at("num_actions").get<int>();
  const bool zero_mu = j.at("zero_mu_input").get<bool>();
  const std::vector<int> hidden = j.at("hidden").get<std::vector<int>>();

  QNetwork net = arch == "mlp"
                     ? QNetwork::Mlp(space.size(), num_actions, hidden,
                                     zero_mu, /*seed=*/0)
                     : QNetwork::Conv2D(space, num_actions, hidden, zero_mu,
                                        /*seed=*/0);
  NetParams& p = net.mutable_params();
  p.conv_state.clear();
  p.conv_mu.clear();
  p.dense.clear();
  const Json& params = j.at("params");
  for (const Json& c : params.at("conv_state")) {
    p.conv_state.push_back(ConvFromJson(c));
  }
  for (const Json& c : params.at("conv_mu")) p.conv_mu.push_back(ConvFromJson(c));
  for (const Json& d : params.at("dense")) p.dense.push_back(DenseFromJson(d));
  return net;
}

DistributionSet DistributionSetFromJson(const Json& j) {
  DistributionSet set;
  set.kind = j.at("kind").get<std::string>() == "training"
                 ? DistributionSet::Kind::kTraining
                 : DistributionSet::Kind::kTesting;
  for (const Json& e : j.at("entries")) {
    set.entries.push_back({e.at("name").get<std::string>(),
                           Distribution(VectorFromJson(e.at("probs"))),
                           e.at("provenance").get<std::string>()});
  }
  return set;
}

ExploitabilityCurve CurveFromJson(const Json& j) {
  ExploitabilityCurve curve;
  curve.average = j.at("average").get<std::vector<double>>();
  curve.per_mu0 = MatrixFromJson(j.at("per_mu0"));
  return curve;
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string CsvEscape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string MatrixToCsv(const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels,
                        const Eigen::MatrixXd& values) {
  if (static_cast<int>(row_labels.size()) != values.rows() ||
      static_cast<int>(col_labels.size()) != values.cols()) {
    throw std::invalid_argument("csv: label/shape mismatch");
  }
  std::string out = "policy";
  for (const std::string& c : col_labels) {
    out += ',';
    out += CsvEscape(c);
  }
  out += "\r\n";
  for (int i = 0; i < values.rows(); ++i) {
    out += CsvEscape(row_labels[i]);
    for (int jj = 0; jj < values.cols(); ++jj) {
      out += ',';
      out += FormatDouble(values(i, jj));
    }
    out += "\r\n";
  }
  return out;
}

std::string MatrixToCsv(const PerformanceMatrix& m) {
  return MatrixToCsv(m.row_labels, m.col_labels, m.values);
}

void WriteTextFile(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << content;
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void WriteJsonFile(const std::string& path, const Json& j) {
  WriteTextFile(path, j.dump(2) + "\n");
}

Json ReadJsonFile(const std::string& path) {
  return Json::parse(ReadTextFile(path));
}

}  // namespace mfg
