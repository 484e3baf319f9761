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

#include "mfg/cli.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <set>
#include <stdexcept>

#include "mfg/exhaustive.hpp"
#include "mfg/metrics.hpp"
#include "mfg/rng.hpp"

namespace mfg {
namespace fs = std::filesystem;

namespace {

void CheckKeys(const Json& j, const std::string& where,
               const std::set<std::string>& allowed) {
  if (!j.is_object()) {
    throw std::invalid_argument("config: " + where + " must be an object");
  }
  for (const auto& item : j.items()) {
    if (allowed.count(item.key()) == 0) {
      throw std::invalid_argument("config: unknown key '" + item.key() +
                                  "' in " + where);
    }
  }
}

// Writes artifacts relative to a run directory and accumulates checksums;
// the manifest is written last so it only lists files that exist.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(const fs::path& dir) : dir_(dir) {
    fs::create_directories(dir);
    start_ = std::chrono::steady_clock::now();
  }

  void WriteText(const std::string& rel, const std::string& content) {
    const fs::path p = dir_ / rel;
    fs::create_directories(p.parent_path());
    WriteTextFile(p.string(), content);
    entries_.push_back({rel, Sha256Hex(content)});
  }

  void WriteJson(const std::string& rel, const Json& j) {
    WriteText(rel, j.dump(2) + "\n");
  }

  void Finish(const Json& config_snapshot) {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      start_)
            .count();
    Json artifacts = Json::array();
    for (const ManifestEntry& e : entries_) {
      artifacts.push_back(Json{{"path", e.path}, {"sha256", e.sha256}});
    }
    const Json manifest{{"schema_version", kConfigSchemaVersion},
                        {"tool_version", kToolVersion},
                        {"config", config_snapshot},
                        {"artifacts", std::move(artifacts)},
                        {"timings", Json{{"elapsed_seconds", elapsed}}}};
    WriteTextFile((dir_ / "manifest.json").string(), manifest.dump(2) + "\n");
  }

  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<ManifestEntry> entries_;
  std::chrono::steady_clock::time_point start_;
};

Json RequireJsonFile(const fs::path& path) {
  if (!fs::exists(path)) {
    throw std::runtime_error("missing prerequisite artifact: " +
                             path.string());
  }
  return ReadJsonFile(path.string());
}

std::string CurveToCsv(const ExploitabilityCurve& curve,
                       const std::vector<std::string>& mu0_names) {
  std::string out = "iteration,average";
  for (const std::string& n : mu0_names) out += "," + CsvEscape(n);
  out += "\r\n";
  for (int k = 0; k < static_cast<int>(curve.average.size()); ++k) {
    out += std::to_string(k + 1);
    out += ',';
    out += FormatDouble(curve.average[k]);
    for (int i = 0; i < curve.per_mu0.cols(); ++i) {
      out += ',';
      out += FormatDouble(curve.per_mu0(k, i));
    }
    out += "\r\n";
  }
  return out;
}

Json MatrixToJsonArtifact(const PerformanceMatrix& m) {
  Json rows = Json::array(), cols = Json::array(), values = Json::array();
  for (const std::string& r : m.row_labels) rows.push_back(r);
  for (const std::string& c : m.col_labels) cols.push_back(c);
  for (int i = 0; i < m.values.rows(); ++i) {
    Json row = Json::array();
    for (int jj = 0; jj < m.values.cols(); ++jj) {
      row.push_back(m.values(i, jj));
    }
    values.push_back(std::move(row));
  }
  return Json{{"kind", m.kind == MatrixKind::kWasserstein ? "wasserstein"
                                                          : "exploitability"},
              {"row_labels", std::move(rows)},
              {"col_labels", std::move(cols)},
              {"values", std::move(values)}};
}

PerformanceMatrix MatrixFromJsonArtifact(const Json& j) {
  PerformanceMatrix m;
  m.kind = j.at("kind").get<std::string>() == "wasserstein"
               ? MatrixKind::kWasserstein
               : MatrixKind::kExploitability;
  m.row_labels = j.at("row_labels").get<std::vector<std::string>>();
  m.col_labels = j.at("col_labels").get<std::vector<std::string>>();
  const Json& values = j.at("values");
  m.values.resize(m.row_labels.size(), m.col_labels.size());
  for (int i = 0; i < m.values.rows(); ++i) {
    for (int jj = 0; jj < m.values.cols(); ++jj) {
      m.values(i, jj) = values[i][jj].get<double>();
    }
  }
  return m;
}

// training entries followed by testing entries, as benchmark columns.
DistributionSet CombinedSet(const DistributionSet& training,
                            const DistributionSet& testing) {
  DistributionSet all = training;
  all.entries.insert(all.entries.end(), testing.entries.begin(),
                     testing.entries.end());
  return all;
}

MasterPolicyBundle LoadBundle(const fs::path& dir, bool include_initial,
                              int num_actions) {
  MasterPolicyBundle bundle;
  bundle.include_initial = include_initial;
  bundle.num_actions = num_actions;
  for (int k = 1;; ++k) {
    const fs::path p = dir / ("net_" + std::to_string(k) + ".json");
    if (!fs::exists(p)) {
      if (k == 1) {
        throw std::runtime_error("missing prerequisite artifact: " +
                                 p.string());
      }
      break;
    }
    bundle.networks.push_back(QNetworkFromJson(ReadJsonFile(p.string())));
  }
  return bundle;
}

void WriteBundle(ArtifactWriter& w, const std::string& prefix,
                 const MasterPolicyBundle& bundle,
                 const std::vector<std::string>& mu0_names) {
  for (int k = 0; k < static_cast<int>(bundle.networks.size()); ++k) {
    w.WriteJson(prefix + "/net_" + std::to_string(k + 1) + ".json",
                ToJson(bundle.networks[k]));
  }
  for (int i = 0; i < static_cast<int>(bundle.bank.flows.size()); ++i) {
    w.WriteJson(prefix + "/bank_flow_" + std::to_string(i) + ".json",
                ToJson(bundle.bank.flows[i]));
  }
  w.WriteText(prefix + "/curve.csv", CurveToCsv(bundle.curve, mu0_names));
  w.WriteJson(prefix + "/curve.json", ToJson(bundle.curve));
}

std::vector<std::string> Names(const DistributionSet& set) {
  std::vector<std::string> names;
  for (const auto& e : set.entries) names.push_back(e.name);
  return names;
}

}  // namespace

Environment ExperimentConfig::MakeEnvironment() const {
  if (env_kind == EnvKind::kExploration1D) {
    Exploration1DConfig c = exploration;
    c.gamma = gamma;
    return MakeExploration1D(c);
  }
  BeachBar2DConfig c = beach_bar;
  c.gamma = gamma;
  return MakeBeachBar2D(c);
}

ExperimentConfig ParseExperimentConfig(const Json& j) {
  CheckKeys(j, "top level",
            {"schema_version", "environment", "gamma", "horizon", "fp", "rl",
             "mode", "seed", "out_dir"});
  if (j.at("schema_version").get<int>() != kConfigSchemaVersion) {
    throw std::invalid_argument("config: unsupported schema_version");
  }
  ExperimentConfig cfg;
  if (!j.contains("seed")) {
    throw std::invalid_argument("config: seed is required");
  }
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.out_dir = j.value("out_dir", std::string("run"));
  cfg.gamma = j.value("gamma", 0.9);
  cfg.horizon = j.value("horizon", 30);

  const Json& env = j.at("environment");
  const std::string kind = env.at("kind").get<std::string>();
  if (kind == "exploration-1d") {
    CheckKeys(env, "environment", {"kind", "size", "mu_clip"});
    cfg.env_kind = EnvKind::kExploration1D;
    cfg.exploration.size = env.value("size", 32);
    cfg.exploration.mu_clip = env.value("mu_clip", 1e-10);
    cfg.rl.arch = NetArch::kMlp;
  } else if (kind == "beach-bar-2d") {
    CheckKeys(env, "environment",
              {"kind", "width", "height", "bar_x", "bar_y", "mu_clip",
               "include_stay"});
    cfg.env_kind = EnvKind::kBeachBar2D;
    cfg.beach_bar.width = env.value("width", 16);
    cfg.beach_bar.height = env.value("height", 16);
    cfg.beach_bar.bar_x = env.value("bar_x", -1);
    cfg.beach_bar.bar_y = env.value("bar_y", -1);
    cfg.beach_bar.mu_clip = env.value("mu_clip", 1e-10);
    cfg.beach_bar.include_stay = env.value("include_stay", true);
    cfg.rl.arch = NetArch::kConv2D;
  } else {
    throw std::invalid_argument("config: unknown environment kind '" + kind +
                                "'");
  }

  if (j.contains("fp")) {
    const Json& fp = j.at("fp");
    CheckKeys(fp, "fp",
              {"iterations", "specialized_iterations",
               "self_consistent_induced_flows"});
    cfg.fp.iterations = fp.value("iterations", 10);
    cfg.specialized_iterations = fp.value("specialized_iterations", 20);
    cfg.fp.self_consistent_induced_flows =
        fp.value("self_consistent_induced_flows", false);
  }
  cfg.fp.horizon = cfg.horizon;

  if (j.contains("rl")) {
    const Json& rl = j.at("rl");
    CheckKeys(rl, "rl",
              {"episodes", "inner_steps", "batch_size", "target_sync",
               "epsilon", "learning_rate", "buffer_capacity", "hidden",
               "trunk_hidden", "fit_epochs", "fit_batch", "fit_subsample",
               "fit_augment", "fit_advantage", "fit_final_least_squares"});
    cfg.rl.episodes = rl.value("episodes", cfg.rl.episodes);
    cfg.rl.inner_steps = rl.value("inner_steps", cfg.rl.inner_steps);
    cfg.rl.batch_size = rl.value("batch_size", cfg.rl.batch_size);
    cfg.rl.target_sync = rl.value("target_sync", cfg.rl.target_sync);
    cfg.rl.epsilon = rl.value("epsilon", cfg.rl.epsilon);
    cfg.rl.learning_rate = rl.value("learning_rate", cfg.rl.learning_rate);
    cfg.rl.buffer_capacity = rl.value("buffer_capacity", cfg.rl.buffer_capacity);
    cfg.rl.hidden = rl.value("hidden", cfg.rl.hidden);
    cfg.rl.trunk_hidden = rl.value("trunk_hidden", cfg.rl.trunk_hidden);
    cfg.rl.fit_epochs = rl.value("fit_epochs", cfg.rl.fit_epochs);
    cfg.rl.fit_batch = rl.value("fit_batch", cfg.rl.fit_batch);
    cfg.rl.fit_subsample = rl.value("fit_subsample", cfg.rl.fit_subsample);
    cfg.rl.fit_augment = rl.value("fit_augment", cfg.rl.fit_augment);
    cfg.rl.fit_advantage = rl.value("fit_advantage", cfg.rl.fit_advantage);
    cfg.rl.fit_final_least_squares =
        rl.value("fit_final_least_squares", cfg.rl.fit_final_least_squares);
  }
  cfg.rl.horizon = cfg.horizon;

  const std::string mode = j.value("mode", std::string("exact"));
  if (mode == "exact") {
    cfg.mode = SubroutineMode::kExactFittedQ;
  } else if (mode == "dqn") {
    cfg.mode = SubroutineMode::kDqn;
  } else {
    throw std::invalid_argument("config: mode must be 'dqn' or 'exact'");
  }
  cfg.fp.mode = cfg.mode;
  cfg.rl.Validate();
  return cfg;
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  return ParseExperimentConfig(ReadJsonFile(path));
}

Json ExperimentConfigToJson(const ExperimentConfig& cfg) {
  Json env;
  if (cfg.env_kind == EnvKind::kExploration1D) {
    env = Json{{"kind", "exploration-1d"},
               {"size", cfg.exploration.size},
               {"mu_clip", cfg.exploration.mu_clip}};
  } else {
    env = Json{{"kind", "beach-bar-2d"},
               {"width", cfg.beach_bar.width},
               {"height", cfg.beach_bar.height},
               {"bar_x", cfg.beach_bar.bar_x},
               {"bar_y", cfg.beach_bar.bar_y},
               {"mu_clip", cfg.beach_bar.mu_clip},
               {"include_stay", cfg.beach_bar.include_stay}};
  }
  return Json{
      {"schema_version", kConfigSchemaVersion},
      {"environment", std::move(env)},
      {"gamma", cfg.gamma},
      {"horizon", cfg.horizon},
      {"fp",
       Json{{"iterations", cfg.fp.iterations},
            {"specialized_iterations", cfg.specialized_iterations},
            {"self_consistent_induced_flows",
             cfg.fp.self_consistent_induced_flows}}},
      {"rl",
       Json{{"episodes", cfg.rl.episodes},
            {"inner_steps", cfg.rl.inner_steps},
            {"batch_size", cfg.rl.batch_size},
            {"target_sync", cfg.rl.target_sync},
            {"epsilon", cfg.rl.epsilon},
            {"learning_rate", cfg.rl.learning_rate},
            {"buffer_capacity", cfg.rl.buffer_capacity},
            {"hidden", cfg.rl.hidden},
            {"trunk_hidden", cfg.rl.trunk_hidden},
            {"fit_epochs", cfg.rl.fit_epochs},
            {"fit_batch", cfg.rl.fit_batch},
            {"fit_subsample", cfg.rl.fit_subsample},
            {"fit_augment", cfg.rl.fit_augment},
            {"fit_advantage", cfg.rl.fit_advantage},
            {"fit_final_least_squares", cfg.rl.fit_final_least_squares}}},
      {"mode", cfg.mode == SubroutineMode::kExactFittedQ ? "exact" : "dqn"},
      {"seed", cfg.seed},
      {"out_dir", cfg.out_dir}};
}

std::string Sha256Hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

ExperimentConfig ApplyOverrides(ExperimentConfig cfg, const CliOverrides& o) {
  if (o.seed) cfg.seed = *o.seed;
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  if (o.mode) {
    if (*o.mode == "exact") {
      cfg.mode = SubroutineMode::kExactFittedQ;
    } else if (*o.mode == "dqn") {
      cfg.mode = SubroutineMode::kDqn;
    } else {
      throw std::invalid_argument("mode must be 'dqn' or 'exact'");
    }
    cfg.fp.mode = cfg.mode;
  }
  return cfg;
}

int CmdSolveExact(const ExperimentConfig& cfg) {
  const Environment env = cfg.MakeEnvironment();
  const DistributionSet training = MakeTrainingSet(env.states);
  const DistributionSet testing =
      MakeTestingSet(env.states, SubSeed(cfg.seed, "testing-set"));

  ArtifactWriter w(fs::path(cfg.out_dir) / "solve-exact");
  w.WriteJson("training_set.json", ToJson(training));
  w.WriteJson("testing_set.json", ToJson(testing));
  const DistributionSet all = CombinedSet(training, testing);
  for (const DistributionSetEntry& e : all.entries) {
    const SpecializedFPResult res = SolveSpecializedFP(
        env, e.mu, cfg.specialized_iterations, cfg.horizon);
    w.WriteJson(e.name + "_flow.json", ToJson(res.equilibrium_flow));
    w.WriteJson(e.name + "_policy.json", ToJson(res.mixture_policy));
    w.WriteText(e.name + "_curve.csv", CurveToCsv(res.curve, {e.name}));
    std::printf("solve-exact: %s exploitability(%d) = %.3e\n", e.name.c_str(),
                cfg.specialized_iterations, res.curve.average.back());
  }
  w.Finish(ExperimentConfigToJson(cfg));
  return 0;
}

int CmdTrainMaster(const ExperimentConfig& cfg) {
  const Environment env = cfg.MakeEnvironment();
  const DistributionSet training = MakeTrainingSet(env.states);
  ArtifactWriter w(fs::path(cfg.out_dir) / "train-master");

  FPConfig master_fp = cfg.fp;
  master_fp.seed = SubSeed(cfg.seed, "master");
  const MasterPolicyBundle master =
      MasterFictitiousPlay(env, training, master_fp, cfg.rl);
  WriteBundle(w, "master", master, Names(training));
  std::printf("train-master: master avg exploitability(%d) = %.3e\n",
              cfg.fp.iterations, master.curve.average.back());

  FPConfig uncond_fp = cfg.fp;
  uncond_fp.seed = SubSeed(cfg.seed, "unconditioned");
  const MasterPolicyBundle uncond =
      SolveUnconditioned(env, training, uncond_fp, cfg.rl);
  WriteBundle(w, "unconditioned", uncond, Names(training));
  std::printf("train-master: unconditioned avg exploitability(%d) = %.3e\n",
              cfg.fp.iterations, uncond.curve.average.back());

  w.Finish(ExperimentConfigToJson(cfg));
  return 0;
}

int CmdBenchmark(const ExperimentConfig& cfg) {
  const Environment env = cfg.MakeEnvironment();
  const fs::path out(cfg.out_dir);
  const fs::path exact_dir = out / "solve-exact";
  const fs::path master_dir = out / "train-master";

  const DistributionSet training =
      DistributionSetFromJson(RequireJsonFile(exact_dir / "training_set.json"));
  const DistributionSet testing =
      DistributionSetFromJson(RequireJsonFile(exact_dir / "testing_set.json"));
  const DistributionSet all = CombinedSet(training, testing);

  const int horizon = cfg.horizon;
  std::vector<BenchmarkRow> rows;
  // One specialized row per column; its cell on its own column is the
  // reference flow, so the diagonal is exactly zero.
  for (const DistributionSetEntry& e : all.entries) {
    const NonStationaryPolicy pi = NonStationaryPolicyFromJson(
        RequireJsonFile(exact_dir / (e.name + "_policy.json")));
    rows.push_back({"specialized_" + e.name,
                    [pi, &env, horizon](const Distribution& mu0) {
                      return std::make_pair(
                          pi, RolloutFlow(env, mu0, pi, horizon));
                    }});
  }

  std::vector<MFFlow> training_flows;
  for (const DistributionSetEntry& e : training.entries) {
    training_flows.push_back(
        FlowFromJson(RequireJsonFile(exact_dir / (e.name + "_flow.json"))));
  }
  const NonStationaryPolicy mixture_reward_pi =
      SolveMixtureReward(env, training_flows, horizon);
  rows.push_back({"mixture-reward",
                  [mixture_reward_pi, &env, horizon](const Distribution& mu0) {
                    return std::make_pair(
                        mixture_reward_pi,
                        RolloutFlow(env, mu0, mixture_reward_pi, horizon));
                  }});

  const MasterPolicyBundle uncond = LoadBundle(
      master_dir / "unconditioned", /*include_initial=*/true,
      env.num_actions());
  rows.push_back({"unconditioned",
                  [&uncond, &env, horizon](const Distribution& mu0) {
                    MixtureRollout r = RolloutMixture(env, mu0, uncond, horizon);
                    return std::make_pair(std::move(r.reduced_policy),
                                          std::move(r.averaged_flow));
                  }});

  const NonStationaryPolicy uniform_pi = NonStationaryPolicy::Repeat(
      StationaryPolicy::Uniform(env.num_states(), env.num_actions()), horizon);
  rows.push_back({"uniform-random",
                  [uniform_pi, &env, horizon](const Distribution& mu0) {
                    return std::make_pair(
                        uniform_pi, RolloutFlow(env, mu0, uniform_pi, horizon));
                  }});

  const MasterPolicyBundle master = LoadBundle(
      master_dir / "master", /*include_initial=*/true, env.num_actions());
  rows.push_back({"master",
                  [&master, &env, horizon](const Distribution& mu0) {
                    MixtureRollout r = RolloutMixture(env, mu0, master, horizon);
                    return std::make_pair(std::move(r.reduced_policy),
                                          std::move(r.averaged_flow));
                  }});

  // Reference flow for column j: the specialized-FP policy of column j,
  // realized through the same code path as its row cell.
  std::vector<MFFlow> reference_flows;
  for (int jcol = 0; jcol < all.size(); ++jcol) {
    reference_flows.push_back(rows[jcol].realize(all.mu(jcol)).second);
  }

  const GroundMetric g = GroundMetric::FromStateSpace(env.states);
  const auto [wmat, emat] =
      PerformanceMatrices(env, rows, all, reference_flows, horizon, g);

  ArtifactWriter w(out / "benchmark");
  w.WriteText("w_matrix.csv", MatrixToCsv(wmat));
  w.WriteText("e_matrix.csv", MatrixToCsv(emat));
  w.WriteText("w_matrix_log10.csv",
              MatrixToCsv(wmat.row_labels, wmat.col_labels,
                          Log10Floored(wmat.values)));
  w.WriteText("e_matrix_log10.csv",
              MatrixToCsv(emat.row_labels, emat.col_labels,
                          Log10Floored(emat.values)));
  w.WriteJson("w_matrix.json", MatrixToJsonArtifact(wmat));
  w.WriteJson("e_matrix.json", MatrixToJsonArtifact(emat));
  w.Finish(ExperimentConfigToJson(cfg));
  return 0;
}

int CmdVerify(const ExperimentConfig& cfg) {
  std::string report;
  bool all_pass = true;
  const auto check = [&](const std::string& name, bool pass,
                         const std::string& detail) {
    report += std::string(pass ? "PASS" : "FAIL") + " " + name + ": " +
              detail + "\n";
    all_pass = all_pass && pass;
  };

  {
    const Environment env1 = MakeExploration1D({});
    const Environment env2 = MakeBeachBar2D({});
    const MonotonicityReport r1 =
        CheckMonotonicity(env1, 1000, SubSeed(cfg.seed, "verify-mono-1d"));
    const MonotonicityReport r2 =
        CheckMonotonicity(env2, 1000, SubSeed(cfg.seed, "verify-mono-2d"));
    check("monotonicity-exploration-1d", r1.violations == 0,
          std::to_string(r1.violations) + "/" + std::to_string(r1.pairs) +
              " violations, max sum " + FormatDouble(r1.min_margin));
    check("monotonicity-beach-bar-2d", r2.violations == 0,
          std::to_string(r2.violations) + "/" + std::to_string(r2.pairs) +
              " violations, max sum " + FormatDouble(r2.min_margin));

    // Separability: Reward must recombine exactly from its two components.
    double sep_err = 0.0;
    auto rng = MakeRng(SubSeed(cfg.seed, "verify-separability"));
    for (int t = 0; t < 100; ++t) {
      for (const Environment* env : {&env1, &env2}) {
        const Distribution mu =
            RandomDistribution(env->states, SubSeed(cfg.seed, "verify-sep-mu",
                                                    t));
        std::uniform_int_distribution<int> x_d(0, env->num_states() - 1);
        std::uniform_int_distribution<int> a_d(0, env->num_actions() - 1);
        const int x = x_d(rng), a = a_d(rng);
        sep_err = std::max(
            sep_err, std::abs(env->Reward(x, a, mu) -
                              (env->reward_action(x, a) +
                               env->reward_mf(x, mu))));
      }
    }
    check("reward-separability", sep_err < 1e-12,
          "max recombination error " + FormatDouble(sep_err));
  }

  {
    const QNetwork mlp = QNetwork::Mlp(32, 3, {64, 64}, false,
                                       SubSeed(cfg.seed, "verify-mlp"));
    const GradientCheckReport g1 =
        GradientCheck(mlp, 200, SubSeed(cfg.seed, "verify-grad-mlp"));
    check("gradient-check-mlp", g1.max_rel_err < 1e-4,
          "max rel err " + FormatDouble(g1.max_rel_err) + " over " +
              std::to_string(g1.probes) + " probes (" +
              std::to_string(g1.skipped) + " skipped)");
    const QNetwork conv =
        QNetwork::Conv2D(StateSpace::Grid(8, 8), 5, {128}, false,
                         SubSeed(cfg.seed, "verify-conv"));
    const GradientCheckReport g2 =
        GradientCheck(conv, 200, SubSeed(cfg.seed, "verify-grad-conv"));
    check("gradient-check-conv2d", g2.max_rel_err < 1e-4,
          "max rel err " + FormatDouble(g2.max_rel_err) + " over " +
              std::to_string(g2.probes) + " probes (" +
              std::to_string(g2.skipped) + " skipped)");
  }

  {
    double max_gap = 0.0;
    for (int t = 0; t < 50; ++t) {
      const ToyMfg toy = RandomToyMfg(SubSeed(cfg.seed, "verify-toy", t));
      const NonStationaryPolicy uniform = NonStationaryPolicy::Repeat(
          StationaryPolicy::Uniform(toy.env.num_states(),
                                    toy.env.num_actions()),
          toy.horizon);
      const MFFlow flow =
          RolloutFlow(toy.env, toy.mu0, uniform, toy.horizon);
      const auto [br, values] = BestResponse(toy.env, flow, toy.horizon);
      const double j_br =
          EvaluatePolicy(toy.env, toy.mu0, br, flow, toy.horizon);
      const double j_oracle =
          ExhaustiveBestResponseValue(toy.env, toy.mu0, flow, toy.horizon);
      max_gap = std::max(max_gap, std::abs(j_br - j_oracle));
    }
    check("oracle-best-response", max_gap < 1e-9,
          "max |J_br - J_enum| = " + FormatDouble(max_gap) +
              " over 50 toy games");
  }

  {
    const StateSpace line = StateSpace::Line(32);
    const GroundMetric g = GroundMetric::FromStateSpace(line);
    double max_gap = 0.0;
    for (int t = 0; t < 100; ++t) {
      const Distribution a =
          RandomDistribution(line, SubSeed(cfg.seed, "verify-w-a", t));
      const Distribution b =
          RandomDistribution(line, SubSeed(cfg.seed, "verify-w-b", t));
      max_gap = std::max(max_gap, std::abs(WassersteinClosedForm1D(a, b, g) -
                                           WassersteinMinCostFlow(a, b, g)));
    }
    check("wasserstein-closed-form-vs-mcf", max_gap < 1e-9,
          "max gap " + FormatDouble(max_gap) + " over 100 pairs");
  }

  std::fputs(report.c_str(), stdout);
  ArtifactWriter w(fs::path(cfg.out_dir) / "verify");
  w.WriteText("report.txt", report);
  w.Finish(ExperimentConfigToJson(cfg));
  return all_pass ? 0 : 1;
}

int CmdExport(const ExperimentConfig& cfg) {
  const fs::path out(cfg.out_dir);
  const PerformanceMatrix wmat = MatrixFromJsonArtifact(
      RequireJsonFile(out / "benchmark" / "w_matrix.json"));
  const PerformanceMatrix emat = MatrixFromJsonArtifact(
      RequireJsonFile(out / "benchmark" / "e_matrix.json"));
  ArtifactWriter w(out / "export");
  w.WriteText("w_matrix_log10.csv",
              MatrixToCsv(wmat.row_labels, wmat.col_labels,
                          Log10Floored(wmat.values)));
  w.WriteText("e_matrix_log10.csv",
              MatrixToCsv(emat.row_labels, emat.col_labels,
                          Log10Floored(emat.values)));
  w.Finish(ExperimentConfigToJson(cfg));
  return 0;
}

}  // namespace mfg
