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
// Reproducible experiment driver: strict config parsing, run manifests with
// checksums, and the five commands behind the command-line verbs.

#ifndef MFG_CLI_H_
#define MFG_CLI_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfg/envs.hpp"
#include "mfg/fp.hpp"
#include "mfg/serialize.hpp"

namespace mfg {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr char kToolVersion[] = "1.0.0";

enum class EnvKind { kExploration1D, kBeachBar2D };

// One experiment = environment + horizon + FP/RL parameters + seed + output
// directory. Parsed strictly: unknown keys anywhere are hard errors and the
// seed must be given explicitly (no wall-clock defaults).
struct ExperimentConfig {
  EnvKind env_kind = EnvKind::kExploration1D;
  Exploration1DConfig exploration;
  BeachBar2DConfig beach_bar;
  double gamma = 0.9;
  int horizon = 30;
  FPConfig fp;
  int specialized_iterations = 20;  // K for the per-mu0 exact FP runs
  RLConfig rl;
  SubroutineMode mode = SubroutineMode::kExactFittedQ;
  std::uint64_t seed = 0;
  std::string out_dir;

  Environment MakeEnvironment() const;
};

ExperimentConfig ParseExperimentConfig(const Json& j);
ExperimentConfig LoadExperimentConfig(const std::string& path);
Json ExperimentConfigToJson(const ExperimentConfig& cfg);

// Lowercase hex SHA-256 of a byte string.
std::string Sha256Hex(const std::string& bytes);

struct ManifestEntry {
  std::string path;  // relative to the run directory
  std::string sha256;
};

// Written last so every listed artifact exists with a matching checksum.
struct RunManifest {
  Json config_snapshot;
  std::vector<ManifestEntry> artifacts;
  std::string tool_version = kToolVersion;
  double elapsed_seconds = 0.0;
};

// Overrides from the command line; absent fields keep the config values.
struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> mode;  // "dqn" or "exact"
};

ExperimentConfig ApplyOverrides(ExperimentConfig cfg, const CliOverrides& o);

// Each command writes artifacts under <out_dir>/<verb>/ plus a
// manifest.json, and returns the process exit code.
int CmdSolveExact(const ExperimentConfig& cfg);
int CmdTrainMaster(const ExperimentConfig& cfg);
int CmdBenchmark(const ExperimentConfig& cfg);
int CmdVerify(const ExperimentConfig& cfg);
int CmdExport(const ExperimentConfig& cfg);

}  // namespace mfg

#endif  // MFG_CLI_H_
