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
// Experiment driver. Usage:
//   mfg <solve-exact|train-master|benchmark|verify|export>
//       --config PATH [--seed U64] [--out DIR] [--mode dqn|exact]

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "mfg/cli.hpp"

namespace {

int Run(const std::string& verb, const std::string& config_path,
        const mfg::CliOverrides& overrides) {
  mfg::ExperimentConfig cfg = mfg::ApplyOverrides(
      mfg::LoadExperimentConfig(config_path), overrides);
  if (verb == "solve-exact") return mfg::CmdSolveExact(cfg);
  if (verb == "train-master") return mfg::CmdTrainMaster(cfg);
  if (verb == "benchmark") return mfg::CmdBenchmark(cfg);
  if (verb == "verify") return mfg::CmdVerify(cfg);
  return mfg::CmdExport(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field-game equilibrium and master-policy toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  mfg::CliOverrides overrides;
  std::uint64_t seed = 0;
  std::string out_dir, mode;

  std::vector<CLI::App*> subs;
  for (const char* verb :
       {"solve-exact", "train-master", "benchmark", "verify", "export"}) {
    CLI::App* sub = app.add_subcommand(verb);
    sub->add_option("--config", config_path, "Experiment config file (JSON)")
        ->required();
    sub->add_option("--seed", seed, "Root seed override");
    sub->add_option("--out", out_dir, "Output directory override");
    sub->add_option("--mode", mode, "Q-learning subroutine: dqn or exact")
        ->check(CLI::IsMember({"dqn", "exact"}));
    subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  const CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed") > 0) overrides.seed = seed;
  if (sub->count("--out") > 0) overrides.out_dir = out_dir;
  if (sub->count("--mode") > 0) overrides.mode = mode;

  try {
    return Run(sub->get_name(), config_path, overrides);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
