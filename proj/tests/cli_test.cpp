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

#include <filesystem>

#include "mfg/cli.hpp"

namespace mfg {
namespace {

namespace fs = std::filesystem;

Json TinyConfig(const std::string& out_dir) {
  return Json{{"schema_version", 1},
              {"environment", Json{{"kind", "exploration-1d"}, {"size", 8}}},
              {"gamma", 0.9},
              {"horizon", 6},
              {"fp",
               Json{{"iterations", 2}, {"specialized_iterations", 3}}},
              {"rl", Json{{"hidden", Json::array({16, 16})},
                          {"fit_epochs", 40}}},
              {"mode", "exact"},
              {"seed", 12345},
              {"out_dir", out_dir}};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

TEST_SUITE("cli") {

TEST_CASE("unknown config keys are hard errors") {
  Json j = TinyConfig("x");
  j["typo_key"] = 1;
  CHECK_THROWS_WITH_AS(ParseExperimentConfig(j),
                       "config: unknown key 'typo_key' in top level",
                       std::invalid_argument);
  Json j2 = TinyConfig("x");
  j2["rl"]["epislon"] = 0.2;
  CHECK_THROWS_AS(ParseExperimentConfig(j2), std::invalid_argument);
  Json j3 = TinyConfig("x");
  j3.erase("seed");
  CHECK_THROWS_AS(ParseExperimentConfig(j3), std::invalid_argument);
}

TEST_CASE("config parsing fills defaults and nested values") {
  const ExperimentConfig cfg = ParseExperimentConfig(TinyConfig("outdir"));
  CHECK(cfg.env_kind == EnvKind::kExploration1D);
  CHECK(cfg.exploration.size == 8);
  CHECK(cfg.horizon == 6);
  CHECK(cfg.fp.iterations == 2);
  CHECK(cfg.fp.horizon == 6);
  CHECK(cfg.specialized_iterations == 3);
  CHECK(cfg.rl.hidden == std::vector<int>{16, 16});
  CHECK(cfg.rl.arch == NetArch::kMlp);
  CHECK(cfg.seed == 12345);
  CHECK(cfg.mode == SubroutineMode::kExactFittedQ);
  // Round-trip through the snapshot form.
  const ExperimentConfig back =
      ParseExperimentConfig(ExperimentConfigToJson(cfg));
  CHECK(ExperimentConfigToJson(back) == ExperimentConfigToJson(cfg));
}

TEST_CASE("cli overrides replace seed, out and mode") {
  ExperimentConfig cfg = ParseExperimentConfig(TinyConfig("outdir"));
  CliOverrides o;
  o.seed = 999;
  o.out_dir = "elsewhere";
  o.mode = "dqn";
  cfg = ApplyOverrides(cfg, o);
  CHECK(cfg.seed == 999);
  CHECK(cfg.out_dir == "elsewhere");
  CHECK(cfg.mode == SubroutineMode::kDqn);
  CHECK(cfg.fp.mode == SubroutineMode::kDqn);
  o.mode = "bogus";
  CHECK_THROWS_AS(ApplyOverrides(cfg, o), std::invalid_argument);
}

TEST_CASE("sha256 matches the known empty-string and abc vectors") {
  CHECK(Sha256Hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(Sha256Hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("solve-exact persists all equilibria and reruns byte-identically") {
  TempDir tmp("mfg_cli_solve_exact");
  ExperimentConfig cfg =
      ParseExperimentConfig(TinyConfig((tmp.path / "a").string()));
  REQUIRE(CmdSolveExact(cfg) == 0);
  const fs::path dir = tmp.path / "a" / "solve-exact";
  // 4 training + 7 testing equilibria, 3 files each, 2 set files, manifest.
  CHECK(fs::exists(dir / "train_gauss_0_flow.json"));
  CHECK(fs::exists(dir / "test_gauss_2_policy.json"));
  CHECK(fs::exists(dir / "test_random_3_curve.csv"));
  CHECK(fs::exists(dir / "manifest.json"));
  int artifacts = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    (void)e;
    ++artifacts;
  }
  CHECK(artifacts == 11 * 3 + 2 + 1);

  cfg.out_dir = (tmp.path / "b").string();
  REQUIRE(CmdSolveExact(cfg) == 0);
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().filename() == "manifest.json") continue;  // holds timings
    const fs::path other =
        tmp.path / "b" / "solve-exact" / e.path().filename();
    CHECK(ReadTextFile(e.path().string()) == ReadTextFile(other.string()));
  }
}

TEST_CASE("benchmark requires prior artifacts and names the missing file") {
  TempDir tmp("mfg_cli_missing");
  const ExperimentConfig cfg =
      ParseExperimentConfig(TinyConfig((tmp.path / "run").string()));
  try {
    CmdBenchmark(cfg);
    FAIL("expected a missing-artifact error");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("missing prerequisite artifact") != std::string::npos);
    CHECK(msg.find("training_set.json") != std::string::npos);
  }
}

TEST_CASE("full pipeline on a tiny problem produces labeled matrices") {
  TempDir tmp("mfg_cli_pipeline");
  const ExperimentConfig cfg =
      ParseExperimentConfig(TinyConfig((tmp.path / "run").string()));
  REQUIRE(CmdSolveExact(cfg) == 0);
  REQUIRE(CmdTrainMaster(cfg) == 0);
  REQUIRE(CmdBenchmark(cfg) == 0);
  REQUIRE(CmdExport(cfg) == 0);

  const Json w = ReadJsonFile(
      (tmp.path / "run" / "benchmark" / "w_matrix.json").string());
  const auto rows = w.at("row_labels").get<std::vector<std::string>>();
  const auto cols = w.at("col_labels").get<std::vector<std::string>>();
  // 11 specialized + mixture-reward + unconditioned + uniform-random + master.
  CHECK(rows.size() == 15);
  CHECK(cols.size() == 11);
  CHECK(rows.back() == "master");
  // The diagonal of the specialized block is exactly zero.
  for (int i = 0; i < 11; ++i) {
    CHECK(w.at("values")[i][i].get<double>() == 0.0);
  }
  CHECK(fs::exists(tmp.path / "run" / "export" / "e_matrix_log10.csv"));
}

TEST_CASE("verify passes on the shipped environments") {
  TempDir tmp("mfg_cli_verify");
  ExperimentConfig cfg =
      ParseExperimentConfig(TinyConfig((tmp.path / "run").string()));
  CHECK(CmdVerify(cfg) == 0);
  const std::string report =
      ReadTextFile((tmp.path / "run" / "verify" / "report.txt").string());
  CHECK(report.find("FAIL") == std::string::npos);
  CHECK(report.find("PASS monotonicity-exploration-1d") != std::string::npos);
  CHECK(report.find("PASS gradient-check-conv2d") != std::string::npos);
  CHECK(report.find("PASS oracle-best-response") != std::string::npos);
}

}  // TEST_SUITE

}  // namespace
}  // namespace mfg
