// Copyright 2026 The ppkm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Drives the ppkm binary end to end.

#include <stdlib.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gtest/gtest.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Outcome {
  int exit_code = -1;
  std::string out;
};

Outcome Cli(const std::string& args, const std::string& env = "") {
  const std::string command =
      env + " " + PPKM_CLI_PATH + " " + args + " 2>/dev/null";
  Outcome o;
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return o;
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) o.out.append(buf, got);
  const int status = pclose(pipe);
  o.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    char tmpl[] = "/tmp/ppkm-cli-XXXXXX";
    ASSERT_NE(mkdtemp(tmpl), nullptr);
    dir_ = tmpl;
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Data() const {
    return std::string(PPKM_GOLDEN_DIR) + "/blobs.csv --header --id-column 0";
  }
  std::string Out(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

// blobs_report.json was produced by this command; regenerate it when the
// report schema or the sampling changes on purpose.
TEST_F(CliTest, ReportMatchesGolden) {
  Outcome o = Cli("run --data " + Data() + " --k 3 --seed 11 --t 4 --out " +
                  Out("a") + " --with-oracle");
  ASSERT_EQ(o.exit_code, 0) << o.out;
  const json golden =
      json::parse(Slurp(std::string(PPKM_GOLDEN_DIR) + "/blobs_report.json"));
  const json report = json::parse(Slurp(dir_ / "a" / "report.json"));
  EXPECT_EQ(report, golden) << report.dump(2);
  EXPECT_EQ(json::parse(o.out), report);
  EXPECT_TRUE(report["oracle"]["assignments_match"].get<bool>());
  EXPECT_TRUE(report["oracle"]["iterations_equal"].get<bool>());
  for (const char* file : {"labels.csv", "centers.json", "transcript.jsonl"}) {
    EXPECT_TRUE(fs::exists(dir_ / "a" / file)) << file;
  }
  EXPECT_EQ(Slurp(dir_ / "a" / "labels.csv").substr(0, 9), "id,label\n");
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(Cli("run --no-such-flag").exit_code, 2);
  EXPECT_EQ(Cli("run --data " + Data() + " --k 0").exit_code, 2);
  EXPECT_EQ(Cli("run --data " + Data() + " --k 3 --mode sideways").exit_code, 2);
  EXPECT_EQ(Cli("").exit_code, 2);
  EXPECT_EQ(Cli("bogus-command").exit_code, 2);
}

TEST_F(CliTest, RuntimeErrorsExitOne) {
  EXPECT_EQ(Cli("run --data /nonexistent.csv --k 2 --out " + Out("x")).exit_code,
            1);
  EXPECT_EQ(Cli("run --data " + Data() + " --k 500 --out " + Out("y")).exit_code,
            1);
}

TEST_F(CliTest, ZeroIterationsReportsNotConverged) {
  Outcome o = Cli("run --data " + Data() + " --k 3 --max-iters 0 --out " +
                  Out("z"));
  ASSERT_EQ(o.exit_code, 0);
  const json report = json::parse(o.out);
  EXPECT_FALSE(report["converged"].get<bool>());
  EXPECT_EQ(report["iterations"], 0);
}

TEST_F(CliTest, OracleLabelsMatchRunLabels) {
  ASSERT_EQ(Cli("run --data " + Data() + " --k 3 --seed 5 --out " + Out("r"))
                .exit_code,
            0);
  Outcome o = Cli("oracle --data " + Data() + " --k 3 --seed 5 --out " +
                  Out("o"));
  ASSERT_EQ(o.exit_code, 0);
  EXPECT_EQ(Slurp(dir_ / "r" / "labels.csv"), Slurp(dir_ / "o" / "labels.csv"));
  EXPECT_TRUE(json::parse(o.out).contains("baseline_cost"));
}

TEST_F(CliTest, SpawnedTcpMatchesInProcess) {
  ASSERT_EQ(Cli("run --data " + Data() + " --k 3 --seed 9 --t 4 --out " +
                Out("local"))
                .exit_code,
            0);
  Outcome o = Cli("run --data " + Data() +
                  " --k 3 --seed 9 --t 4 --transport tcp --spawn --out " +
                  Out("tcp"));
  ASSERT_EQ(o.exit_code, 0) << o.out;
  EXPECT_EQ(Slurp(dir_ / "local" / "labels.csv"),
            Slurp(dir_ / "tcp" / "labels.csv"));
  EXPECT_EQ(Slurp(dir_ / "local" / "centers.json"),
            Slurp(dir_ / "tcp" / "centers.json"));
}

TEST_F(CliTest, ConfigFileAndEnvironmentSeed) {
  {
    std::ofstream cfg(dir_ / "cfg.json");
    cfg << R"({"k": 3, "seed": 11, "t": 4, "with-oracle": true})";
  }
  Outcome from_file = Cli("run --data " + Data() + " --config " +
                          Out("cfg.json") + " --out " + Out("c"));
  ASSERT_EQ(from_file.exit_code, 0);
  const json golden =
      json::parse(Slurp(std::string(PPKM_GOLDEN_DIR) + "/blobs_report.json"));
  EXPECT_EQ(json::parse(from_file.out), golden);

  // Command-line flags win over the file.
  Outcome override = Cli("run --data " + Data() + " --config " +
                         Out("cfg.json") + " --k 2 --out " + Out("c2"));
  ASSERT_EQ(override.exit_code, 0);
  EXPECT_EQ(json::parse(override.out)["config"]["k"], 2);

  Outcome env = Cli("run --data " + Data() + " --k 3 --t 4 --with-oracle --out " +
                        Out("e"),
                    "PPKM_SEED=11");
  ASSERT_EQ(env.exit_code, 0);
  EXPECT_EQ(json::parse(env.out), golden);

  {
    std::ofstream bad(dir_ / "bad.json");
    bad << R"({"kay": 3})";
  }
  EXPECT_EQ(Cli("run --data " + Data() + " --config " + Out("bad.json") +
                " --out " + Out("b"))
                .exit_code,
            2);
}

TEST_F(CliTest, PlanParamsSecurity) {
  Outcome o = Cli("plan-params --n 65536 --d 16 --ell1 64 --ell2 32");
  ASSERT_EQ(o.exit_code, 0);
  const json plan = json::parse(o.out);
  EXPECT_TRUE(plan["security_plan"]["secure"].get<bool>());
  EXPECT_NEAR(plan["required_bits"]["two_ell1_plus_ell2"].get<double>(),
              104.95419631038688, 1e-9);
  Outcome weak = Cli("plan-params --n 65536 --d 16 --ell1 34 --ell2 32");
  ASSERT_EQ(weak.exit_code, 0);
  EXPECT_FALSE(json::parse(weak.out)["security_plan"]["secure"].get<bool>());

  Outcome strict = Cli("plan-params --data " + Data() + " --mode strict");
  ASSERT_EQ(strict.exit_code, 0);
  EXPECT_GT(json::parse(strict.out)["bounds"]["r_lower"].get<double>(), 0.0);
}

TEST_F(CliTest, AnalyzeModes) {
  Outcome table = Cli("analyze --attack-table");
  ASSERT_EQ(table.exit_code, 0);
  EXPECT_EQ(json::parse(table.out)["attack_table"].size(), 10u);

  Outcome one = Cli("analyze --K 2 --R 1000 --c 0.01 --d 2");
  ASSERT_EQ(one.exit_code, 0);
  EXPECT_NEAR(json::parse(one.out)["attack_cost"]["log2_x"].get<double>(), 33.2193, 1e-3);

  Outcome kl = Cli("analyze --kl --x11 4 --x21 1 --x31 2 --x41 6 --r1 10 "
                   "--eps 0.1 --d 8");
  ASSERT_EQ(kl.exit_code, 0) << kl.out;
  EXPECT_NEAR(
      json::parse(kl.out)["kl"]["kd_quotient_bound"]["value"].get<double>(),
      0.1093650825555917244, 1e-15);

  ASSERT_EQ(Cli("run --data " + Data() + " --k 3 --out " + Out("t")).exit_code,
            0);
  Outcome leak = Cli("analyze --kl --transcript " +
                     (dir_ / "t" / "transcript.jsonl").string());
  ASSERT_EQ(leak.exit_code, 0);
  EXPECT_EQ(json::parse(leak.out)["kl"]["transcript"]["points"], 45) << leak.out;

  Outcome cost = Cli("analyze --cost --n 100 --k 3 --d 2 --m 5");
  ASSERT_EQ(cost.exit_code, 0);
  EXPECT_EQ(json::parse(cost.out)["baseline_cost"]["local_multiplications"],
            3000);
}

}  // namespace
