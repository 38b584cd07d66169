// Copyright 2026 The EFI-GNN Authors
// SPDX-License-Identifier: Apache-2.0
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

// Runs the `efignn` binary as a subprocess.

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "efignn/heatmap.h"
#include "gtest/gtest.h"
#include "json.hpp"

namespace efignn {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

const std::string kToy4 = EFIGNN_FIXTURES "/toy4";
const std::string kMiniCora = EFIGNN_FIXTURES "/mini_cora";

struct RunResult {
  int code = -1;
  std::string output;  // stdout and stderr interleaved
};

RunResult RunCli(const std::string& args) {
  const std::string cmd = "EFIGNN_THREADS=1 '" EFIGNN_CLI "' " + args + " 2>&1";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

// The last line that parses as a JSON object.
json LastJson(const std::string& output) {
  std::istringstream in(output);
  std::string line;
  json last;
  while (std::getline(in, line))
    if (!line.empty() && line.front() == '{') last = json::parse(line);
  return last;
}

fs::path Scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("efignn_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(CliTest, TrainAppliesCitationDefaultsFromMeta) {
  const RunResult r = RunCli("train --dataset " + kMiniCora + " --model joint --epochs 3");
  ASSERT_EQ(r.code, 0) << r.output;
  const json j = LastJson(r.output);
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["dataset"], "cora");
  EXPECT_EQ(j["model"]["efi"]["layers"], 2);
  EXPECT_EQ(j["model"]["efi"]["units"], 128);
  EXPECT_EQ(j["model"]["efi"]["dropout"], 0.9);
  EXPECT_EQ(j["model"]["gcn"]["layers"], 3);
  EXPECT_EQ(j["model"]["gcn"]["skip"], "none");
  EXPECT_EQ(j["model"]["gcn"]["batch_norm"], false);
  EXPECT_EQ(j["train"]["learning_rate"], 0.001);
  EXPECT_EQ(j["train"]["weight_decay"], 0.01);
  EXPECT_EQ(j["train"]["epochs"], 3);
  EXPECT_TRUE(j.contains("wall_seconds"));
  EXPECT_NE(r.output.find("test accuracy at best val"), std::string::npos);
}

TEST(CliTest, SingleSeedSummaryIsDeterministic) {
  const std::string args = "train --dataset " + kToy4 + " --model joint --seeds 1";
  const RunResult a = RunCli(args);
  const RunResult b = RunCli(args);
  ASSERT_EQ(a.code, 0) << a.output;
  ASSERT_EQ(b.code, 0) << b.output;
  json ja = LastJson(a.output), jb = LastJson(b.output);
  EXPECT_EQ(ja["model"]["efi"]["layers"], 1);  // large-benchmark defaults
  EXPECT_EQ(ja["train"]["epochs"], 1000);
  ja.erase("wall_seconds");
  jb.erase("wall_seconds");
  EXPECT_EQ(ja.dump(), jb.dump());
  EXPECT_NE(a.output.find("no tuned defaults"), std::string::npos);
}

TEST(CliTest, MultiSeedSummaryIndependentOfThreads) {
  const std::string args =
      "train --dataset " + kMiniCora + " --model efignn --epochs 20 --seeds 3,1,2";
  const RunResult one = RunCli(args);
  const std::string cmd = std::string("env EFIGNN_THREADS=3 '") + EFIGNN_CLI + "' " + args;
  RunResult three;
  {
    FILE* pipe = popen((cmd + " 2>/dev/null").c_str(), "r");
    ASSERT_NE(pipe, nullptr);
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) three.output.append(buf.data(), n);
    three.code = WEXITSTATUS(pclose(pipe));
  }
  ASSERT_EQ(one.code, 0);
  ASSERT_EQ(three.code, 0);
  json a = LastJson(one.output), b = LastJson(three.output);
  EXPECT_EQ(a["seeds"], json::array({3, 1, 2}));
  a.erase("wall_seconds");
  b.erase("wall_seconds");
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(CliTest, UsageErrors) {
  EXPECT_EQ(RunCli("train --dataset " + kToy4 + " --model joint --precision f32").code, 1);
  const RunResult gcn = RunCli("train --dataset " + kToy4 + " --model gcn --efi-layers 2");
  EXPECT_EQ(gcn.code, 1);
  EXPECT_NE(gcn.output.find("do not apply"), std::string::npos) << gcn.output;
  EXPECT_EQ(RunCli("train --dataset " + kToy4 + " --model efignn --skip dense").code, 1);
  EXPECT_EQ(RunCli("train --dataset " + kToy4 + " --model transformer").code, 1);
  EXPECT_EQ(RunCli("train --dataset /nonexistent/bundle --model joint").code, 1);
  EXPECT_EQ(RunCli("train --dataset " + kToy4 + " --model joint --seeds 1,x").code, 1);
  EXPECT_EQ(RunCli("frobnicate").code, 1);
}

TEST(CliTest, TrainEvaluateExplain) {
  const fs::path dir = Scratch("explain");
  const std::string model = (dir / "m.efig").string();
  ASSERT_EQ(RunCli("train --dataset " + kMiniCora + " --model joint --epochs 30 --out " + model).code,
            0);
  const RunResult ev = RunCli("evaluate --model " + model + " --dataset " + kMiniCora);
  ASSERT_EQ(ev.code, 0) << ev.output;
  const json ej = LastJson(ev.output);
  EXPECT_EQ(ej["command"], "evaluate");
  EXPECT_TRUE(ej.contains("test_acc_pct"));

  // Node 1 has five active features.
  const std::string stem = (dir / "n1").string();
  const RunResult o1 = RunCli("explain --model " + model + " --dataset " + kMiniCora +
                           " --node 1 --class 1 --order 1 --out-prefix " + stem);
  ASSERT_EQ(o1.code, 0) << o1.output;
  std::ifstream csv(stem + ".csv");
  std::stringstream ss;
  ss << csv.rdbuf();
  const EffectTable t = parse_csv(ss.str());
  EXPECT_EQ(t.entries.size(), 5u);
  EXPECT_TRUE(fs::exists(stem + ".svg"));

  const RunResult o2 = RunCli("explain --model " + model + " --dataset " + kMiniCora +
                           " --node 1 --class 0 --order 2 --format csv --out-prefix " + stem + "_2");
  ASSERT_EQ(o2.code, 0) << o2.output;
  std::ifstream csv2(stem + "_2.csv");
  std::stringstream ss2;
  ss2 << csv2.rdbuf();
  EXPECT_EQ(parse_csv(ss2.str()).entries.size(), 25u);

  // Node 5 has no active features.
  const RunResult empty = RunCli("explain --model " + model + " --dataset " + kMiniCora +
                              " --node 5 --class 0 --order 1 --out-prefix " + (dir / "n5").string());
  EXPECT_EQ(empty.code, 0) << empty.output;
  EXPECT_NE(empty.output.find("warning: empty effect table"), std::string::npos);

  EXPECT_EQ(RunCli("explain --model " + model + " --dataset " + kMiniCora +
                " --node 12 --class 0 --out-prefix " + (dir / "x").string())
                .code,
            1);
  EXPECT_EQ(RunCli("explain --model " + model + " --dataset " + kMiniCora +
                " --node 0 --class 3 --out-prefix " + (dir / "x").string())
                .code,
            1);
  fs::remove_all(dir);
}

TEST(CliTest, OrderBeyondDepthOnZeroLayerModel) {
  const fs::path dir = Scratch("depth");
  const std::string model = (dir / "l0.efig").string();
  ASSERT_EQ(RunCli("train --dataset " + kMiniCora + " --model efignn --efi-layers 0 --epochs 5 --out " +
                model)
                .code,
            0);
  const RunResult r = RunCli("explain --model " + model + " --dataset " + kMiniCora +
                          " --node 1 --class 0 --order 2 --out-prefix " + (dir / "o2").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("order exceeds model depth"), std::string::npos) << r.output;
  fs::remove_all(dir);
}

TEST(CliTest, VerifyExitCodes) {
  const RunResult ok = RunCli("verify");
  EXPECT_EQ(ok.code, 0) << ok.output;
  EXPECT_EQ(ok.output.find("FAIL"), std::string::npos) << ok.output;
  const RunResult bug = RunCli("verify --inject-gradient-bug");
  EXPECT_EQ(bug.code, 2) << bug.output;
  EXPECT_NE(bug.output.find("FAIL"), std::string::npos);
}

}  // namespace
}  // namespace efignn
