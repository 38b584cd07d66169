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

#include "efignn/heatmap.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"

namespace efignn {
namespace {

std::vector<std::string> Fills(const std::string& svg) {
  static const std::regex kFill("fill=\"(#[0-9a-f]{6})\"");
  std::vector<std::string> out;
  for (std::sregex_iterator it(svg.begin(), svg.end(), kFill), end; it != end; ++it)
    out.push_back((*it)[1]);
  return out;
}

EffectTable FirstOrder(std::vector<double> values) {
  EffectTable t{3, 1, 1, {}};
  for (std::size_t i = 0; i < values.size(); ++i)
    t.entries.push_back({{static_cast<std::uint32_t>(10 + i)}, values[i]});
  return t;
}

std::filesystem::path TempDir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("efignn_heatmap_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

TEST(HeatColorTest, SignsAndIntensity) {
  EXPECT_EQ(heat_color(1.0, 1.0), "#ff0000");
  EXPECT_EQ(heat_color(-1.0, 1.0), "#0000ff");
  EXPECT_EQ(heat_color(0.0, 1.0), "#ffffff");
  EXPECT_EQ(heat_color(0.0, 0.0), "#ffffff");
  EXPECT_EQ(heat_color(0.5, 1.0), "#ff8080");
  EXPECT_EQ(heat_color(-0.5, 1.0), "#8080ff");
}

TEST(SvgTest, AllPositiveTableIsAllRed) {
  const std::string svg = to_svg(FirstOrder({0.2, 1.5, 0.9, 3.0}));
  const std::vector<std::string> fills = Fills(svg);
  ASSERT_EQ(fills.size(), 4u);
  for (const std::string& f : fills) {
    EXPECT_EQ(f.substr(0, 3), "#ff") << f;
    EXPECT_NE(f, "#ffffff");
    EXPECT_EQ(f.substr(3, 2), f.substr(5, 2)) << f;
  }
  EXPECT_NE(svg.find(">13<"), std::string::npos);  // feature label
}

TEST(SvgTest, ZeroIsWhiteAndNegativeIsBlue) {
  const std::vector<std::string> fills = Fills(to_svg(FirstOrder({0.0, -2.0, 1.0})));
  ASSERT_EQ(fills.size(), 3u);
  EXPECT_EQ(fills[0], "#ffffff");
  EXPECT_EQ(fills[1], "#0000ff");
  EXPECT_EQ(fills[2], "#ff8080");
}

TEST(SvgTest, SecondOrderMatrix) {
  EffectTable t{0, 0, 2, {}};
  t.entries = {{{1, 1}, 1.0}, {{1, 4}, -0.5}, {{4, 1}, -0.5}, {{4, 4}, 0.0}};
  const std::string svg = to_svg(t);
  EXPECT_NE(svg.find("width=\"72\" height=\"72\""), std::string::npos) << svg;
  const std::vector<std::string> fills = Fills(svg);
  ASSERT_EQ(fills.size(), 4u);
  EXPECT_EQ(fills, (std::vector<std::string>{"#ff0000", "#8080ff", "#8080ff", "#ffffff"}));
}

TEST(SvgTest, OrderThreeUnsupported) {
  EffectTable t{0, 0, 3, {{{1, 2, 3}, 1.0}}};
  EXPECT_THROW(to_svg(t), HeatmapError);
}

TEST(CsvTest, RoundTrip) {
  std::mt19937_64 gen(91);
  std::uniform_real_distribution<double> dist(-1e3, 1e3);
  EffectTable t{17, 2, 2, {}};
  for (std::uint32_t i = 0; i < 5; ++i)
    for (std::uint32_t j = 0; j < 5; ++j) t.entries.push_back({{i, j}, dist(gen) * 1e-7});
  t.entries.push_back({{7, 8}, 0.0});
  const std::string csv = to_csv(t);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "order,node,class,features,effect");
  EXPECT_NE(csv.find("\n2,17,2,0+1,"), std::string::npos);
  const EffectTable back = parse_csv(csv);
  EXPECT_EQ(back.node, t.node);
  EXPECT_EQ(back.cls, t.cls);
  EXPECT_EQ(back.order, t.order);
  ASSERT_EQ(back.entries.size(), t.entries.size());
  for (std::size_t i = 0; i < t.entries.size(); ++i) {
    EXPECT_EQ(back.entries[i].features, t.entries[i].features);
    EXPECT_LE(std::abs(back.entries[i].effect - t.entries[i].effect), 1e-12);
  }
}

TEST(CsvTest, MalformedInputRejected) {
  EXPECT_THROW(parse_csv("order,node,effect\n"), HeatmapError);
  EXPECT_THROW(parse_csv("order,node,class,features,effect\n1,0,0,3\n"), HeatmapError);
  EXPECT_THROW(parse_csv("order,node,class,features,effect\n1,0,0,3,abc\n"), HeatmapError);
  EXPECT_THROW(parse_csv("order,node,class,features,effect\n1,0,0,3,1\n1,1,0,4,1\n"),
               HeatmapError);
  EXPECT_THROW(parse_csv("order,node,class,features,effect\n2,0,0,3,1\n"), HeatmapError);
}

TEST(WriteHeatmapTest, FormatsAndOrderFallback) {
  const auto dir = TempDir("write");
  const auto both = write_heatmap(FirstOrder({1.0, -1.0}), dir / "o1", HeatmapFormat::kBoth);
  ASSERT_EQ(both.size(), 2u);
  EXPECT_TRUE(std::filesystem::exists(dir / "o1.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "o1.svg"));

  EffectTable t3{0, 0, 3, {{{1, 2, 3}, 1.0}}};
  const auto fallback = write_heatmap(t3, dir / "o3", HeatmapFormat::kSvg);
  ASSERT_EQ(fallback.size(), 1u);
  EXPECT_EQ(fallback[0], dir / "o3.csv");
  EXPECT_FALSE(std::filesystem::exists(dir / "o3.svg"));

  std::ifstream in(dir / "o3.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(parse_csv(ss.str()), t3);
  std::filesystem::remove_all(dir);

  EXPECT_EQ(parse_heatmap_format("both"), HeatmapFormat::kBoth);
  EXPECT_THROW(parse_heatmap_format("png"), std::invalid_argument);
}

}  // namespace
}  // namespace efignn
