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

#include "efignn/bundle.h"

#include <filesystem>
#include <fstream>
#include <string>

#include "gtest/gtest.h"

namespace efignn {
namespace {

namespace fs = std::filesystem;

const fs::path kToy4 = EFIGNN_FIXTURES "/toy4";
const fs::path kMiniCora = EFIGNN_FIXTURES "/mini_cora";

fs::path ScratchCopy(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("efignn_bundle_" + name);
  fs::remove_all(dir);
  fs::copy(kToy4, dir);
  return dir;
}

void WriteText(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary | std::ios::trunc) << text;
}

BundleError::Code LoadError(const fs::path& dir) {
  try {
    load_bundle(dir);
  } catch (const BundleError& e) {
    return e.code();
  }
  ADD_FAILURE() << "bundle at " << dir << " loaded unexpectedly";
  return BundleError::Code::kIo;
}

TEST(BundleTest, Toy4Contents) {
  const DatasetBundle b = load_bundle(kToy4);
  EXPECT_EQ(b.meta, (BundleMeta{"toy4", 4, 3, 2}));
  EXPECT_EQ(b.features.to_dense(), (DenseMat{{1, 0, 0}, {1, 0, 1}, {0, 1, 0}, {0, 1, 1}}));
  EXPECT_EQ(b.labels, (std::vector<std::uint32_t>{0, 0, 1, 1}));
  EXPECT_EQ(b.edges, (EdgeList{{{0, 1}, {1, 2}, {2, 3}}, 4}));
  EXPECT_EQ(b.masks, (SplitMasks{{0, 2}, {1}, {3}}));
  EXPECT_EQ(undirected_edge_count(b.edges), 3u);
}

TEST(BundleTest, RoundTrip) {
  for (const fs::path& src : {kToy4, kMiniCora}) {
    const DatasetBundle b = load_bundle(src);
    const fs::path out = fs::temp_directory_path() / "efignn_bundle_roundtrip";
    fs::remove_all(out);
    write_bundle(b, out);
    EXPECT_EQ(load_bundle(out), b) << src;
    fs::remove_all(out);
  }
}

TEST(BundleTest, MiniCoraStatistics) {
  const DatasetBundle b = load_bundle(kMiniCora);
  EXPECT_EQ(b.meta.nodes, 12u);
  EXPECT_EQ(b.meta.features, 10u);
  EXPECT_EQ(b.meta.classes, 3u);
  EXPECT_EQ(b.edges.edges.size(), 16u);
  EXPECT_EQ(b.masks.train.size() + b.masks.val.size() + b.masks.test.size(), 12u);
}

TEST(BundleTest, TamperedNodeCountRejected) {
  const fs::path dir = ScratchCopy("nodes");
  WriteText(dir / "meta.txt", "name=toy4\nnodes=5\nfeatures=3\nclasses=2\n");
  EXPECT_EQ(LoadError(dir), BundleError::Code::kMetaMismatch);
  fs::remove_all(dir);
}

TEST(BundleTest, DeclaredCountsChecked) {
  const fs::path dir = ScratchCopy("counts");
  WriteText(dir / "meta.txt", "name=toy4\nnodes=4\nfeatures=3\nclasses=2\nedges=4\n");
  EXPECT_EQ(LoadError(dir), BundleError::Code::kMetaMismatch);
  fs::remove_all(dir);
}

TEST(BundleTest, DistinctDiagnostics) {
  {
    const fs::path dir = ScratchCopy("missing");
    fs::remove(dir / "labels.bin");
    EXPECT_EQ(LoadError(dir), BundleError::Code::kMissingFile);
    fs::remove_all(dir);
  }
  EXPECT_EQ(LoadError(fs::temp_directory_path() / "efignn_bundle_absent"),
            BundleError::Code::kMissingFile);
  {
    const fs::path dir = ScratchCopy("label");
    DatasetBundle b = load_bundle(kToy4);
    b.meta.classes = 1;  // write_bundle does not check labels
    fs::remove_all(dir);
    write_bundle(b, dir);
    EXPECT_EQ(LoadError(dir), BundleError::Code::kLabelRange);
    fs::remove_all(dir);
  }
  {
    const fs::path dir = ScratchCopy("edge");
    WriteText(dir / "graph.edges", "0\t1\n1\t7\n");
    EXPECT_EQ(LoadError(dir), BundleError::Code::kIndexRange);
    fs::remove_all(dir);
  }
  {
    const fs::path dir = ScratchCopy("split");
    WriteText(dir / "split_test.idx", "9\n");
    EXPECT_EQ(LoadError(dir), BundleError::Code::kIndexRange);
    fs::remove_all(dir);
  }
  {
    const fs::path dir = ScratchCopy("overlap");
    WriteText(dir / "split_test.idx", "1\n");
    EXPECT_EQ(LoadError(dir), BundleError::Code::kSplitOverlap);
    fs::remove_all(dir);
  }
  {
    const fs::path dir = ScratchCopy("magic");
    WriteText(dir / "features.bin", "XMAT0000000000000000");
    EXPECT_EQ(LoadError(dir), BundleError::Code::kMalformed);
    fs::remove_all(dir);
  }
  {
    const fs::path dir = ScratchCopy("text");
    WriteText(dir / "graph.edges", "0 one\n");
    EXPECT_EQ(LoadError(dir), BundleError::Code::kMalformed);
    fs::remove_all(dir);
  }
}

TEST(BundleTest, UndirectedEdgeCount) {
  EXPECT_EQ(undirected_edge_count({{{0, 1}, {1, 0}, {2, 2}, {1, 2}, {0, 1}}, 3}), 2u);
}

}  // namespace
}  // namespace efignn
