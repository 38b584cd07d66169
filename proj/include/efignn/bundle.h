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

// Dataset bundle: a directory of plain files, all binary fields little-endian.
//
//   meta.txt         key=value lines; name, nodes, features, classes
//   graph.edges      one "src<TAB>dst" per line
//   features.bin     "FMAT", u64 rows, u64 cols, f32 row-major
//   labels.bin       "LABL", u64 n, u32 per node
//   split_train.idx  one node index per line (also split_val, split_test)

#ifndef EFIGNN_BUNDLE_H_
#define EFIGNN_BUNDLE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "efignn/sparse_graph.h"
#include "efignn/trainer.h"

namespace efignn {

class BundleError : public std::runtime_error {
 public:
  enum class Code {
    kMissingFile,
    kMalformed,      // unparsable text or bad magic
    kMetaMismatch,   // meta counts disagree with array shapes
    kLabelRange,     // label >= classes
    kIndexRange,     // edge or split index >= nodes
    kSplitOverlap,
    kIo,
  };
  BundleError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

struct BundleMeta {
  std::string name;
  std::size_t nodes = 0;
  std::size_t features = 0;
  std::size_t classes = 0;
  friend bool operator==(const BundleMeta&, const BundleMeta&) = default;
};

struct DatasetBundle {
  BundleMeta meta;
  CsrMatrix features;  // N x M, values widened from f32
  EdgeList edges;      // as stored, not symmetrized
  std::vector<std::uint32_t> labels;
  SplitMasks masks;
  friend bool operator==(const DatasetBundle&, const DatasetBundle&) = default;
};

// Reads and fully validates a bundle. Throws BundleError.
DatasetBundle load_bundle(const std::filesystem::path& dir);
// Creates `dir` if needed and writes every file. Features are narrowed to f32.
void write_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir);

// Number of undirected edges after dropping self-loops and duplicates.
std::size_t undirected_edge_count(const EdgeList& edges);

}  // namespace efignn

#endif  // EFIGNN_BUNDLE_H_
