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

#include "efignn/model_file.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "efignn/bundle.h"
#include "efignn/trainer.h"
#include "gtest/gtest.h"

namespace efignn {
namespace {

namespace fs = std::filesystem;

ModelFile TrainedJoint() {
  const DatasetBundle b = load_bundle(EFIGNN_FIXTURES "/mini_cora");
  const SparseAdj adj = normalized_adjacency(b.edges);
  ModelConfig cfg;
  cfg.kind = ModelKind::kJoint;
  cfg.in_features = b.meta.features;
  cfg.num_classes = b.meta.classes;
  cfg.efi = EfiGnnConfig{2, 6, 0.2, true};
  GcnConfig g{2, 5};
  g.batch_norm = true;
  g.skip = SkipMode::kDense;
  cfg.gcn = g;
  TrainConfig tc;
  tc.epochs = 5;
  const TrainResult r = train(cfg, {adj, b.features, b.labels, b.masks}, tc);
  return {cfg, r.final_params, {{"dataset", "cora"}, {"seed", "1"}}};
}

std::string ReadAll(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ModelFileError::Code DecodeError(const std::string& bytes) {
  try {
    decode_model(bytes);
  } catch (const ModelFileError& e) {
    return e.code();
  }
  ADD_FAILURE() << "decode succeeded unexpectedly";
  return ModelFileError::Code::kIo;
}

TEST(ModelFileTest, SaveLoadSaveIsByteIdentical) {
  const ModelFile m = TrainedJoint();
  const fs::path a = fs::temp_directory_path() / "efignn_model_a.efig";
  const fs::path b = fs::temp_directory_path() / "efignn_model_b.efig";
  save_model(m, a);
  const ModelFile loaded = load_model(a);
  save_model(loaded, b);
  EXPECT_EQ(ReadAll(a), ReadAll(b));
  EXPECT_EQ(loaded.params, m.params);
  EXPECT_EQ(loaded.info, m.info);
  EXPECT_EQ(ReadAll(a).substr(0, 4), "EFIG");
  fs::remove(a);
  fs::remove(b);
}

TEST(ModelFileTest, LoadedModelPredictsBitwiseEqual) {
  const ModelFile m = TrainedJoint();
  const ModelFile loaded = decode_model(encode_model(m));
  const DatasetBundle b = load_bundle(EFIGNN_FIXTURES "/mini_cora");
  const SparseAdj adj = normalized_adjacency(b.edges);
  EXPECT_EQ(predict(adj, b.features, loaded.params, loaded.config),
            predict(adj, b.features, m.params, m.config));
}

TEST(ModelFileTest, ConfigSurvives) {
  const ModelFile m = TrainedJoint();
  const ModelConfig c = decode_model(encode_model(m)).config;
  EXPECT_EQ(c.kind, ModelKind::kJoint);
  EXPECT_EQ(c.efi->num_layers, 2u);
  EXPECT_EQ(c.efi->dropout, 0.2);
  EXPECT_EQ(c.gcn->skip, SkipMode::kDense);
  EXPECT_TRUE(c.gcn->batch_norm);
  EXPECT_EQ(block_layout(c), block_layout(m.config));
}

TEST(ModelFileTest, TruncationIsChecksumError) {
  const std::string bytes = encode_model(TrainedJoint());
  for (std::size_t cut : {bytes.size() - 1, bytes.size() - 9, bytes.size() / 2, std::size_t{20}})
    EXPECT_EQ(DecodeError(bytes.substr(0, cut)), ModelFileError::Code::kChecksum) << cut;
}

TEST(ModelFileTest, CorruptionAndHeaderErrors) {
  const std::string bytes = encode_model(TrainedJoint());
  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x01;
  EXPECT_EQ(DecodeError(flipped), ModelFileError::Code::kChecksum);
  std::string version = bytes;
  version[4] = static_cast<char>(kModelFileVersion + 1);
  EXPECT_EQ(DecodeError(version), ModelFileError::Code::kVersion);
  std::string magic = bytes;
  magic[0] = 'X';
  EXPECT_EQ(DecodeError(magic), ModelFileError::Code::kBadMagic);
  EXPECT_THROW(load_model(fs::temp_directory_path() / "efignn_no_such_model"), ModelFileError);
}

TEST(ModelFileTest, Fnv1aKnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

}  // namespace
}  // namespace efignn
