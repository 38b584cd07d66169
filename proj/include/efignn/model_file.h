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

// Trained-model file, all integers and floats little-endian:
//
//   "EFIG"  u32 version  u64 payload_bytes  payload  u64 fnv1a64(payload)
//
// payload = u64 json_bytes, JSON (model config, block offsets, info),
// u32 blob count, then per blob: u32 name_bytes, name, u64 rows, u64 cols,
// rows*cols f64 row-major. Blob names follow ModelParams::entries() plus
// gcn.bn<l>.running_mean / running_var.

#ifndef EFIGNN_MODEL_FILE_H_
#define EFIGNN_MODEL_FILE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

#include "efignn/model.h"

namespace efignn {

inline constexpr std::uint32_t kModelFileVersion = 1;

class ModelFileError : public std::runtime_error {
 public:
  enum class Code { kIo, kBadMagic, kVersion, kChecksum, kMalformed };
  ModelFileError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

struct ModelFile {
  ModelConfig config;
  ModelParams params;
  // Free-form provenance (dataset name, seed, ...). Serialized as strings.
  std::map<std::string, std::string> info;
};

std::uint64_t fnv1a64(std::string_view bytes);

std::string encode_model(const ModelFile& model);
// Throws ModelFileError.
ModelFile decode_model(std::string_view bytes);

void save_model(const ModelFile& model, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace efignn

#endif  // EFIGNN_MODEL_FILE_H_
