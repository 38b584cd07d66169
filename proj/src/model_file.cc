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

#include <bit>
#include <fstream>
#include <sstream>
#include <vector>

#include "json.hpp"

namespace efignn {
namespace {

using json = nlohmann::json;
using Code = ModelFileError::Code;

void put_u32(std::string& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

// Bounds-checked little-endian reader.
class Reader {
 public:
  explicit Reader(std::string_view b) : b_(b) {}
  std::uint32_t u32() { return static_cast<std::uint32_t>(read(4)); }
  std::uint64_t u64() { return read(8); }
  std::string_view bytes(std::uint64_t n) {
    need(n);
    std::string_view s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  void need(std::uint64_t n) const {
    if (n > b_.size() - pos_)
      throw ModelFileError(Code::kMalformed, "model file: truncated payload at byte " +
                                                 std::to_string(pos_));
  }
  std::uint64_t read(int n) {
    need(n);
    std::uint64_t v = 0;
    for (int i = n - 1; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b_[pos_ + i]);
    pos_ += n;
    return v;
  }
  std::string_view b_;
  std::size_t pos_ = 0;
};

json config_to_json(const ModelConfig& c) {
  json j;
  j["kind"] = std::string(to_string(c.kind));
  j["in_features"] = c.in_features;
  j["num_classes"] = c.num_classes;
  if (c.efi) {
    j["efi"] = {{"num_layers", c.efi->num_layers},
                {"units", c.efi->units},
                {"dropout", c.efi->dropout},
                {"include_block0", c.efi->include_block0}};
  }
  if (c.gcn) {
    j["gcn"] = {{"num_layers", c.gcn->num_layers},   {"units", c.gcn->units},
                {"slope", c.gcn->slope},             {"dropout", c.gcn->dropout},
                {"skip", std::string(to_string(c.gcn->skip))},
                {"batch_norm", c.gcn->batch_norm},   {"bn_eps", c.gcn->bn_eps},
                {"bn_momentum", c.gcn->bn_momentum}};
  }
  return j;
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.kind = parse_model_kind(j.at("kind").get<std::string>());
  c.in_features = j.at("in_features").get<std::size_t>();
  c.num_classes = j.at("num_classes").get<std::size_t>();
  if (j.contains("efi")) {
    const json& e = j.at("efi");
    EfiGnnConfig efi;
    efi.num_layers = e.at("num_layers").get<std::size_t>();
    efi.units = e.at("units").get<std::size_t>();
    efi.dropout = e.at("dropout").get<double>();
    efi.include_block0 = e.at("include_block0").get<bool>();
    c.efi = efi;
  }
  if (j.contains("gcn")) {
    const json& g = j.at("gcn");
    GcnConfig gcn;
    gcn.num_layers = g.at("num_layers").get<std::size_t>();
    gcn.units = g.at("units").get<std::size_t>();
    gcn.slope = g.at("slope").get<double>();
    gcn.dropout = g.at("dropout").get<double>();
    gcn.skip = parse_skip_mode(g.at("skip").get<std::string>());
    gcn.batch_norm = g.at("batch_norm").get<bool>();
    gcn.bn_eps = g.at("bn_eps").get<double>();
    gcn.bn_momentum = g.at("bn_momentum").get<double>();
    c.gcn = gcn;
  }
  return c;
}

json blocks_to_json(const std::vector<Block>& blocks) {
  json arr = json::array();
  for (const Block& b : blocks)
    arr.push_back({{"branch", b.branch == Block::Branch::kEfi ? "efi" : "gcn"},
                   {"layer", b.layer},
                   {"begin", b.begin},
                   {"width", b.width}});
  return arr;
}

// Blob names and targets in file order.
std::vector<std::pair<std::string, DenseMat*>> blob_slots(ModelParams& p) {
  std::vector<std::pair<std::string, DenseMat*>> out;
  for (auto& e : p.entries()) out.emplace_back(e.name, e.value);
  for (std::size_t i = 0; i < p.gcn_bn.size(); ++i) {
    const std::string base = "gcn.bn" + std::to_string(i + 1);
    out.emplace_back(base + ".running_mean", &p.gcn_bn[i].stats.running_mean);
    out.emplace_back(base + ".running_var", &p.gcn_bn[i].stats.running_var);
  }
  return out;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string encode_model(const ModelFile& model) {
  model.config.validate();
  json j;
  j["config"] = config_to_json(model.config);
  j["blocks"] = blocks_to_json(block_layout(model.config));
  j["info"] = model.info;
  const std::string text = j.dump();

  ModelParams params = model.params;
  const auto slots = blob_slots(params);
  std::string payload;
  put_u64(payload, text.size());
  payload += text;
  put_u32(payload, static_cast<std::uint32_t>(slots.size()));
  for (const auto& [name, m] : slots) {
    put_u32(payload, static_cast<std::uint32_t>(name.size()));
    payload += name;
    put_u64(payload, m->rows());
    put_u64(payload, m->cols());
    for (double v : m->values()) put_u64(payload, std::bit_cast<std::uint64_t>(v));
  }

  std::string out = "EFIG";
  put_u32(out, kModelFileVersion);
  put_u64(out, payload.size());
  out += payload;
  put_u64(out, fnv1a64(payload));
  return out;
}

ModelFile decode_model(std::string_view bytes) {
  if (bytes.size() < 16 || bytes.substr(0, 4) != "EFIG")
    throw ModelFileError(Code::kBadMagic, "not a model file (missing EFIG magic)");
  Reader head(bytes.substr(4, 12));
  const std::uint32_t version = head.u32();
  if (version != kModelFileVersion)
    throw ModelFileError(Code::kVersion, "model file version " + std::to_string(version) +
                                             " unsupported (expected " +
                                             std::to_string(kModelFileVersion) + ")");
  const std::uint64_t len = head.u64();
  if (bytes.size() < 16 + 8 || len != bytes.size() - 16 - 8)
    throw ModelFileError(Code::kChecksum, "model file truncated or padded: payload length " +
                                              std::to_string(len) + " vs file size " +
                                              std::to_string(bytes.size()));
  const std::string_view payload = bytes.substr(16, len);
  Reader tail(bytes.substr(16 + len));
  if (tail.u64() != fnv1a64(payload))
    throw ModelFileError(Code::kChecksum, "model file checksum mismatch");

  Reader r(payload);
  const std::string_view text = r.bytes(r.u64());
  ModelFile out;
  try {
    const json j = json::parse(text);
    out.config = config_from_json(j.at("config"));
    out.config.validate();
    if (j.at("blocks") != blocks_to_json(block_layout(out.config)))
      throw ModelFileError(Code::kMalformed, "model file: block offsets disagree with config");
    out.info = j.at("info").get<std::map<std::string, std::string>>();
  } catch (const json::exception& e) {
    throw ModelFileError(Code::kMalformed, std::string("model file: bad header JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ModelFileError(Code::kMalformed, std::string("model file: bad config: ") + e.what());
  }

  Rng shape_only(0);
  out.params = init_params(out.config, shape_only);
  const auto slots = blob_slots(out.params);
  const std::uint32_t count = r.u32();
  if (count != slots.size())
    throw ModelFileError(Code::kMalformed, "model file: " + std::to_string(count) +
                                               " blobs, config implies " +
                                               std::to_string(slots.size()));
  for (const auto& [name, m] : slots) {
    const std::string_view got = r.bytes(r.u32());
    if (got != name)
      throw ModelFileError(Code::kMalformed, "model file: expected blob '" + name + "', found '" +
                                                 std::string(got) + "'");
    const std::uint64_t rows = r.u64();
    const std::uint64_t cols = r.u64();
    if (rows != m->rows() || cols != m->cols())
      throw ModelFileError(Code::kMalformed, "model file: blob '" + name + "' is " +
                                                 std::to_string(rows) + "x" +
                                                 std::to_string(cols) + ", expected " +
                                                 m->shape_string());
    for (double& v : m->values()) v = std::bit_cast<double>(r.u64());
  }
  if (!r.done()) throw ModelFileError(Code::kMalformed, "model file: trailing payload bytes");
  return out;
}

void save_model(const ModelFile& model, const std::filesystem::path& path) {
  const std::string bytes = encode_model(model);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ModelFileError(Code::kIo, "cannot open " + path.string() + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw ModelFileError(Code::kIo, "write failed: " + path.string());
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ModelFileError(Code::kIo, "cannot open model file " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return decode_model(ss.str());
}

}  // namespace efignn
