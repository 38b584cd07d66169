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

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string_view>

namespace efignn {
namespace {

namespace fs = std::filesystem;
using Code = BundleError::Code;

std::string read_file(const fs::path& path) {
  if (!fs::exists(path))
    throw BundleError(Code::kMissingFile, "bundle file missing: " + path.string());
  std::ifstream f(path, std::ios::binary);
  if (!f) throw BundleError(Code::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& data) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw BundleError(Code::kIo, "cannot open " + path.string() + " for writing");
  f.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!f) throw BundleError(Code::kIo, "write failed: " + path.string());
}

std::uint64_t get_u64(std::string_view b, std::size_t off) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[off + i]);
  return v;
}

std::uint32_t get_u32(std::string_view b, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[off + i]);
  return v;
}

void put_u64(std::string& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u32(std::string& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::uint64_t parse_count(std::string_view s, const std::string& where) {
  s = trim(s);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw BundleError(Code::kMalformed, where + ": expected a non-negative integer, got '" +
                                            std::string(s) + "'");
  return v;
}

template <typename F>
void for_each_line(const std::string& text, F&& f) {
  std::size_t line = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    ++line;
    const std::string_view l = trim(std::string_view(text).substr(start, end - start));
    if (!l.empty()) f(l, line);
    start = end + 1;
  }
}

BundleMeta read_meta(const fs::path& dir, std::map<std::string, std::string>& extra) {
  const fs::path path = dir / "meta.txt";
  const std::string text = read_file(path);
  std::map<std::string, std::string> kv;
  for_each_line(text, [&](std::string_view l, std::size_t line) {
    if (l.front() == '#') return;
    const std::size_t eq = l.find('=');
    if (eq == std::string_view::npos)
      throw BundleError(Code::kMalformed, path.string() + ":" + std::to_string(line) +
                                              ": expected key=value");
    kv[std::string(trim(l.substr(0, eq)))] = std::string(trim(l.substr(eq + 1)));
  });
  auto need = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end())
      throw BundleError(Code::kMalformed, path.string() + ": missing key '" + key + "'");
    return it->second;
  };
  BundleMeta m;
  m.name = need("name");
  m.nodes = parse_count(need("nodes"), path.string() + " nodes");
  m.features = parse_count(need("features"), path.string() + " features");
  m.classes = parse_count(need("classes"), path.string() + " classes");
  for (const auto& [k, v] : kv)
    if (k != "name" && k != "nodes" && k != "features" && k != "classes") extra[k] = v;
  return m;
}

void check_meta_count(const std::map<std::string, std::string>& extra, const char* key,
                      std::size_t actual) {
  auto it = extra.find(key);
  if (it == extra.end()) return;
  const std::uint64_t declared = parse_count(it->second, std::string("meta.txt ") + key);
  if (declared != actual)
    throw BundleError(Code::kMetaMismatch, std::string("meta.txt declares ") + key + "=" +
                                               std::to_string(declared) + " but bundle has " +
                                               std::to_string(actual));
}

CsrMatrix read_features(const fs::path& dir, const BundleMeta& meta) {
  const fs::path path = dir / "features.bin";
  const std::string b = read_file(path);
  if (b.size() < 20 || b.compare(0, 4, "FMAT") != 0)
    throw BundleError(Code::kMalformed, path.string() + ": bad magic (expected FMAT)");
  const std::uint64_t rows = get_u64(b, 4);
  const std::uint64_t cols = get_u64(b, 12);
  if (rows != meta.nodes || cols != meta.features)
    throw BundleError(Code::kMetaMismatch,
                      path.string() + ": shape " + std::to_string(rows) + "x" +
                          std::to_string(cols) + " but meta says " + std::to_string(meta.nodes) +
                          "x" + std::to_string(meta.features));
  if (b.size() != 20 + rows * cols * 4)
    throw BundleError(Code::kMalformed, path.string() + ": expected " +
                                            std::to_string(20 + rows * cols * 4) +
                                            " bytes, found " + std::to_string(b.size()));
  CsrMatrix x;
  x.rows = rows;
  x.cols = cols;
  x.row_ptr.assign(1, 0);
  std::size_t off = 20;
  for (std::uint64_t r = 0; r < rows; ++r) {
    for (std::uint64_t c = 0; c < cols; ++c, off += 4) {
      const float f = std::bit_cast<float>(get_u32(b, off));
      if (!std::isfinite(f))
        throw BundleError(Code::kMalformed, path.string() + ": non-finite value at (" +
                                                std::to_string(r) + "," + std::to_string(c) +
                                                ")");
      if (f != 0.0f) {
        x.col_idx.push_back(static_cast<std::uint32_t>(c));
        x.values.push_back(static_cast<double>(f));
      }
    }
    x.row_ptr.push_back(x.col_idx.size());
  }
  return x;
}

std::vector<std::uint32_t> read_labels(const fs::path& dir, const BundleMeta& meta) {
  const fs::path path = dir / "labels.bin";
  const std::string b = read_file(path);
  if (b.size() < 12 || b.compare(0, 4, "LABL") != 0)
    throw BundleError(Code::kMalformed, path.string() + ": bad magic (expected LABL)");
  const std::uint64_t n = get_u64(b, 4);
  if (n != meta.nodes)
    throw BundleError(Code::kMetaMismatch, path.string() + ": " + std::to_string(n) +
                                               " labels but meta says " +
                                               std::to_string(meta.nodes) + " nodes");
  if (b.size() != 12 + n * 4)
    throw BundleError(Code::kMalformed, path.string() + ": expected " +
                                            std::to_string(12 + n * 4) + " bytes, found " +
                                            std::to_string(b.size()));
  std::vector<std::uint32_t> labels(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    labels[i] = get_u32(b, 12 + 4 * i);
    if (labels[i] >= meta.classes)
      throw BundleError(Code::kLabelRange, path.string() + ": node " + std::to_string(i) +
                                               " has label " + std::to_string(labels[i]) +
                                               " >= classes " + std::to_string(meta.classes));
  }
  return labels;
}

EdgeList read_edges(const fs::path& dir, const BundleMeta& meta) {
  const fs::path path = dir / "graph.edges";
  const std::string text = read_file(path);
  EdgeList el;
  el.num_nodes = meta.nodes;
  for_each_line(text, [&](std::string_view l, std::size_t line) {
    const std::string where = path.string() + ":" + std::to_string(line);
    const std::size_t tab = l.find('\t');
    if (tab == std::string_view::npos)
      throw BundleError(Code::kMalformed, where + ": expected src<TAB>dst");
    const std::uint64_t s = parse_count(l.substr(0, tab), where);
    const std::uint64_t d = parse_count(l.substr(tab + 1), where);
    if (s >= meta.nodes || d >= meta.nodes)
      throw BundleError(Code::kIndexRange, where + ": edge (" + std::to_string(s) + "," +
                                               std::to_string(d) + ") outside " +
                                               std::to_string(meta.nodes) + " nodes");
    el.edges.push_back({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(d)});
  });
  return el;
}

std::vector<std::uint32_t> read_split(const fs::path& dir, const char* which,
                                      const BundleMeta& meta) {
  const fs::path path = dir / (std::string("split_") + which + ".idx");
  const std::string text = read_file(path);
  std::vector<std::uint32_t> idx;
  for_each_line(text, [&](std::string_view l, std::size_t line) {
    const std::string where = path.string() + ":" + std::to_string(line);
    const std::uint64_t v = parse_count(l, where);
    if (v >= meta.nodes)
      throw BundleError(Code::kIndexRange, where + ": index " + std::to_string(v) + " >= " +
                                               std::to_string(meta.nodes) + " nodes");
    idx.push_back(static_cast<std::uint32_t>(v));
  });
  return idx;
}

}  // namespace

DatasetBundle load_bundle(const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw BundleError(Code::kMissingFile, "bundle directory not found: " + dir.string());
  std::map<std::string, std::string> extra;
  DatasetBundle b;
  b.meta = read_meta(dir, extra);
  if (b.meta.nodes == 0 || b.meta.features == 0 || b.meta.classes == 0)
    throw BundleError(Code::kMetaMismatch, "meta.txt: nodes, features and classes must be >= 1");
  b.features = read_features(dir, b.meta);
  b.labels = read_labels(dir, b.meta);
  b.edges = read_edges(dir, b.meta);
  b.masks.train = read_split(dir, "train", b.meta);
  b.masks.val = read_split(dir, "val", b.meta);
  b.masks.test = read_split(dir, "test", b.meta);

  std::set<std::uint32_t> seen;
  for (const auto* split : {&b.masks.train, &b.masks.val, &b.masks.test})
    for (std::uint32_t i : *split)
      if (!seen.insert(i).second)
        throw BundleError(Code::kSplitOverlap,
                          "node " + std::to_string(i) + " appears twice across the splits");

  check_meta_count(extra, "edges", b.edges.edges.size());
  check_meta_count(extra, "train", b.masks.train.size());
  check_meta_count(extra, "val", b.masks.val.size());
  check_meta_count(extra, "test", b.masks.test.size());
  return b;
}

void write_bundle(const DatasetBundle& bundle, const fs::path& dir) {
  const BundleMeta& m = bundle.meta;
  if (bundle.features.rows != m.nodes || bundle.features.cols != m.features ||
      bundle.labels.size() != m.nodes)
    throw BundleError(Code::kMetaMismatch, "write_bundle: arrays do not match meta counts");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw BundleError(Code::kIo, "cannot create " + dir.string() + ": " + ec.message());

  std::string meta = "name=" + m.name + "\nnodes=" + std::to_string(m.nodes) +
                     "\nfeatures=" + std::to_string(m.features) +
                     "\nclasses=" + std::to_string(m.classes) +
                     "\nedges=" + std::to_string(bundle.edges.edges.size()) +
                     "\ntrain=" + std::to_string(bundle.masks.train.size()) +
                     "\nval=" + std::to_string(bundle.masks.val.size()) +
                     "\ntest=" + std::to_string(bundle.masks.test.size()) + "\n";
  write_file(dir / "meta.txt", meta);

  std::string edges;
  for (const Edge& e : bundle.edges.edges)
    edges += std::to_string(e.src) + '\t' + std::to_string(e.dst) + '\n';
  write_file(dir / "graph.edges", edges);

  std::string feats = "FMAT";
  put_u64(feats, m.nodes);
  put_u64(feats, m.features);
  feats.reserve(feats.size() + m.nodes * m.features * 4);
  for (std::size_t r = 0; r < m.nodes; ++r) {
    std::size_t p = bundle.features.row_ptr[r];
    const std::size_t end = bundle.features.row_ptr[r + 1];
    for (std::size_t c = 0; c < m.features; ++c) {
      float v = 0.0f;
      if (p < end && bundle.features.col_idx[p] == c) v = static_cast<float>(bundle.features.values[p++]);
      put_u32(feats, std::bit_cast<std::uint32_t>(v));
    }
  }
  write_file(dir / "features.bin", feats);

  std::string labels = "LABL";
  put_u64(labels, bundle.labels.size());
  for (std::uint32_t l : bundle.labels) put_u32(labels, l);
  write_file(dir / "labels.bin", labels);

  auto write_split = [&](const char* which, const std::vector<std::uint32_t>& idx) {
    std::string s;
    for (std::uint32_t i : idx) s += std::to_string(i) + '\n';
    write_file(dir / (std::string("split_") + which + ".idx"), s);
  };
  write_split("train", bundle.masks.train);
  write_split("val", bundle.masks.val);
  write_split("test", bundle.masks.test);
}

std::size_t undirected_edge_count(const EdgeList& edges) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> uniq;
  for (const Edge& e : edges.edges)
    if (e.src != e.dst) uniq.insert({std::min(e.src, e.dst), std::max(e.src, e.dst)});
  return uniq.size();
}

}  // namespace efignn
