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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace efignn {
namespace {

constexpr std::string_view kCsvHeader = "order,node,class,features,effect";

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_uint(std::string_view s, std::size_t line) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw HeatmapError("csv line " + std::to_string(line) + ": bad integer '" +
                       std::string(s) + "'");
  return v;
}

double parse_double(std::string_view s, std::size_t line) {
  // from_chars for double is not available in libstdc++ 11.
  const std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size())
    throw HeatmapError("csv line " + std::to_string(line) + ": bad number '" + tmp + "'");
  return v;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw HeatmapError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw HeatmapError("write failed: " + path.string());
}

void svg_cell(std::ostringstream& o, int x, int y, const std::string& fill, double value) {
  o << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << kHeatmapCellPx
    << "\" height=\"" << kHeatmapCellPx << "\" fill=\"" << fill
    << "\" stroke=\"#cccccc\"><title>" << format_double(value) << "</title></rect>\n";
}

void svg_label(std::ostringstream& o, int x, int y, std::uint32_t feature) {
  o << "<text x=\"" << x << "\" y=\"" << y
    << "\" font-size=\"9\" text-anchor=\"middle\" font-family=\"monospace\">" << feature
    << "</text>\n";
}

}  // namespace

std::string to_csv(const EffectTable& table) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const EffectEntry& e : table.entries) {
    out += std::to_string(table.order) + ',' + std::to_string(table.node) + ',' +
           std::to_string(table.cls) + ',';
    for (std::size_t i = 0; i < e.features.size(); ++i) {
      if (i) out += '+';
      out += std::to_string(e.features[i]);
    }
    out += ',' + format_double(e.effect) + '\n';
  }
  return out;
}

EffectTable parse_csv(std::string_view text) {
  std::vector<std::string_view> lines = split(text, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty() || lines.front() != kCsvHeader)
    throw HeatmapError("csv: missing header '" + std::string(kCsvHeader) + "'");
  EffectTable table;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    const auto fields = split(lines[i], ',');
    if (fields.size() != 5)
      throw HeatmapError("csv line " + std::to_string(line) + ": expected 5 fields, got " +
                         std::to_string(fields.size()));
    const auto order = parse_uint<std::size_t>(fields[0], line);
    const auto node = parse_uint<std::size_t>(fields[1], line);
    const auto cls = parse_uint<std::size_t>(fields[2], line);
    if (i == 1) {
      table.order = order;
      table.node = node;
      table.cls = cls;
    } else if (order != table.order || node != table.node || cls != table.cls) {
      throw HeatmapError("csv line " + std::to_string(line) +
                         ": order/node/class differ from the first row");
    }
    EffectEntry e;
    for (std::string_view f : split(fields[3], '+'))
      e.features.push_back(parse_uint<std::uint32_t>(f, line));
    if (e.features.size() != order)
      throw HeatmapError("csv line " + std::to_string(line) + ": " +
                         std::to_string(e.features.size()) + " features for order " +
                         std::to_string(order));
    e.effect = parse_double(fields[4], line);
    table.entries.push_back(std::move(e));
  }
  return table;
}

std::string heat_color(double value, double max_abs) {
  double t = max_abs > 0.0 ? std::clamp(value / max_abs, -1.0, 1.0) : 0.0;
  const int fade = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(t))));
  const int r = t < 0.0 ? fade : 255;
  const int g = fade;
  const int b = t > 0.0 ? fade : 255;
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string to_svg(const EffectTable& table) {
  if (table.order > 2)
    throw HeatmapError("svg export supports orders 1 and 2, got " + std::to_string(table.order));
  const double max_abs = table.max_abs();
  const int cell = kHeatmapCellPx;
  const int margin = cell;
  std::ostringstream o;
  if (table.order <= 1) {
    const int n = static_cast<int>(table.entries.size());
    const int w = margin + n * cell;
    const int h = margin + cell;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\">\n";
    for (int i = 0; i < n; ++i) {
      const EffectEntry& e = table.entries[i];
      svg_label(o, margin + i * cell + cell / 2, margin - 6, e.features.at(0));
      svg_cell(o, margin + i * cell, margin, heat_color(e.effect, max_abs), e.effect);
    }
  } else {
    std::vector<std::uint32_t> feats;
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> cells;
    for (const EffectEntry& e : table.entries) {
      feats.push_back(e.features.at(0));
      feats.push_back(e.features.at(1));
      cells[{e.features[0], e.features[1]}] = e.effect;
    }
    std::sort(feats.begin(), feats.end());
    feats.erase(std::unique(feats.begin(), feats.end()), feats.end());
    const int n = static_cast<int>(feats.size());
    const int side = margin + n * cell;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << side << "\" height=\"" << side
      << "\">\n";
    for (int i = 0; i < n; ++i) {
      svg_label(o, margin + i * cell + cell / 2, margin - 6, feats[i]);
      svg_label(o, margin / 2, margin + i * cell + cell / 2 + 3, feats[i]);
    }
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        auto it = cells.find({feats[r], feats[c]});
        const double v = it == cells.end() ? 0.0 : it->second;
        svg_cell(o, margin + c * cell, margin + r * cell, heat_color(v, max_abs), v);
      }
  }
  o << "</svg>\n";
  return o.str();
}

HeatmapFormat parse_heatmap_format(std::string_view s) {
  if (s == "csv") return HeatmapFormat::kCsv;
  if (s == "svg") return HeatmapFormat::kSvg;
  if (s == "both") return HeatmapFormat::kBoth;
  throw std::invalid_argument("unknown heatmap format '" + std::string(s) +
                              "' (expected csv, svg or both)");
}

std::vector<std::filesystem::path> write_heatmap(const EffectTable& table,
                                                 const std::filesystem::path& stem,
                                                 HeatmapFormat format) {
  std::vector<std::filesystem::path> written;
  const bool csv = format != HeatmapFormat::kSvg || table.order > 2;
  const bool svg = format != HeatmapFormat::kCsv && table.order <= 2;
  if (csv) {
    std::filesystem::path p = stem;
    p += ".csv";
    write_file(p, to_csv(table));
    written.push_back(p);
  }
  if (svg) {
    std::filesystem::path p = stem;
    p += ".svg";
    write_file(p, to_svg(table));
    written.push_back(p);
  }
  return written;
}

}  // namespace efignn
