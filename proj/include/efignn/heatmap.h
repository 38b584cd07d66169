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

// CSV and SVG export of effect tables.
//
// CSV: header `order,node,class,features,effect`, one row per entry,
// features joined by '+', effects printed with 17 significant digits.
// SVG: 24px cells, red for positive, blue for negative, white for zero, with
// intensity |e| / max|e| over the table. Order 1 renders as a strip, order 2
// as a matrix over the features that appear in the table.

#ifndef EFIGNN_HEATMAP_H_
#define EFIGNN_HEATMAP_H_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "efignn/interpret.h"

namespace efignn {

class HeatmapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kHeatmapCellPx = 24;

std::string to_csv(const EffectTable& table);
// Throws HeatmapError on a malformed header or row, or rows that disagree on
// order/node/class.
EffectTable parse_csv(std::string_view text);

// "#rrggbb" for value / max_abs; white when max_abs is 0.
std::string heat_color(double value, double max_abs);

// Throws HeatmapError for orders above 2.
std::string to_svg(const EffectTable& table);

enum class HeatmapFormat { kCsv, kSvg, kBoth };
HeatmapFormat parse_heatmap_format(std::string_view s);

// Writes `<stem>.csv` and/or `<stem>.svg`. SVG is skipped for orders above 2.
// Returns the paths written.
std::vector<std::filesystem::path> write_heatmap(const EffectTable& table,
                                                 const std::filesystem::path& stem,
                                                 HeatmapFormat format);

}  // namespace efignn

#endif  // EFIGNN_HEATMAP_H_
