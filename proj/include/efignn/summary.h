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

// Multi-seed training sweeps and their summary records.

#ifndef EFIGNN_SUMMARY_H_
#define EFIGNN_SUMMARY_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "efignn/model.h"
#include "efignn/trainer.h"

namespace efignn {

inline constexpr int kSummarySchemaVersion = 1;

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
};
MeanStd mean_std(std::span<const double> values);

struct SeedResult {
  std::uint64_t seed = 0;
  TrainReport report;
};

struct RunSummary {
  std::string command;
  std::string dataset;
  ModelConfig model;
  TrainConfig train;  // seed field is ignored; see `seeds`
  std::vector<SeedResult> seeds;
  MeanStd best_val_test_pct;  // test accuracy at the best-val epoch
  MeanStd final_test_pct;     // test accuracy after the last epoch
  double wall_seconds = 0.0;
};

struct SweepResult {
  RunSummary summary;
  ModelParams first_seed_best;  // best-val params of seeds[0]
};

// Trains one model per seed. Runs up to `threads` seeds concurrently; results
// are merged in seed order, so the summary does not depend on `threads`.
// `on_seed_done` is called (from the calling thread) after each seed in order.
SweepResult run_seed_sweep(const ModelConfig& model, const TrainConfig& train,
                           std::span<const std::uint64_t> seeds, const GraphData& data,
                           std::size_t threads,
                           const std::function<void(const SeedResult&)>& on_seed_done = {});

// One JSON object on a single line. Wall time is included only if asked, so
// that repeated runs can be compared byte for byte.
std::string summary_json_line(const RunSummary& s, bool include_wall_time);
std::string summary_text(const RunSummary& s);

// Config echo shared by the JSON record and model-file info.
std::string model_config_json(const ModelConfig& cfg);

}  // namespace efignn

#endif  // EFIGNN_SUMMARY_H_
