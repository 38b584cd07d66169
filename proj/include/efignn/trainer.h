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

// Full-batch training with Adam and L2-in-gradient weight decay.

#ifndef EFIGNN_TRAINER_H_
#define EFIGNN_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "efignn/dense_mat.h"
#include "efignn/model.h"
#include "efignn/sparse_graph.h"

namespace efignn {

struct TrainConfig {
  double learning_rate = 0.001;
  double weight_decay = 0.0;
  std::size_t epochs = 200;
  std::uint64_t seed = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t eval_every = 1;

  void validate() const;
};

struct SplitMasks {
  std::vector<std::uint32_t> train;
  std::vector<std::uint32_t> val;
  std::vector<std::uint32_t> test;

  // Throws std::invalid_argument if an index is >= num_nodes or sets overlap.
  void validate(std::size_t num_nodes) const;
  friend bool operator==(const SplitMasks&, const SplitMasks&) = default;
};

// Everything a training run reads. Non-owning.
struct GraphData {
  const SparseAdj& adj;
  const CsrMatrix& features;
  std::span<const std::uint32_t> labels;
  const SplitMasks& masks;
};

struct AdamState {
  std::vector<DenseMat> m;
  std::vector<DenseMat> v;
  std::size_t step = 0;

  static AdamState zeros_like(std::span<DenseMat* const> params);
};

// One bias-corrected Adam update. For entries with decay[i], the gradient is
// first augmented by weight_decay * param. Throws NumericError on a non-finite
// gradient.
void adam_step(std::span<DenseMat* const> params, std::span<const DenseMat> grads,
               std::span<const bool> decay, AdamState& state, const TrainConfig& cfg);

// Fraction of rows in `mask` whose argmax (lowest index on ties) equals the
// label. Throws std::invalid_argument for an empty mask.
double evaluate_accuracy(const DenseMat& logits, std::span<const std::uint32_t> labels,
                         std::span<const std::uint32_t> mask);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;  // only for evaluated epochs
  bool evaluated = false;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_acc = 0.0;
  double best_test_acc = 0.0;  // test accuracy of the best-val snapshot
  double final_val_acc = 0.0;
  double final_test_acc = 0.0;
  std::size_t adam_steps = 0;
  double wall_seconds = 0.0;
};

struct TrainResult {
  TrainReport report;
  ModelParams best_params;
  ModelParams final_params;
};

// Called after each epoch; returning false stops training early.
using EpochCallback = std::function<bool(const EpochRecord&)>;

// Throws NumericError (with the epoch) if the loss becomes non-finite.
TrainResult train(const ModelConfig& model, const GraphData& data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

}  // namespace efignn

#endif  // EFIGNN_TRAINER_H_
