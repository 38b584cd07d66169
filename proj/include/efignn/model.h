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

// EFI-GNN, the GCN branch, and the joint output head.
//
// The explicit branch is linear:
//
//   X0 = X_init W0
//   Xl = (A_hat X(l-1) Wl) (.) X0          l = 1..L
//
// so block Xl is exactly homogeneous of degree l+1 in X_init. Blocks
// X0..XL (X0 optional) and the GCN layer outputs H1..H_Lgnn are concatenated
// and mapped to class logits by a single bias-free W_out.

#ifndef EFIGNN_MODEL_H_
#define EFIGNN_MODEL_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "efignn/dense_mat.h"
#include "efignn/sparse_graph.h"
#include "efignn/tape.h"

namespace efignn {

enum class ModelKind { kEfiGnn, kGcn, kJoint };
enum class SkipMode { kNone, kAdditive, kDense };

std::string_view to_string(ModelKind kind);
std::string_view to_string(SkipMode mode);
ModelKind parse_model_kind(std::string_view s);
SkipMode parse_skip_mode(std::string_view s);

struct EfiGnnConfig {
  std::size_t num_layers = 2;
  std::size_t units = 128;
  double dropout = 0.0;
  bool include_block0 = true;
};

struct GcnConfig {
  std::size_t num_layers = 3;
  std::size_t units = 128;
  double slope = 0.01;
  double dropout = 0.0;
  SkipMode skip = SkipMode::kNone;
  bool batch_norm = false;
  double bn_eps = 1e-5;
  double bn_momentum = 0.9;
};

struct ModelConfig {
  ModelKind kind = ModelKind::kEfiGnn;
  std::size_t in_features = 0;
  std::size_t num_classes = 0;
  std::optional<EfiGnnConfig> efi;
  std::optional<GcnConfig> gcn;

  // Throws std::invalid_argument when the branches do not match `kind` or a
  // count is zero.
  void validate() const;
  // Width of [X_efi_out || X_gnn_out].
  std::size_t concat_width() const;
};

struct BatchNormParams {
  DenseMat gamma;  // 1 x C
  DenseMat beta;   // 1 x C
  BatchNormStats stats;
  friend bool operator==(const BatchNormParams& a, const BatchNormParams& b) {
    return a.gamma == b.gamma && a.beta == b.beta &&
           a.stats.running_mean == b.stats.running_mean &&
           a.stats.running_var == b.stats.running_var;
  }
};

struct ModelParams {
  std::vector<DenseMat> efi_weights;  // W0 (M x K), W1..WL (K x K)
  std::vector<DenseMat> gcn_weights;  // one per GCN layer
  std::vector<BatchNormParams> gcn_bn;  // one per GCN layer when enabled
  DenseMat out_weight;                  // concat_width x C

  // Trainable tensors in a fixed order (Adam state and serialization key on
  // it). `decay` is false for batch-norm gamma/beta.
  struct Entry {
    std::string name;
    DenseMat* value;
    bool decay;
  };
  std::vector<Entry> entries();

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Uniform in +-sqrt(6 / (rows + cols)).
DenseMat glorot_init(std::size_t rows, std::size_t cols, Rng& rng);
ModelParams init_params(const ModelConfig& cfg, Rng& rng);

// Columns [begin, begin + width) of the concatenated output that one layer
// contributes; equivalently rows of W_out.
struct Block {
  enum class Branch { kEfi, kGcn };
  Branch branch = Branch::kEfi;
  std::size_t layer = 0;  // EFI: 0..L (X0 is layer 0); GCN: 1..L_gnn
  std::size_t begin = 0;
  std::size_t width = 0;
  friend bool operator==(const Block&, const Block&) = default;
};

std::vector<Block> block_layout(const ModelConfig& cfg);
// EFI block holding X(layer), if concatenated.
std::optional<Block> find_efi_block(const std::vector<Block>& blocks, std::size_t layer);

enum class Mode { kTrain, kEval };

struct ForwardOutputs {
  Var logits;
  std::vector<Var> efi_blocks;  // X0..XL (X0 present even if not concatenated)
  std::vector<Var> gcn_blocks;  // H1..H_Lgnn
  std::vector<Block> blocks;    // layout of the concatenation
};

// Tape handles of every parameter, in ModelParams::entries() order.
struct ParamVars {
  std::vector<Var> efi_weights;
  std::vector<Var> gcn_weights;
  std::vector<Var> bn_gamma;
  std::vector<Var> bn_beta;
  Var out_weight;
  std::vector<Var> all;
};

ParamVars register_params(Tape& tape, const ModelParams& params, bool requires_grad);

// Single layers, exposed for tests and oracles.
Var first_order(Tape& tape, Var x_init, Var w0);
Var first_order(Tape& tape, const CsrMatrix& x_init, Var w0);
Var efignn_layer(Tape& tape, const SparseAdj& adj, Var x_prev, Var wl, Var x0);
Var gcn_layer(Tape& tape, const SparseAdj& adj, Var h_prev, Var w, double slope,
              BatchNormStats* bn_stats, Var bn_gamma, Var bn_beta, bool training,
              double bn_eps, std::optional<Var> residual);

// Full forward pass. Dense features are taken as CSR; `rng` drives dropout
// in training mode and is untouched in eval mode. `params` is mutated only
// through batch-norm running statistics in training mode.
ForwardOutputs forward(Tape& tape, const SparseAdj& adj, const CsrMatrix& x_init,
                       ModelParams& params, const ParamVars& vars, const ModelConfig& cfg,
                       Mode mode, Rng& rng);

// Eval-mode logits without keeping the tape.
DenseMat predict(const SparseAdj& adj, const CsrMatrix& x_init, const ModelParams& params,
                 const ModelConfig& cfg);

struct BlockValues {
  DenseMat logits;
  std::vector<DenseMat> efi_blocks;
  std::vector<DenseMat> gcn_blocks;
  std::vector<Block> blocks;
};
BlockValues predict_blocks(const SparseAdj& adj, const CsrMatrix& x_init,
                           const ModelParams& params, const ModelConfig& cfg);

// Row n of block (as laid out in `blocks`) times W_out[block rows, c].
double block_logit_contribution(const DenseMat& block_value, const DenseMat& out_weight,
                                const Block& block, std::size_t node, std::size_t cls);

}  // namespace efignn

#endif  // EFIGNN_MODEL_H_
