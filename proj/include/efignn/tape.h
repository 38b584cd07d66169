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

// Reverse-mode differentiation over a recorded tape.
//
// Only the handful of ops needed for EFI-GNN / GCN training are provided.
// Every op appends one node; backward() walks the nodes in exact reverse of
// recording order and accumulates into inputs that require a gradient.
//
// A Tape is single-threaded. Build a fresh one per forward pass.

#ifndef EFIGNN_TAPE_H_
#define EFIGNN_TAPE_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "efignn/dense_mat.h"
#include "efignn/sparse_graph.h"

namespace efignn {

using Rng = std::mt19937_64;

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Handle to a node on a Tape.
struct Var {
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::size_t id = kNone;
  bool valid() const { return id != kNone; }
  friend bool operator==(Var, Var) = default;
};

struct BatchNormStats {
  DenseMat running_mean;  // 1 x C
  DenseMat running_var;   // 1 x C
  double momentum = 0.9;  // weight kept from the previous running value

  static BatchNormStats fresh(std::size_t cols) {
    return {DenseMat(1, cols, 0.0), DenseMat(1, cols, 1.0), 0.9};
  }
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  Var leaf(DenseMat value, bool requires_grad = true);
  Var constant(DenseMat value) { return leaf(std::move(value), false); }

  const DenseMat& value(Var v) const;
  // Gradient accumulated by the last backward(). Zero-filled when nothing
  // flowed into `v`; throws for Vars that do not require a gradient.
  const DenseMat& grad(Var v) const;
  bool requires_grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  // x * w. dX = dY w^T, dW = x^T dY.
  Var matmul(Var x, Var w);
  // a * x for a constant sparse `a`. dX = a^T dY. `a` must outlive backward().
  Var spmm(const CsrMatrix& a, Var x);
  // Same, with the tape keeping `a` alive (used for per-pass dropped inputs).
  Var spmm(std::shared_ptr<const CsrMatrix> a, Var x);
  // p (.) q. dP = dY (.) q, dQ = dY (.) p.
  Var hadamard(Var p, Var q);
  Var add(Var a, Var b);
  // Columns appended in order; backward splits dY back into the blocks.
  Var concat_cols(std::span<const Var> parts);
  // x if x >= 0 else slope * x.
  Var leaky_relu(Var x, double slope);
  // Inverted dropout. Identity (same Var) when !training or rate == 0.
  Var dropout(Var x, double rate, bool training, Rng& rng);
  // Per-column standardization over all rows. Training mode uses the batch
  // statistics and updates `stats`; eval mode uses `stats`.
  Var batch_norm(Var x, Var gamma, Var beta, BatchNormStats& stats, bool training,
                 double eps);
  // Mean over `mask` rows of -log softmax(logits)[label]. Returns a 1x1 Var.
  Var softmax_cross_entropy(Var logits, std::span<const std::uint32_t> labels,
                            std::span<const std::uint32_t> mask);
  // Scalar sum of all entries (1x1).
  Var sum(Var x);
  // Scalar sum(weights (.) x) (1x1); projects a matrix output for grad checks.
  Var dot(Var x, const DenseMat& weights);

  // `loss` must be 1x1. Gradients from a previous backward() are cleared.
  void backward(Var loss);

 private:
  using BackwardFn = std::function<void(Tape&, const DenseMat& dy)>;

  struct Node {
    DenseMat value;
    DenseMat grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Var push(DenseMat value, bool requires_grad, BackwardFn fn);
  DenseMat& grad_slot(Var v);
  void accumulate(Var v, const DenseMat& g);
  const Node& node(Var v) const;

  std::vector<Node> nodes_;
};

}  // namespace efignn

#endif  // EFIGNN_TAPE_H_
