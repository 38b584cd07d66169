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

// Self-contained correctness suites: finite-difference gradients, a
// brute-force scalar expansion of the explicit branch, order homogeneity,
// effect completeness and run determinism. Shared by `efignn verify` and the
// acceptance binary.

#ifndef EFIGNN_VERIFY_H_
#define EFIGNN_VERIFY_H_

#include <cstdint>
#include <string>
#include <vector>

#include "efignn/dense_mat.h"
#include "efignn/model.h"
#include "efignn/sparse_graph.h"
#include "efignn/trainer.h"

namespace efignn {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      // measured error (or 0/1 for exact checks)
  double tolerance = 0.0;  // pass iff value < tolerance
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 20240607;
  // Perturbs analytic gradients before comparison; the gradient suite must
  // then fail.
  bool inject_gradient_bug = false;
};

inline constexpr double kGradTolerance = 1e-4;
inline constexpr double kBruteForceTolerance = 1e-10;
inline constexpr double kHomogeneityTolerance = 1e-10;
inline constexpr double kFirstOrderTolerance = 1e-9;
inline constexpr double kHigherOrderTolerance = 1e-8;

// Small graph with features, labels and splits, used by several suites.
struct ToyGraph {
  EdgeList edges;
  SparseAdj adj;
  CsrMatrix features;
  std::vector<std::uint32_t> labels;
  SplitMasks masks;
  std::size_t num_classes = 0;
};

// Random undirected graph on `nodes` with edge probability `p`, nonnegative
// sparse features and random labels; every node is in exactly one split.
ToyGraph random_toy_graph(std::size_t nodes, std::size_t features, std::size_t classes,
                          double p, std::uint64_t seed);

// Scalar-loop evaluation of X(0..L) straight from the sum form
//   X0[v,k] = sum_m x[v,m] W0[m,k]
//   Xl[v,k] = (sum_i A[v,i] sum_j X(l-1)[i,j] Wl[j,k]) * X0[v,k]
// on a dense adjacency. Independent of DenseMat kernels and CSR code.
std::vector<DenseMat> brute_force_blocks(const std::vector<std::vector<double>>& adj,
                                         const std::vector<std::vector<double>>& x,
                                         const std::vector<DenseMat>& weights);

// Dense D^{-1/2} (A + I) D^{-1/2} from an undirected edge list.
std::vector<std::vector<double>> dense_normalized_adjacency(const EdgeList& edges);

std::vector<CheckResult> gradient_suite(const VerifyOptions& opts);
CheckResult brute_force_suite(const VerifyOptions& opts);
CheckResult homogeneity_suite(const VerifyOptions& opts);
std::vector<CheckResult> completeness_suite(const VerifyOptions& opts);
CheckResult determinism_suite(const VerifyOptions& opts);

// Every suite above, in order.
std::vector<CheckResult> run_verification(const VerifyOptions& opts);

}  // namespace efignn

#endif  // EFIGNN_VERIFY_H_
