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

// Sparse adjacency construction and sparse x dense products.
//
// The graph side of every layer is the constant
//
//   A_hat = D^{-1/2} (A + I) D^{-1/2},   D_ii = sum_j (A + I)_ij
//
// built here once per dataset. The same CSR container also carries the
// (mostly zero) raw feature matrix, so it is rectangular in general.

#ifndef EFIGNN_SPARSE_GRAPH_H_
#define EFIGNN_SPARSE_GRAPH_H_

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "efignn/dense_mat.h"

namespace efignn {

struct Edge {
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct EdgeList {
  std::vector<Edge> edges;
  std::size_t num_nodes = 0;
  friend bool operator==(const EdgeList&, const EdgeList&) = default;
};

// Compressed sparse rows. Column indices are strictly increasing per row.
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::uint32_t> col_idx;
  std::vector<double> values;

  std::size_t nnz() const { return col_idx.size(); }
  std::size_t num_nodes() const { return rows; }
  // Stored value at (r, c) or 0 when the entry is structurally absent.
  double at(std::size_t r, std::size_t c) const;

  static CsrMatrix identity(std::size_t n);
  // Keeps exact nonzeros only.
  static CsrMatrix from_dense(const DenseMat& m);
  DenseMat to_dense() const;

  // Throws std::logic_error if the CSR structure is malformed.
  void validate() const;

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;
};

using SparseAdj = CsrMatrix;

// Binary CSR from an edge list. Duplicates collapse to one entry; with
// `symmetrize` every (i,j) also inserts (j,i). Throws std::out_of_range naming
// the offending edge when an index is >= num_nodes.
SparseAdj build_csr(const EdgeList& edges, bool symmetrize);

// Sets every diagonal entry to 1.0 (inserting where absent).
SparseAdj add_self_loops(const SparseAdj& a);

// value(i,j) / sqrt(deg(i) * deg(j)), deg = row sum. Every row must have a
// positive sum.
SparseAdj sym_normalize(const SparseAdj& a);

// Convenience: build_csr -> add_self_loops -> sym_normalize.
SparseAdj normalized_adjacency(const EdgeList& edges, bool symmetrize = true);

// a * x.
DenseMat spmm(const CsrMatrix& a, const DenseMat& x);
// a^T * x, accumulated in row order of `a` (deterministic).
DenseMat spmm_transposed(const CsrMatrix& a, const DenseMat& x);

std::vector<double> row_sums(const CsrMatrix& a);

}  // namespace efignn

#endif  // EFIGNN_SPARSE_GRAPH_H_
