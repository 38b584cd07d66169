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

#include "efignn/sparse_graph.h"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>

namespace efignn {

double CsrMatrix::at(std::size_t r, std::size_t c) const {
  auto begin = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[r]);
  auto end = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[r + 1]);
  auto it = std::lower_bound(begin, end, static_cast<std::uint32_t>(c));
  if (it == end || *it != c) return 0.0;
  return values[static_cast<std::size_t>(it - col_idx.begin())];
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
  CsrMatrix m;
  m.rows = m.cols = n;
  m.row_ptr.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) m.row_ptr[i] = i;
  m.col_idx.resize(n);
  for (std::size_t i = 0; i < n; ++i) m.col_idx[i] = static_cast<std::uint32_t>(i);
  m.values.assign(n, 1.0);
  return m;
}

CsrMatrix CsrMatrix::from_dense(const DenseMat& d) {
  CsrMatrix m;
  m.rows = d.rows();
  m.cols = d.cols();
  m.row_ptr.assign(1, 0);
  for (std::size_t r = 0; r < d.rows(); ++r) {
    for (std::size_t c = 0; c < d.cols(); ++c) {
      if (d(r, c) != 0.0) {
        m.col_idx.push_back(static_cast<std::uint32_t>(c));
        m.values.push_back(d(r, c));
      }
    }
    m.row_ptr.push_back(m.col_idx.size());
  }
  return m;
}

DenseMat CsrMatrix::to_dense() const {
  DenseMat d(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
      d(r, col_idx[k]) = values[k];
  return d;
}

void CsrMatrix::validate() const {
  if (row_ptr.size() != rows + 1 || row_ptr.front() != 0)
    throw std::logic_error("csr: bad row_ptr length or origin");
  if (row_ptr.back() != col_idx.size() || col_idx.size() != values.size())
    throw std::logic_error("csr: row_ptr/col_idx/values lengths disagree");
  for (std::size_t r = 0; r < rows; ++r) {
    if (row_ptr[r] > row_ptr[r + 1])
      throw std::logic_error("csr: row_ptr decreases at row " + std::to_string(r));
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      if (col_idx[k] >= cols)
        throw std::logic_error("csr: column out of range in row " + std::to_string(r));
      if (k > row_ptr[r] && col_idx[k] <= col_idx[k - 1])
        throw std::logic_error("csr: columns not strictly increasing in row " +
                               std::to_string(r));
    }
  }
}

SparseAdj build_csr(const EdgeList& list, bool symmetrize) {
  const std::size_t n = list.num_nodes;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  pairs.reserve(list.edges.size() * (symmetrize ? 2 : 1));
  for (const Edge& e : list.edges) {
    if (e.src >= n || e.dst >= n) {
      throw std::out_of_range("edge (" + std::to_string(e.src) + ", " +
                              std::to_string(e.dst) + ") out of range for " +
                              std::to_string(n) + " nodes");
    }
    pairs.emplace_back(e.src, e.dst);
    if (symmetrize) pairs.emplace_back(e.dst, e.src);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  SparseAdj a;
  a.rows = a.cols = n;
  a.row_ptr.assign(n + 1, 0);
  for (const auto& [r, c] : pairs) ++a.row_ptr[r + 1];
  for (std::size_t r = 0; r < n; ++r) a.row_ptr[r + 1] += a.row_ptr[r];
  a.col_idx.reserve(pairs.size());
  for (const auto& p : pairs) a.col_idx.push_back(p.second);
  a.values.assign(pairs.size(), 1.0);
  return a;
}

SparseAdj add_self_loops(const SparseAdj& a) {
  SparseAdj out;
  out.rows = a.rows;
  out.cols = a.cols;
  out.row_ptr.assign(1, 0);
  out.col_idx.reserve(a.nnz() + a.rows);
  out.values.reserve(a.nnz() + a.rows);
  for (std::size_t r = 0; r < a.rows; ++r) {
    bool placed = false;
    for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      const std::uint32_t c = a.col_idx[k];
      if (!placed && c >= r) {
        out.col_idx.push_back(static_cast<std::uint32_t>(r));
        out.values.push_back(1.0);
        placed = true;
        if (c == r) continue;  // existing diagonal is overwritten to 1
      }
      out.col_idx.push_back(c);
      out.values.push_back(a.values[k]);
    }
    if (!placed) {
      out.col_idx.push_back(static_cast<std::uint32_t>(r));
      out.values.push_back(1.0);
    }
    out.row_ptr.push_back(out.col_idx.size());
  }
  return out;
}

std::vector<double> row_sums(const CsrMatrix& a) {
  std::vector<double> sums(a.rows, 0.0);
  for (std::size_t r = 0; r < a.rows; ++r)
    for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k)
      sums[r] += a.values[k];
  return sums;
}

SparseAdj sym_normalize(const SparseAdj& a) {
  const std::vector<double> deg = row_sums(a);
  for (std::size_t r = 0; r < deg.size(); ++r) {
    assert(deg[r] > 0.0 && "zero-degree row; add self loops first");
    if (!(deg[r] > 0.0))
      throw std::logic_error("sym_normalize: zero degree at row " + std::to_string(r));
  }
  SparseAdj out = a;
  for (std::size_t r = 0; r < a.rows; ++r) {
    for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      const std::size_t c = a.col_idx[k];
      out.values[k] = a.values[k] / std::sqrt(deg[r] * deg[c]);
    }
  }
  return out;
}

SparseAdj normalized_adjacency(const EdgeList& edges, bool symmetrize) {
  return sym_normalize(add_self_loops(build_csr(edges, symmetrize)));
}

DenseMat spmm(const CsrMatrix& a, const DenseMat& x) {
  if (a.cols != x.rows()) {
    throw std::invalid_argument("spmm: sparse (" + std::to_string(a.rows) + "x" +
                                std::to_string(a.cols) + ") vs dense " +
                                x.shape_string());
  }
  const std::size_t width = x.cols();
  DenseMat out(a.rows, width);
  for (std::size_t r = 0; r < a.rows; ++r) {
    double* dst = out.data() + r * width;
    for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      const double v = a.values[k];
      const double* src = x.data() + static_cast<std::size_t>(a.col_idx[k]) * width;
      for (std::size_t j = 0; j < width; ++j) dst[j] += v * src[j];
    }
  }
  return out;
}

DenseMat spmm_transposed(const CsrMatrix& a, const DenseMat& x) {
  if (a.rows != x.rows()) {
    throw std::invalid_argument("spmm_transposed: sparse (" + std::to_string(a.rows) +
                                "x" + std::to_string(a.cols) + ") vs dense " +
                                x.shape_string());
  }
  const std::size_t width = x.cols();
  DenseMat out(a.cols, width);
  for (std::size_t r = 0; r < a.rows; ++r) {
    const double* src = x.data() + r * width;
    for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      const double v = a.values[k];
      double* dst = out.data() + static_cast<std::size_t>(a.col_idx[k]) * width;
      for (std::size_t j = 0; j < width; ++j) dst[j] += v * src[j];
    }
  }
  return out;
}

}  // namespace efignn
