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

#include <cmath>
#include <random>
#include <stdexcept>

#include "gtest/gtest.h"
#include "test_util.h"

namespace efignn {
namespace {

using testing::DenseNormalizedAdjacency;
using testing::NaiveMatMul;
using testing::RandomEdges;
using testing::RandomMat;

EdgeList Triangle() { return {{{0, 1}, {1, 2}, {0, 2}}, 3}; }

TEST(BuildCsrTest, SingleEdgeSymmetrized) {
  const SparseAdj a = build_csr({{{0, 1}}, 2}, /*symmetrize=*/true);
  EXPECT_EQ(a.row_ptr, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(a.col_idx, (std::vector<std::uint32_t>{1, 0}));
  EXPECT_EQ(a.values, (std::vector<double>{1.0, 1.0}));
}

TEST(BuildCsrTest, EmptyGraph) {
  const SparseAdj a = build_csr({{}, 1}, true);
  EXPECT_EQ(a.row_ptr, (std::vector<std::size_t>{0, 0}));
  EXPECT_EQ(a.nnz(), 0u);
}

TEST(BuildCsrTest, DuplicatesCollapse) {
  const SparseAdj a = build_csr({{{0, 1}, {1, 0}, {0, 1}}, 2}, true);
  EXPECT_EQ(a.nnz(), 2u);
  EXPECT_EQ(a.at(0, 1), 1.0);
}

TEST(BuildCsrTest, DirectedWithoutSymmetrize) {
  const SparseAdj a = build_csr({{{0, 1}}, 2}, false);
  EXPECT_EQ(a.at(0, 1), 1.0);
  EXPECT_EQ(a.at(1, 0), 0.0);
}

TEST(BuildCsrTest, OutOfRangeNamesEdge) {
  try {
    build_csr({{{0, 5}}, 2}, true);
    FAIL() << "expected std::out_of_range";
  } catch (const std::out_of_range& e) {
    EXPECT_NE(std::string(e.what()).find("5"), std::string::npos) << e.what();
  }
}

TEST(AddSelfLoopsTest, Examples) {
  EXPECT_EQ(add_self_loops(build_csr({{}, 1}, true)).to_dense(), DenseMat{{1.0}});
  EXPECT_EQ(add_self_loops(build_csr({{{0, 1}}, 2}, true)).to_dense(),
            (DenseMat{{1, 1}, {1, 1}}));
  EXPECT_EQ(add_self_loops(build_csr(Triangle(), true)).to_dense(), DenseMat(3, 3, 1.0));
}

TEST(SymNormalizeTest, Examples) {
  EXPECT_EQ(normalized_adjacency({{}, 1}).to_dense(), DenseMat{{1.0}});
  const DenseMat tri = normalized_adjacency(Triangle()).to_dense();
  EXPECT_LT(max_abs_diff(tri, DenseMat(3, 3, 1.0 / 3.0)), 1e-15);
  EXPECT_LT(max_abs_diff(tri, DenseNormalizedAdjacency(Triangle())), 1e-15);
  const DenseMat path = normalized_adjacency({{{0, 1}}, 2}).to_dense();
  EXPECT_LT(max_abs_diff(path, DenseMat(2, 2, 0.5)), 1e-15);
}

TEST(SymNormalizeTest, MatchesDenseOracleOnRandomGraphs) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 5; ++trial) {
    const EdgeList el = RandomEdges(30, 0.15, gen);
    EXPECT_LT(max_abs_diff(normalized_adjacency(el).to_dense(), DenseNormalizedAdjacency(el)),
              1e-15);
  }
}

TEST(SymNormalizeTest, StoredValuesAreSymmetric) {
  std::mt19937_64 gen(12);
  const SparseAdj a = normalized_adjacency(RandomEdges(50, 0.1, gen));
  a.validate();
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p)
      EXPECT_EQ(a.values[p], a.at(a.col_idx[p], i));
}

TEST(SymNormalizeTest, NonExpansiveAndRowSumOneOnRegularGraphs) {
  // Spectral radius is 1, so ||A x|| <= ||x|| for every x. Row sums of
  // irregular graphs may exceed 1.
  std::mt19937_64 gen(13);
  const SparseAdj a = normalized_adjacency(RandomEdges(40, 0.1, gen));
  auto norm = [](const DenseMat& m) {
    double s = 0.0;
    for (double v : m.values()) s += v * v;
    return std::sqrt(s);
  };
  for (int trial = 0; trial < 20; ++trial) {
    const DenseMat x = RandomMat(40, 1, gen);
    EXPECT_LE(norm(spmm(a, x)), norm(x) * (1.0 + 1e-12));
  }
  for (double s : row_sums(normalized_adjacency(Triangle()))) EXPECT_NEAR(s, 1.0, 1e-15);
  // 6-cycle: every node has degree 2.
  EdgeList ring{{}, 6};
  for (std::uint32_t i = 0; i < 6; ++i) ring.edges.push_back({i, (i + 1) % 6});
  for (double s : row_sums(normalized_adjacency(ring))) EXPECT_NEAR(s, 1.0, 1e-15);
}

TEST(SpmmTest, IdentityAndTriangle) {
  std::mt19937_64 gen(14);
  const DenseMat x = RandomMat(4, 3, gen);
  EXPECT_EQ(spmm(CsrMatrix::identity(4), x), x);
  const DenseMat y = spmm(normalized_adjacency(Triangle()), DenseMat{{3}, {6}, {9}});
  EXPECT_LT(max_abs_diff(y, DenseMat{{6}, {6}, {6}}), 1e-14);
}

TEST(SpmmTest, MatchesDenseOracle) {
  std::mt19937_64 gen(15);
  const EdgeList el = RandomEdges(100, 0.05, gen);
  const SparseAdj a = normalized_adjacency(el);
  const DenseMat x = RandomMat(100, 7, gen);
  const DenseMat dense = DenseNormalizedAdjacency(el);
  EXPECT_LT(max_abs_diff(spmm(a, x), NaiveMatMul(dense, x)), 1e-12);
}

TEST(SpmmTest, TransposedMatchesDenseOracle) {
  std::mt19937_64 gen(16);
  const DenseMat m = RandomMat(9, 5, gen);
  DenseMat sparse_m = m;
  for (std::size_t i = 0; i < sparse_m.size(); i += 3) sparse_m.values()[i] = 0.0;
  const CsrMatrix c = CsrMatrix::from_dense(sparse_m);
  const DenseMat x = RandomMat(9, 4, gen);
  EXPECT_LT(max_abs_diff(spmm_transposed(c, x), NaiveMatMul(transpose(sparse_m), x)), 1e-12);
}

TEST(SpmmTest, ShapeMismatchThrows) {
  EXPECT_THROW(spmm(CsrMatrix::identity(3), DenseMat(4, 2)), std::invalid_argument);
}

TEST(CsrMatrixTest, DenseRoundTrip) {
  const DenseMat m{{0, 1.5, 0}, {0, 0, 0}, {2, 0, -3}};
  const CsrMatrix c = CsrMatrix::from_dense(m);
  EXPECT_EQ(c.nnz(), 3u);
  EXPECT_EQ(c.to_dense(), m);
  c.validate();
}

}  // namespace
}  // namespace efignn
