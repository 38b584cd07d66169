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

#include "efignn/tape.h"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"

namespace efignn {
namespace {

using testing::NaiveMatMul;
using testing::NaiveTranspose;
using testing::RandomMat;

TEST(TapeTest, MatMulForwardAndBackward) {
  Tape t;
  const Var x = t.leaf(DenseMat{{1, 2}});
  const Var w = t.leaf(DenseMat{{3}, {4}});
  const Var y = t.matmul(x, w);
  EXPECT_EQ(t.value(y), DenseMat{{11}});
  t.backward(t.sum(y));
  EXPECT_EQ(t.grad(x), (DenseMat{{3, 4}}));
  EXPECT_EQ(t.grad(w), (DenseMat{{1}, {2}}));
}

TEST(TapeTest, MatMulBackwardMatchesTransposeFormulas) {
  std::mt19937_64 gen(21);
  const DenseMat xv = RandomMat(5, 4, gen);
  const DenseMat wv = RandomMat(4, 3, gen);
  const DenseMat proj = RandomMat(5, 3, gen);
  Tape t;
  const Var x = t.leaf(xv);
  const Var w = t.leaf(wv);
  t.backward(t.dot(t.matmul(x, w), proj));
  EXPECT_LT(max_abs_diff(t.grad(x), NaiveMatMul(proj, NaiveTranspose(wv))), 1e-14);
  EXPECT_LT(max_abs_diff(t.grad(w), NaiveMatMul(NaiveTranspose(xv), proj)), 1e-14);
}

TEST(TapeTest, HadamardBackward) {
  Tape t;
  const Var p = t.leaf(DenseMat{{2, 3}});
  const Var q = t.leaf(DenseMat{{4, 5}});
  const Var y = t.hadamard(p, q);
  EXPECT_EQ(t.value(y), (DenseMat{{8, 15}}));
  t.backward(t.sum(y));
  EXPECT_EQ(t.grad(p), (DenseMat{{4, 5}}));
  EXPECT_EQ(t.grad(q), (DenseMat{{2, 3}}));
}

TEST(TapeTest, ConcatForward) {
  Tape t;
  const Var a = t.leaf(DenseMat{{1}});
  const Var b = t.leaf(DenseMat{{2}});
  const std::vector<Var> parts{a, b};
  EXPECT_EQ(t.value(t.concat_cols(parts)), (DenseMat{{1, 2}}));
  const std::vector<Var> single{a};
  EXPECT_EQ(t.value(t.concat_cols(single)), DenseMat{{1}});
  const Var c = t.leaf(DenseMat{{1}, {2}});
  const std::vector<Var> bad{a, c};
  EXPECT_THROW(t.concat_cols(bad), std::invalid_argument);
}

TEST(TapeTest, ConcatBackwardSlicesExactly) {
  std::mt19937_64 gen(22);
  const DenseMat av = RandomMat(3, 2, gen);
  const DenseMat bv = RandomMat(3, 4, gen);
  const DenseMat proj = RandomMat(3, 6, gen);
  Tape t;
  const Var a = t.leaf(av);
  const Var b = t.leaf(bv);
  const std::vector<Var> parts{a, b};
  t.backward(t.dot(t.concat_cols(parts), proj));
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(t.grad(a)(r, c), proj(r, c));
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(t.grad(b)(r, c), proj(r, 2 + c));
  }
}

TEST(TapeTest, LeakyRelu) {
  Tape t;
  const Var x = t.leaf(DenseMat{{-1, 2}});
  const Var y = t.leaky_relu(x, 0.01);
  EXPECT_EQ(t.value(y), (DenseMat{{-0.01, 2}}));
  t.backward(t.sum(y));
  EXPECT_EQ(t.grad(x), (DenseMat{{0.01, 1}}));
  const DenseMat pos{{0, 1, 2.5}};
  EXPECT_EQ(t.value(t.leaky_relu(t.constant(pos), 0.01)), pos);
}

TEST(TapeTest, DropoutIdentityCases) {
  Tape t;
  Rng rng(1);
  const Var x = t.leaf(DenseMat{{1, 2, 3}});
  EXPECT_EQ(t.dropout(x, 0.0, true, rng), x);
  EXPECT_EQ(t.dropout(x, 0.9, false, rng), x);
  EXPECT_THROW(t.dropout(x, 1.0, true, rng), std::invalid_argument);
}

TEST(TapeTest, DropoutStatistics) {
  constexpr std::size_t kN = 1000000;
  Tape t;
  Rng rng(23);
  const Var x = t.constant(DenseMat(1, kN, 1.0));
  const DenseMat& y = t.value(t.dropout(x, 0.9, true, rng));
  std::size_t survivors = 0;
  double total = 0.0;
  for (double v : y.values()) {
    if (v != 0.0) {
      ++survivors;
      EXPECT_DOUBLE_EQ(v, 10.0);
    }
    total += v;
  }
  EXPECT_NEAR(static_cast<double>(survivors) / kN, 0.1, 0.002);
  EXPECT_NEAR(total / kN, 1.0, 0.01);
}

TEST(TapeTest, DropoutBackwardUsesMask) {
  Tape t;
  Rng rng(24);
  const Var x = t.leaf(DenseMat(4, 4, 1.0));
  const Var y = t.dropout(x, 0.5, true, rng);
  t.backward(t.sum(y));
  EXPECT_EQ(t.grad(x), t.value(y));
}

TEST(TapeTest, BatchNormConstantColumn) {
  Tape t;
  BatchNormStats stats = BatchNormStats::fresh(1);
  const Var x = t.leaf(DenseMat{{5}, {5}, {5}});
  const Var y = t.batch_norm(x, t.constant(DenseMat{{1}}), t.constant(DenseMat{{0}}), stats,
                             true, 1e-5);
  for (double v : t.value(y).values()) EXPECT_EQ(v, 0.0);
}

TEST(TapeTest, BatchNormStandardizedColumn) {
  Tape t;
  BatchNormStats stats = BatchNormStats::fresh(1);
  const Var x = t.leaf(DenseMat{{-1}, {1}});
  const Var y = t.batch_norm(x, t.constant(DenseMat{{1}}), t.constant(DenseMat{{0}}), stats,
                             true, 1e-14);
  EXPECT_LT(max_abs_diff(t.value(y), DenseMat{{-1}, {1}}), 1e-12);
  // Running stats: momentum 0.9 towards mean 0 and unbiased variance 2.
  EXPECT_DOUBLE_EQ(stats.running_mean(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(stats.running_var(0, 0), 0.9 * 1.0 + 0.1 * 2.0);
}

TEST(TapeTest, BatchNormEvalUsesRunningStats) {
  Tape t;
  BatchNormStats stats{DenseMat{{2}}, DenseMat{{4}}, 0.9};
  const Var y = t.batch_norm(t.constant(DenseMat{{6}}), t.constant(DenseMat{{3}}),
                             t.constant(DenseMat{{1}}), stats, false, 0.0);
  EXPECT_DOUBLE_EQ(t.value(y)(0, 0), 3.0 * (6.0 - 2.0) / 2.0 + 1.0);
  EXPECT_EQ(stats.running_mean, DenseMat{{2}});
}

TEST(TapeTest, CrossEntropyExamples) {
  const std::vector<std::uint32_t> labels{0};
  const std::vector<std::uint32_t> mask{0};
  {
    Tape t;
    const Var l = t.softmax_cross_entropy(t.leaf(DenseMat{{0, 0}}), labels, mask);
    EXPECT_NEAR(t.value(l)(0, 0), std::log(2.0), 1e-15);
  }
  {
    Tape t;
    const Var logits = t.leaf(DenseMat{{1000, 0}});
    const Var l = t.softmax_cross_entropy(logits, labels, mask);
    EXPECT_TRUE(std::isfinite(t.value(l)(0, 0)));
    EXPECT_NEAR(t.value(l)(0, 0), 0.0, 1e-300);
    t.backward(l);
    EXPECT_TRUE(t.grad(logits).all_finite());
  }
}

TEST(TapeTest, CrossEntropyGradientOnMaskedRowsOnly) {
  Tape t;
  const Var logits = t.leaf(DenseMat{{0, 0}, {3, 1}, {1, 2}});
  const std::vector<std::uint32_t> labels{0, 1, 1};
  const std::vector<std::uint32_t> mask{0, 2};
  t.backward(t.softmax_cross_entropy(logits, labels, mask));
  const DenseMat& g = t.grad(logits);
  EXPECT_DOUBLE_EQ(g(0, 0), (0.5 - 1.0) / 2.0);
  EXPECT_DOUBLE_EQ(g(0, 1), 0.5 / 2.0);
  EXPECT_EQ(g(1, 0), 0.0);
  EXPECT_EQ(g(1, 1), 0.0);
  const double p1 = 1.0 / (1.0 + std::exp(-1.0));
  EXPECT_NEAR(g(2, 1), (p1 - 1.0) / 2.0, 1e-15);
  const std::vector<std::uint32_t> empty;
  EXPECT_THROW(t.softmax_cross_entropy(logits, labels, empty), std::invalid_argument);
}

TEST(TapeTest, SpmmBackwardIsTransposedProduct) {
  const CsrMatrix a = CsrMatrix::from_dense(DenseMat{{1, 2, 0}, {0, 0, 3}});
  Tape t;
  const Var x = t.leaf(DenseMat{{1}, {1}, {1}});
  const Var y = t.spmm(a, x);
  EXPECT_EQ(t.value(y), (DenseMat{{3}, {3}}));
  t.backward(t.sum(y));
  EXPECT_EQ(t.grad(x), (DenseMat{{1}, {2}, {3}}));
}

TEST(TapeTest, GradientsAccumulateAcrossUses) {
  Tape t;
  const Var x = t.leaf(DenseMat{{3}});
  t.backward(t.sum(t.add(t.hadamard(x, x), x)));
  EXPECT_EQ(t.grad(x), DenseMat{{7}});
}

TEST(TapeTest, UnusedLeafHasZeroGradient) {
  Tape t;
  const Var x = t.leaf(DenseMat{{3, 4}});
  const Var unused = t.leaf(DenseMat{{1}});
  t.backward(t.sum(x));
  EXPECT_EQ(t.grad(unused), DenseMat{{0}});
  const Var c = t.constant(DenseMat{{1}});
  EXPECT_THROW(t.grad(c), std::logic_error);
}

TEST(TapeTest, NonFiniteValueIsHardError) {
  Tape t;
  const double big = std::numeric_limits<double>::max();
  const Var x = t.leaf(DenseMat{{big}});
  EXPECT_THROW(t.hadamard(x, x), NumericError);
}

}  // namespace
}  // namespace efignn
