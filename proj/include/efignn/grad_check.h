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

#ifndef EFIGNN_GRAD_CHECK_H_
#define EFIGNN_GRAD_CHECK_H_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "efignn/dense_mat.h"
#include "efignn/tape.h"

namespace efignn {

// Builds a scalar (1x1) output from leaves registered on a fresh tape. Must be
// a deterministic function of the leaf values.
using ScalarGraph = std::function<Var(Tape&, std::span<const Var> leaves)>;

struct GradCheckOptions {
  double step = 1e-5;
  // Denominator floor of the relative error; keeps exactly-zero gradients
  // from turning rounding noise into huge ratios.
  double floor = 1e-4;
  // Check only this leaf; all leaves otherwise.
  std::optional<std::size_t> only_leaf;
  // Applied to the analytic gradients before comparison. Used by negative
  // controls that must see the check fail.
  std::function<void(std::vector<DenseMat>&)> tamper;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_leaf = 0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t coordinates = 0;
};

// Central differences (f(x+h) - f(x-h)) / 2h per coordinate vs the tape
// gradient. Returns the worst |a - n| / max(|a|, |n|, floor).
GradCheckResult finite_diff_check(const ScalarGraph& f, const std::vector<DenseMat>& leaves,
                                  const GradCheckOptions& opts = {});

}  // namespace efignn

#endif  // EFIGNN_GRAD_CHECK_H_
