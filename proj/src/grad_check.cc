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

#include "efignn/grad_check.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace efignn {
namespace {

double evaluate(const ScalarGraph& f, const std::vector<DenseMat>& leaves) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(leaves.size());
  for (const DenseMat& m : leaves) vars.push_back(tape.leaf(m, false));
  const DenseMat& out = tape.value(f(tape, vars));
  if (out.rows() != 1 || out.cols() != 1)
    throw std::invalid_argument("finite_diff_check: graph output must be 1x1");
  return out(0, 0);
}

}  // namespace

GradCheckResult finite_diff_check(const ScalarGraph& f, const std::vector<DenseMat>& leaves,
                                  const GradCheckOptions& opts) {
  std::vector<DenseMat> analytic;
  {
    Tape tape;
    std::vector<Var> vars;
    for (const DenseMat& m : leaves) vars.push_back(tape.leaf(m, true));
    tape.backward(f(tape, vars));
    for (Var v : vars) analytic.push_back(tape.grad(v));
  }
  if (opts.tamper) opts.tamper(analytic);

  GradCheckResult result;
  std::vector<DenseMat> probe = leaves;
  for (std::size_t l = 0; l < leaves.size(); ++l) {
    if (opts.only_leaf && *opts.only_leaf != l) continue;
    for (std::size_t i = 0; i < leaves[l].size(); ++i) {
      const double x = leaves[l].data()[i];
      probe[l].data()[i] = x + opts.step;
      const double up = evaluate(f, probe);
      probe[l].data()[i] = x - opts.step;
      const double down = evaluate(f, probe);
      probe[l].data()[i] = x;

      const double numeric = (up - down) / (2.0 * opts.step);
      const double a = analytic[l].data()[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), opts.floor});
      const double rel = std::abs(a - numeric) / denom;
      ++result.coordinates;
      if (rel > result.max_rel_error || result.coordinates == 1) {
        result.max_rel_error = rel;
        result.worst_leaf = l;
        result.worst_index = i;
        result.analytic = a;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace efignn
