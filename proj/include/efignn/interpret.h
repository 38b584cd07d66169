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

// Closed-form feature-interaction effects of the explicit branch.
//
// For node n, let a_k = X_init[n,k] * W0[k,:] be the first-order embedding of
// feature k. The effect of an ordered tuple (k1..kl) on logit c is computed
// from the self-node recursion
//
//   p1 = a_k1
//   pm = (p(m-1) W(m-1)) (.) a_km          (kForwardConsistent)
//   pm = (p(m-1) (.) a_km) W(m-1)          (kVerbatim)
//
//   e = pl . W_out[block(l-1) rows, c]
//
// kForwardConsistent mirrors the layer update with A_hat = I, so summing e
// over all ordered tuples of active features reproduces block l-1's
// contribution to the logit exactly on edgeless graphs. Reported values are
// averaged over the permutations of the tuple, which keeps that sum and makes
// every table symmetric. kVerbatim applies the Hadamard product before the
// weight and is returned unsymmetrized; its sums do not match the forward
// blocks.
//
// Neither rule includes the A_hat aggregation, so on graphs with edges the
// effects are self-node attributions.

#ifndef EFIGNN_INTERPRET_H_
#define EFIGNN_INTERPRET_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "efignn/model.h"
#include "efignn/sparse_graph.h"

namespace efignn {

class InterpretError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EffectRule { kForwardConsistent, kVerbatim };

std::string_view to_string(EffectRule rule);
EffectRule parse_effect_rule(std::string_view s);

struct EffectQuery {
  std::size_t node = 0;
  std::size_t cls = 0;
  std::size_t order = 1;
  // Explicit tuples of length `order`; all ordered tuples over the node's
  // active features when empty.
  std::optional<std::vector<std::vector<std::uint32_t>>> tuples;
  // Keep only the k largest |effect| (ties keep enumeration order).
  std::optional<std::size_t> top_k;
  EffectRule rule = EffectRule::kForwardConsistent;
};

struct EffectEntry {
  std::vector<std::uint32_t> features;
  double effect = 0.0;
  friend bool operator==(const EffectEntry&, const EffectEntry&) = default;
};

struct EffectTable {
  std::size_t node = 0;
  std::size_t cls = 0;
  std::size_t order = 0;
  std::vector<EffectEntry> entries;

  double sum() const;
  double max_abs() const;
  // Effect of `features`, or nullopt if absent.
  std::optional<double> find(const std::vector<std::uint32_t>& features) const;
  friend bool operator==(const EffectTable&, const EffectTable&) = default;
};

// Sorted column indices of the nonzero entries in row `node`.
std::vector<std::uint32_t> active_features(const CsrMatrix& x_init, std::size_t node);

// Upper bound on the number of ordered tuples enumerated for one query.
inline constexpr std::size_t kMaxEnumeratedTuples = std::size_t{1} << 24;

// All three throw InterpretError for a model without the explicit branch, a
// node/class/feature out of range, an order the model cannot express, a
// tuple of the wrong arity, or an enumeration above kMaxEnumeratedTuples.
// The first- and second-order entry points override query.order.
EffectTable first_order_effects(const ModelParams& params, const ModelConfig& cfg,
                                const CsrMatrix& x_init, const EffectQuery& query);
EffectTable second_order_effects(const ModelParams& params, const ModelConfig& cfg,
                                 const CsrMatrix& x_init, const EffectQuery& query);
EffectTable higher_order_effects(const ModelParams& params, const ModelConfig& cfg,
                                 const CsrMatrix& x_init, const EffectQuery& query);

}  // namespace efignn

#endif  // EFIGNN_INTERPRET_H_
