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

#include "efignn/interpret.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace efignn {
namespace {

using Vec = std::vector<double>;

// Everything an effect computation reads for one (node, class, order).
struct Context {
  std::size_t units = 0;
  std::vector<std::uint32_t> active;
  std::vector<Vec> embed;  // a_k for each active feature, same order
  std::vector<const DenseMat*> weights;  // W1..W(order-1)
  Vec out_slice;  // W_out[block(order-1) rows, c]
};

// x (1 x K) times w (K x K).
Vec row_times(const Vec& x, const DenseMat& w) {
  Vec y(w.cols(), 0.0);
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    const double* wr = w.row(r).data();
    for (std::size_t c = 0; c < w.cols(); ++c) y[c] += xr * wr[c];
  }
  return y;
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Context make_context(const ModelParams& params, const ModelConfig& cfg, const CsrMatrix& x_init,
                     const EffectQuery& q) {
  if (!cfg.efi)
    throw InterpretError("model has no explicit interaction branch; effects are undefined");
  if (x_init.cols != cfg.in_features)
    throw InterpretError("feature matrix has " + std::to_string(x_init.cols) +
                         " columns, model expects " + std::to_string(cfg.in_features));
  if (q.node >= x_init.rows)
    throw InterpretError("node " + std::to_string(q.node) + " out of range (graph has " +
                         std::to_string(x_init.rows) + " nodes)");
  if (q.cls >= cfg.num_classes)
    throw InterpretError("class " + std::to_string(q.cls) + " out of range (model has " +
                         std::to_string(cfg.num_classes) + " classes)");
  if (q.order < 1) throw InterpretError("order must be >= 1");
  const std::size_t depth = cfg.efi->num_layers;
  if (q.order > depth + 1)
    throw InterpretError("order exceeds model depth: order " + std::to_string(q.order) +
                         " needs at least " + std::to_string(q.order - 1) +
                         " interaction layers, model has " + std::to_string(depth));
  const auto block = find_efi_block(block_layout(cfg), q.order - 1);
  if (!block) {
    if (q.order == 1)
      throw InterpretError("first-order effects unavailable: block 0 is not in the concatenation");
    throw InterpretError("block " + std::to_string(q.order - 1) + " is not in the concatenation");
  }

  Context ctx;
  ctx.units = cfg.efi->units;
  const DenseMat& w0 = params.efi_weights.at(0);
  ctx.active = active_features(x_init, q.node);
  for (std::uint32_t k : ctx.active) {
    const double x = x_init.at(q.node, k);
    Vec a(ctx.units);
    auto wk = w0.row(k);
    for (std::size_t t = 0; t < ctx.units; ++t) a[t] = x * wk[t];
    ctx.embed.push_back(std::move(a));
  }
  for (std::size_t m = 1; m < q.order; ++m) ctx.weights.push_back(&params.efi_weights.at(m));
  ctx.out_slice.resize(ctx.units);
  for (std::size_t t = 0; t < ctx.units; ++t)
    ctx.out_slice[t] = params.out_weight(block->begin + t, q.cls);
  return ctx;
}

// Unsymmetrized effect of one ordered tuple given as positions into ctx.embed
// (or as zero vectors for inactive features).
double tuple_effect(const Context& ctx, const std::vector<const Vec*>& a, EffectRule rule) {
  Vec p = *a[0];
  for (std::size_t m = 1; m < a.size(); ++m) {
    const Vec& am = *a[m];
    if (rule == EffectRule::kForwardConsistent) {
      p = row_times(p, *ctx.weights[m - 1]);
      for (std::size_t t = 0; t < p.size(); ++t) p[t] *= am[t];
    } else {
      for (std::size_t t = 0; t < p.size(); ++t) p[t] *= am[t];
      p = row_times(p, *ctx.weights[m - 1]);
    }
  }
  return dot(p, ctx.out_slice);
}

// Order-independent mean: sorting first makes the float sum a function of
// the multiset of values only.
double symmetric_mean(Vec values) {
  std::sort(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

// Averages f over every permutation of `idx` (all l! orderings, duplicates
// included, which weights distinct orderings equally).
template <typename F>
double permutation_mean(std::vector<std::size_t> idx, F&& f) {
  std::vector<std::size_t> perm(idx.size());
  std::iota(perm.begin(), perm.end(), 0);
  Vec vals;
  std::vector<std::size_t> permuted(idx.size());
  do {
    for (std::size_t i = 0; i < perm.size(); ++i) permuted[i] = idx[perm[i]];
    vals.push_back(f(permuted));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return symmetric_mean(std::move(vals));
}

// Drops negative zero so exported values print as "0".
double clean(double v) { return v + 0.0; }

std::vector<EffectEntry> explicit_tuples(const Context& ctx, const EffectQuery& q,
                                         std::size_t num_features) {
  const Vec zero(ctx.units, 0.0);
  std::vector<EffectEntry> out;
  for (const auto& tuple : *q.tuples) {
    if (tuple.size() != q.order)
      throw InterpretError("tuple arity " + std::to_string(tuple.size()) +
                           " does not match order " + std::to_string(q.order));
    std::vector<const Vec*> vecs;
    for (std::uint32_t f : tuple) {
      if (f >= num_features)
        throw InterpretError("feature " + std::to_string(f) + " out of range (model has " +
                             std::to_string(num_features) + " features)");
      auto it = std::lower_bound(ctx.active.begin(), ctx.active.end(), f);
      vecs.push_back(it != ctx.active.end() && *it == f ? &ctx.embed[it - ctx.active.begin()]
                                                        : &zero);
    }
    double e;
    if (q.rule == EffectRule::kVerbatim) {
      e = tuple_effect(ctx, vecs, q.rule);
    } else {
      std::vector<std::size_t> idx(vecs.size());
      std::iota(idx.begin(), idx.end(), 0);
      e = permutation_mean(idx, [&](const std::vector<std::size_t>& p) {
        std::vector<const Vec*> v;
        for (std::size_t i : p) v.push_back(vecs[i]);
        return tuple_effect(ctx, v, q.rule);
      });
    }
    out.push_back({tuple, clean(e)});
  }
  return out;
}

// Effects of every ordered tuple over the active features, shared-prefix
// evaluation. Index of tuple (i1..il) is i1*A^(l-1) + ... + il.
Vec enumerate_raw(const Context& ctx, std::size_t order, EffectRule rule) {
  const std::size_t n = ctx.active.size();
  const std::size_t units = ctx.units;
  if (order == 1) {
    Vec raw(n);
    for (std::size_t i = 0; i < n; ++i) raw[i] = dot(ctx.embed[i], ctx.out_slice);
    return raw;
  }
  // Prefix vectors of length `order - 1`.
  std::vector<Vec> prefix = ctx.embed;
  for (std::size_t m = 1; m + 1 < order; ++m) {
    std::vector<Vec> next;
    next.reserve(prefix.size() * n);
    for (const Vec& p : prefix) {
      if (rule == EffectRule::kForwardConsistent) {
        const Vec q = row_times(p, *ctx.weights[m - 1]);
        for (std::size_t k = 0; k < n; ++k) {
          Vec v(units);
          for (std::size_t t = 0; t < units; ++t) v[t] = q[t] * ctx.embed[k][t];
          next.push_back(std::move(v));
        }
      } else {
        for (std::size_t k = 0; k < n; ++k) {
          Vec v(units);
          for (std::size_t t = 0; t < units; ++t) v[t] = p[t] * ctx.embed[k][t];
          next.push_back(row_times(v, *ctx.weights[m - 1]));
        }
      }
    }
    prefix = std::move(next);
  }
  const DenseMat& w_last = *ctx.weights[order - 2];
  Vec raw;
  raw.reserve(prefix.size() * n);
  if (rule == EffectRule::kForwardConsistent) {
    // e = ((p W) (.) a_k) . w_out = (p W) . (a_k (.) w_out)
    std::vector<Vec> b(n, Vec(units));
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t t = 0; t < units; ++t) b[k][t] = ctx.embed[k][t] * ctx.out_slice[t];
    for (const Vec& p : prefix) {
      const Vec q = row_times(p, w_last);
      for (std::size_t k = 0; k < n; ++k) raw.push_back(dot(q, b[k]));
    }
  } else {
    // e = ((p (.) a_k) W) . w_out = (p (.) a_k) . (W w_out)
    Vec v(units, 0.0);
    for (std::size_t r = 0; r < units; ++r) {
      auto wr = w_last.row(r);
      double s = 0.0;
      for (std::size_t t = 0; t < units; ++t) s += wr[t] * ctx.out_slice[t];
      v[r] = s;
    }
    for (const Vec& p : prefix)
      for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t t = 0; t < units; ++t) s += p[t] * ctx.embed[k][t] * v[t];
        raw.push_back(s);
      }
  }
  return raw;
}

std::vector<EffectEntry> all_tuples(const Context& ctx, const EffectQuery& q) {
  const std::size_t n = ctx.active.size();
  if (n == 0) return {};
  double total = 1.0;
  for (std::size_t m = 0; m < q.order; ++m) total *= static_cast<double>(n);
  if (total > static_cast<double>(kMaxEnumeratedTuples))
    throw InterpretError("enumeration of " + std::to_string(n) + "^" + std::to_string(q.order) +
                         " tuples exceeds the limit; pass explicit tuples or lower the order");
  const Vec raw = enumerate_raw(ctx, q.order, q.rule);
  const bool symmetrize = q.rule == EffectRule::kForwardConsistent && q.order > 1;

  std::vector<EffectEntry> out;
  out.reserve(raw.size());
  std::vector<std::size_t> digits(q.order, 0);
  auto flat = [&](const std::vector<std::size_t>& d) {
    std::size_t i = 0;
    for (std::size_t x : d) i = i * n + x;
    return i;
  };
  for (std::size_t i = 0; i < raw.size(); ++i) {
    std::size_t rem = i;
    for (std::size_t m = q.order; m-- > 0;) {
      digits[m] = rem % n;
      rem /= n;
    }
    EffectEntry e;
    for (std::size_t d : digits) e.features.push_back(ctx.active[d]);
    e.effect = symmetrize
                   ? permutation_mean(digits, [&](const std::vector<std::size_t>& p) {
                       return raw[flat(p)];
                     })
                   : raw[i];
    e.effect = clean(e.effect);
    out.push_back(std::move(e));
  }
  return out;
}

void apply_top_k(std::vector<EffectEntry>& entries, std::optional<std::size_t> top_k) {
  if (!top_k || *top_k >= entries.size()) return;
  std::stable_sort(entries.begin(), entries.end(), [](const EffectEntry& a, const EffectEntry& b) {
    return std::abs(a.effect) > std::abs(b.effect);
  });
  entries.resize(*top_k);
}

}  // namespace

std::string_view to_string(EffectRule rule) {
  return rule == EffectRule::kVerbatim ? "verbatim" : "forward";
}

EffectRule parse_effect_rule(std::string_view s) {
  if (s == "forward") return EffectRule::kForwardConsistent;
  if (s == "verbatim") return EffectRule::kVerbatim;
  throw std::invalid_argument("unknown effect rule '" + std::string(s) +
                              "' (expected forward or verbatim)");
}

double EffectTable::sum() const {
  double s = 0.0;
  for (const EffectEntry& e : entries) s += e.effect;
  return s;
}

double EffectTable::max_abs() const {
  double m = 0.0;
  for (const EffectEntry& e : entries) m = std::max(m, std::abs(e.effect));
  return m;
}

std::optional<double> EffectTable::find(const std::vector<std::uint32_t>& features) const {
  for (const EffectEntry& e : entries)
    if (e.features == features) return e.effect;
  return std::nullopt;
}

std::vector<std::uint32_t> active_features(const CsrMatrix& x_init, std::size_t node) {
  if (node >= x_init.rows)
    throw InterpretError("node " + std::to_string(node) + " out of range");
  std::vector<std::uint32_t> out;
  for (std::size_t p = x_init.row_ptr[node]; p < x_init.row_ptr[node + 1]; ++p)
    if (x_init.values[p] != 0.0) out.push_back(x_init.col_idx[p]);
  std::sort(out.begin(), out.end());
  return out;
}

EffectTable higher_order_effects(const ModelParams& params, const ModelConfig& cfg,
                                 const CsrMatrix& x_init, const EffectQuery& query) {
  const Context ctx = make_context(params, cfg, x_init, query);
  EffectTable table;
  table.node = query.node;
  table.cls = query.cls;
  table.order = query.order;
  table.entries = query.tuples ? explicit_tuples(ctx, query, cfg.in_features)
                               : all_tuples(ctx, query);
  apply_top_k(table.entries, query.top_k);
  return table;
}

EffectTable first_order_effects(const ModelParams& params, const ModelConfig& cfg,
                                const CsrMatrix& x_init, const EffectQuery& query) {
  EffectQuery q = query;
  q.order = 1;
  return higher_order_effects(params, cfg, x_init, q);
}

EffectTable second_order_effects(const ModelParams& params, const ModelConfig& cfg,
                                 const CsrMatrix& x_init, const EffectQuery& query) {
  EffectQuery q = query;
  q.order = 2;
  return higher_order_effects(params, cfg, x_init, q);
}

}  // namespace efignn
