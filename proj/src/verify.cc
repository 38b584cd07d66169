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

#include "efignn/verify.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "efignn/grad_check.h"
#include "efignn/interpret.h"
#include "efignn/tape.h"

namespace efignn {
namespace {

DenseMat random_mat(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0,
                    double hi = 1.0) {
  DenseMat m(rows, cols);
  for (double& v : m.values()) v = lo + (hi - lo) * uniform01(rng);
  return m;
}

// Entries in [-1, -0.05] U [0.05, 1]: far from the leaky-ReLU kink.
DenseMat away_from_zero(std::size_t rows, std::size_t cols, Rng& rng) {
  DenseMat m(rows, cols);
  for (double& v : m.values()) {
    const double mag = 0.05 + 0.95 * uniform01(rng);
    v = uniform01(rng) < 0.5 ? -mag : mag;
  }
  return m;
}

std::string format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

CheckResult make_grad_result(const std::string& name, const GradCheckResult& r) {
  CheckResult c;
  c.name = name;
  c.value = r.max_rel_error;
  c.tolerance = kGradTolerance;
  c.passed = r.max_rel_error < kGradTolerance;
  std::ostringstream d;
  d << r.coordinates << " coords, worst leaf " << r.worst_leaf << " index " << r.worst_index
    << " analytic " << format("%.6e", r.analytic) << " numeric " << format("%.6e", r.numeric);
  c.detail = d.str();
  return c;
}

GradCheckOptions grad_options(const VerifyOptions& opts) {
  GradCheckOptions g;
  if (opts.inject_gradient_bug) {
    g.tamper = [](std::vector<DenseMat>& grads) {
      for (DenseMat& m : grads) {
        for (double& v : m.values()) v *= 1.01;
        if (m.size() > 0) m.values()[0] += 1e-3;
      }
    };
  }
  return g;
}

ModelConfig toy_model(ModelKind kind, std::size_t in, std::size_t classes, SkipMode skip,
                      bool bn, double dropout) {
  ModelConfig cfg;
  cfg.kind = kind;
  cfg.in_features = in;
  cfg.num_classes = classes;
  if (kind != ModelKind::kGcn) {
    EfiGnnConfig e;
    e.num_layers = 2;
    e.units = 4;
    e.dropout = dropout;
    cfg.efi = e;
  }
  if (kind != ModelKind::kEfiGnn) {
    GcnConfig g;
    g.num_layers = 3;
    g.units = 4;
    g.dropout = dropout;
    g.skip = skip;
    g.batch_norm = bn;
    cfg.gcn = g;
  }
  return cfg;
}

// Loss of a whole model as a function of its trainable tensors.
CheckResult model_grad_check(const std::string& name, const ModelConfig& cfg,
                             const ToyGraph& g, const VerifyOptions& opts) {
  Rng init(opts.seed + 17);
  ModelParams base = init_params(cfg, init);
  std::vector<DenseMat> leaves;
  for (auto& e : base.entries()) leaves.push_back(*e.value);
  ScalarGraph f = [&](Tape& tape, std::span<const Var> vars) {
    ModelParams p = base;  // fresh running stats each evaluation
    ParamVars pv;
    std::size_t i = 0;
    for (std::size_t k = 0; k < p.efi_weights.size(); ++k) pv.efi_weights.push_back(vars[i++]);
    for (std::size_t k = 0; k < p.gcn_weights.size(); ++k) pv.gcn_weights.push_back(vars[i++]);
    for (std::size_t k = 0; k < p.gcn_bn.size(); ++k) {
      pv.bn_gamma.push_back(vars[i++]);
      pv.bn_beta.push_back(vars[i++]);
    }
    pv.out_weight = vars[i++];
    pv.all.assign(vars.begin(), vars.end());
    Rng drop(opts.seed + 99);  // same dropout masks on every evaluation
    const ForwardOutputs out = forward(tape, g.adj, g.features, p, pv, cfg, Mode::kTrain, drop);
    return tape.softmax_cross_entropy(out.logits, g.labels, g.masks.train);
  };
  return make_grad_result(name, finite_diff_check(f, leaves, grad_options(opts)));
}

double max_rel_elementwise(const DenseMat& got, const DenseMat& want) {
  double worst = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    const double a = got.values()[i];
    const double b = want.values()[i];
    if (a == b) continue;
    worst = std::max(worst, std::abs(a - b) / std::max(std::abs(a), std::abs(b)));
  }
  return worst;
}

CsrMatrix random_sparse_features(std::size_t rows, std::size_t cols, double density, Rng& rng) {
  DenseMat d(rows, cols);
  for (double& v : d.values())
    if (uniform01(rng) < density) v = 0.25 + 0.75 * uniform01(rng);
  return CsrMatrix::from_dense(d);
}

}  // namespace

ToyGraph random_toy_graph(std::size_t nodes, std::size_t features, std::size_t classes,
                          double p, std::uint64_t seed) {
  Rng rng(seed);
  ToyGraph g;
  g.edges.num_nodes = nodes;
  for (std::uint32_t i = 0; i < nodes; ++i)
    for (std::uint32_t j = i + 1; j < nodes; ++j)
      if (uniform01(rng) < p) g.edges.edges.push_back({i, j});
  g.adj = normalized_adjacency(g.edges, true);
  g.features = random_sparse_features(nodes, features, 0.5, rng);
  g.num_classes = classes;
  for (std::size_t i = 0; i < nodes; ++i)
    g.labels.push_back(static_cast<std::uint32_t>(rng() % classes));
  for (std::uint32_t i = 0; i < nodes; ++i) {
    const std::uint32_t bucket = i % 4;
    (bucket < 2 ? g.masks.train : bucket == 2 ? g.masks.val : g.masks.test).push_back(i);
  }
  return g;
}

std::vector<std::vector<double>> dense_normalized_adjacency(const EdgeList& edges) {
  const std::size_t n = edges.num_nodes;
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (const Edge& e : edges.edges) {
    a[e.src][e.dst] = 1.0;
    a[e.dst][e.src] = 1.0;
  }
  for (std::size_t i = 0; i < n; ++i) a[i][i] = 1.0;
  std::vector<double> deg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) deg[i] += a[i][j];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] /= std::sqrt(deg[i] * deg[j]);
  return a;
}

std::vector<DenseMat> brute_force_blocks(const std::vector<std::vector<double>>& adj,
                                         const std::vector<std::vector<double>>& x,
                                         const std::vector<DenseMat>& weights) {
  const std::size_t n = x.size();
  const std::size_t m = weights.at(0).rows();
  const std::size_t k = weights.at(0).cols();
  std::vector<DenseMat> blocks;
  DenseMat x0(n, k);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t c = 0; c < k; ++c) {
      double s = 0.0;
      for (std::size_t f = 0; f < m; ++f) s += x[v][f] * weights[0](f, c);
      x0(v, c) = s;
    }
  blocks.push_back(x0);
  for (std::size_t l = 1; l < weights.size(); ++l) {
    const DenseMat& prev = blocks.back();
    DenseMat xl(n, k);
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t c = 0; c < k; ++c) {
        double agg = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (adj[v][i] == 0.0) continue;
          double inner = 0.0;
          for (std::size_t j = 0; j < k; ++j) inner += prev(i, j) * weights[l](j, c);
          agg += adj[v][i] * inner;
        }
        xl(v, c) = agg * x0(v, c);
      }
    blocks.push_back(xl);
  }
  return blocks;
}

std::vector<CheckResult> gradient_suite(const VerifyOptions& opts) {
  std::vector<CheckResult> out;
  Rng rng(opts.seed);
  const GradCheckOptions go = grad_options(opts);
  auto op_check = [&](const std::string& name, std::vector<DenseMat> leaves, ScalarGraph f) {
    out.push_back(make_grad_result("grad." + name, finite_diff_check(f, leaves, go)));
  };

  {
    const DenseMat r = random_mat(3, 2, rng);
    op_check("matmul", {random_mat(3, 4, rng), random_mat(4, 2, rng)},
             [r](Tape& t, std::span<const Var> v) { return t.dot(t.matmul(v[0], v[1]), r); });
  }
  {
    Rng local(opts.seed + 1);
    const CsrMatrix a = random_sparse_features(5, 5, 0.5, local);
    const DenseMat r = random_mat(5, 3, rng);
    op_check("spmm", {random_mat(5, 3, rng)},
             [a, r](Tape& t, std::span<const Var> v) { return t.dot(t.spmm(a, v[0]), r); });
  }
  {
    const DenseMat r = random_mat(3, 4, rng);
    op_check("hadamard", {random_mat(3, 4, rng), random_mat(3, 4, rng)},
             [r](Tape& t, std::span<const Var> v) { return t.dot(t.hadamard(v[0], v[1]), r); });
    op_check("add", {random_mat(3, 4, rng), random_mat(3, 4, rng)},
             [r](Tape& t, std::span<const Var> v) {
               return t.dot(t.hadamard(t.add(v[0], v[1]), t.add(v[0], v[1])), r);
             });
  }
  {
    const DenseMat r = random_mat(3, 6, rng);
    op_check("concat_cols", {random_mat(3, 1, rng), random_mat(3, 3, rng), random_mat(3, 2, rng)},
             [r](Tape& t, std::span<const Var> v) {
               const Var c = t.concat_cols(v);
               return t.dot(t.hadamard(c, c), r);
             });
  }
  {
    const DenseMat r = random_mat(4, 5, rng);
    op_check("leaky_relu", {away_from_zero(4, 5, rng)},
             [r](Tape& t, std::span<const Var> v) { return t.dot(t.leaky_relu(v[0], 0.01), r); });
  }
  {
    const DenseMat r = random_mat(6, 4, rng);
    const std::uint64_t s = opts.seed + 3;
    op_check("dropout", {random_mat(6, 4, rng)}, [r, s](Tape& t, std::span<const Var> v) {
      Rng drop(s);
      return t.dot(t.dropout(v[0], 0.5, true, drop), r);
    });
  }
  {
    const DenseMat r = random_mat(5, 4, rng);
    op_check("batch_norm",
             {random_mat(5, 4, rng), random_mat(1, 4, rng, 0.5, 1.5), random_mat(1, 4, rng)},
             [r](Tape& t, std::span<const Var> v) {
               BatchNormStats stats = BatchNormStats::fresh(4);
               return t.dot(t.batch_norm(v[0], v[1], v[2], stats, true, 1e-5), r);
             });
  }
  {
    const std::vector<std::uint32_t> labels = {0, 2, 1, 1, 0, 2};
    const std::vector<std::uint32_t> mask = {0, 1, 3, 5};
    op_check("softmax_cross_entropy", {random_mat(6, 3, rng, -2.0, 2.0)},
             [labels, mask](Tape& t, std::span<const Var> v) {
               return t.softmax_cross_entropy(v[0], labels, mask);
             });
  }
  op_check("sum", {random_mat(3, 3, rng)}, [](Tape& t, std::span<const Var> v) {
    return t.sum(t.hadamard(v[0], v[0]));
  });

  const ToyGraph g = random_toy_graph(8, 6, 3, 0.35, opts.seed + 5);
  const std::size_t m = g.features.cols;
  out.push_back(model_grad_check(
      "grad.loss.efignn", toy_model(ModelKind::kEfiGnn, m, 3, SkipMode::kNone, false, 0.3), g,
      opts));
  out.push_back(model_grad_check(
      "grad.loss.gcn", toy_model(ModelKind::kGcn, m, 3, SkipMode::kAdditive, true, 0.3), g,
      opts));
  out.push_back(model_grad_check(
      "grad.loss.gcn_dense_skip", toy_model(ModelKind::kGcn, m, 3, SkipMode::kDense, false, 0.0),
      g, opts));
  out.push_back(model_grad_check(
      "grad.loss.joint", toy_model(ModelKind::kJoint, m, 3, SkipMode::kDense, true, 0.3), g,
      opts));
  return out;
}

CheckResult brute_force_suite(const VerifyOptions& opts) {
  Rng rng(opts.seed + 11);
  double worst = 0.0;
  std::size_t cases = 0;
  std::string worst_case;
  for (std::size_t n = 1; n <= 4; ++n) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> slots;
    for (std::uint32_t i = 0; i < n; ++i)
      for (std::uint32_t j = i + 1; j < n; ++j) slots.push_back({i, j});
    for (std::size_t mask = 0; mask < (std::size_t{1} << slots.size()); ++mask) {
      EdgeList el;
      el.num_nodes = n;
      for (std::size_t b = 0; b < slots.size(); ++b)
        if (mask >> b & 1) el.edges.push_back({slots[b].first, slots[b].second});
      const SparseAdj adj = normalized_adjacency(el, true);
      const auto dense_adj = dense_normalized_adjacency(el);
      for (std::size_t m = 1; m <= 4; ++m)
        for (std::size_t k = 1; k <= 3; ++k) {
          const std::size_t layers = 1 + (cases % 3);
          std::vector<std::vector<double>> x(n, std::vector<double>(m));
          DenseMat xd(n, m);
          for (std::size_t v = 0; v < n; ++v)
            for (std::size_t f = 0; f < m; ++f) xd(v, f) = x[v][f] = 2.0 * uniform01(rng) - 1.0;
          std::vector<DenseMat> w;
          w.push_back(random_mat(m, k, rng));
          for (std::size_t l = 1; l <= layers; ++l) w.push_back(random_mat(k, k, rng));

          Tape tape;
          const Var x0 = first_order(tape, tape.constant(xd), tape.constant(w[0]));
          std::vector<Var> got{x0};
          for (std::size_t l = 1; l <= layers; ++l)
            got.push_back(efignn_layer(tape, adj, got.back(), tape.constant(w[l]), x0));
          const auto want = brute_force_blocks(dense_adj, x, w);
          for (std::size_t l = 0; l <= layers; ++l) {
            const double d = max_abs_diff(tape.value(got[l]), want[l]);
            if (d > worst) {
              worst = d;
              worst_case = "n=" + std::to_string(n) + " edge_mask=" + std::to_string(mask) +
                           " M=" + std::to_string(m) + " K=" + std::to_string(k) +
                           " block=" + std::to_string(l);
            }
          }
          ++cases;
        }
    }
  }
  CheckResult c;
  c.name = "oracle.brute_force";
  c.value = worst;
  c.tolerance = kBruteForceTolerance;
  c.passed = worst < kBruteForceTolerance;
  c.detail = std::to_string(cases) + " cases (all graphs up to 4 nodes, M<=4, K<=3)" +
             (worst_case.empty() ? "" : ", worst at " + worst_case);
  return c;
}

CheckResult homogeneity_suite(const VerifyOptions& opts) {
  double worst = 0.0;
  std::string where;
  std::size_t comparisons = 0;
  for (std::size_t layers = 1; layers <= 4; ++layers) {
    const ToyGraph g = random_toy_graph(7, 5, 2, 0.4, opts.seed + 30 + layers);
    ModelConfig cfg;
    cfg.kind = ModelKind::kEfiGnn;
    cfg.in_features = g.features.cols;
    cfg.num_classes = 2;
    cfg.efi = EfiGnnConfig{layers, 3, 0.0, true};
    Rng init(opts.seed + layers);
    const ModelParams params = init_params(cfg, init);
    const BlockValues base = predict_blocks(g.adj, g.features, params, cfg);
    for (double alpha : {0.5, 2.0, 3.0}) {
      CsrMatrix scaled = g.features;
      for (double& v : scaled.values) v *= alpha;
      const BlockValues s = predict_blocks(g.adj, scaled, params, cfg);
      for (std::size_t l = 0; l <= layers; ++l) {
        DenseMat want = base.efi_blocks[l];
        scale_inplace(want, std::pow(alpha, static_cast<double>(l + 1)));
        const double e = max_rel_elementwise(s.efi_blocks[l], want);
        ++comparisons;
        if (e > worst) {
          worst = e;
          where = "L=" + std::to_string(layers) + " alpha=" + format("%g", alpha) +
                  " block=" + std::to_string(l);
        }
      }
    }
  }
  CheckResult c;
  c.name = "property.homogeneity";
  c.value = worst;
  c.tolerance = kHomogeneityTolerance;
  c.passed = worst < kHomogeneityTolerance;
  c.detail = std::to_string(comparisons) + " block comparisons, alpha in {0.5,2,3}, L<=4" +
             (where.empty() ? "" : ", worst at " + where);
  return c;
}

std::vector<CheckResult> completeness_suite(const VerifyOptions& opts) {
  std::vector<CheckResult> out;
  auto make = [](const std::string& name, double worst, double tol, const std::string& detail) {
    CheckResult c;
    c.name = name;
    c.value = worst;
    c.tolerance = tol;
    c.passed = worst < tol;
    c.detail = detail;
    return c;
  };

  // Order 1 on a graph with edges.
  {
    const ToyGraph g = random_toy_graph(9, 6, 3, 0.4, opts.seed + 41);
    ModelConfig cfg = toy_model(ModelKind::kJoint, g.features.cols, 3, SkipMode::kNone, false, 0);
    Rng init(opts.seed + 42);
    const ModelParams params = init_params(cfg, init);
    const BlockValues bv = predict_blocks(g.adj, g.features, params, cfg);
    const Block b0 = *find_efi_block(bv.blocks, 0);
    double worst = 0.0;
    for (std::size_t n = 0; n < g.adj.rows; ++n)
      for (std::size_t c = 0; c < cfg.num_classes; ++c) {
        EffectQuery q;
        q.node = n;
        q.cls = c;
        const double sum = first_order_effects(params, cfg, g.features, q).sum();
        const double want =
            block_logit_contribution(bv.efi_blocks[0], params.out_weight, b0, n, c);
        worst = std::max(worst, std::abs(sum - want));
      }
    out.push_back(make("interpret.completeness.order1", worst, kFirstOrderTolerance,
                       "all nodes and classes of a 9-node graph with edges"));
  }

  // Orders 2 and 3 on edgeless graphs (A_hat = I), up to 6 active features.
  for (std::size_t order : {2u, 3u}) {
    double worst = 0.0;
    std::size_t queries = 0;
    for (std::size_t trial = 0; trial < 3; ++trial) {
      ToyGraph g = random_toy_graph(5, 6, 3, 0.0, opts.seed + 50 + 7 * order + trial);
      ModelConfig cfg;
      cfg.kind = ModelKind::kEfiGnn;
      cfg.in_features = g.features.cols;
      cfg.num_classes = 3;
      cfg.efi = EfiGnnConfig{order - 1 + trial % 2, 4, 0.0, true};
      Rng init(opts.seed + 60 + trial);
      const ModelParams params = init_params(cfg, init);
      const BlockValues bv = predict_blocks(g.adj, g.features, params, cfg);
      const Block blk = *find_efi_block(bv.blocks, order - 1);
      for (std::size_t n = 0; n < g.adj.rows; ++n)
        for (std::size_t c = 0; c < 3; ++c) {
          EffectQuery q;
          q.node = n;
          q.cls = c;
          q.order = order;
          const double sum = higher_order_effects(params, cfg, g.features, q).sum();
          const double want =
              block_logit_contribution(bv.efi_blocks[order - 1], params.out_weight, blk, n, c);
          worst = std::max(worst, std::abs(sum - want));
          ++queries;
        }
    }
    out.push_back(make("interpret.completeness.order" + std::to_string(order), worst,
                       kHigherOrderTolerance,
                       std::to_string(queries) + " (node, class) queries on edgeless graphs"));
  }
  return out;
}

CheckResult determinism_suite(const VerifyOptions& opts) {
  const ToyGraph g = random_toy_graph(12, 8, 3, 0.3, opts.seed + 70);
  const ModelConfig cfg =
      toy_model(ModelKind::kJoint, g.features.cols, 3, SkipMode::kDense, true, 0.5);
  TrainConfig tc;
  tc.epochs = 15;
  tc.learning_rate = 0.01;
  tc.weight_decay = 1e-3;
  tc.seed = opts.seed;
  const GraphData data{g.adj, g.features, g.labels, g.masks};
  const TrainResult a = train(cfg, data, tc);
  const TrainResult b = train(cfg, data, tc);
  bool same = a.final_params == b.final_params && a.best_params == b.best_params &&
              a.report.best_epoch == b.report.best_epoch &&
              a.report.epochs.size() == b.report.epochs.size();
  for (std::size_t i = 0; same && i < a.report.epochs.size(); ++i) {
    const EpochRecord& x = a.report.epochs[i];
    const EpochRecord& y = b.report.epochs[i];
    same = x.loss == y.loss && x.train_acc == y.train_acc && x.val_acc == y.val_acc;
  }
  CheckResult c;
  c.name = "property.determinism";
  c.value = same ? 0.0 : 1.0;
  c.tolerance = 0.5;
  c.passed = same;
  c.detail = "two seeded joint-model training runs, params and epoch logs compared bitwise";
  return c;
}

std::vector<CheckResult> run_verification(const VerifyOptions& opts) {
  std::vector<CheckResult> out = gradient_suite(opts);
  out.push_back(brute_force_suite(opts));
  out.push_back(homogeneity_suite(opts));
  for (auto& c : completeness_suite(opts)) out.push_back(std::move(c));
  out.push_back(determinism_suite(opts));
  return out;
}

}  // namespace efignn
