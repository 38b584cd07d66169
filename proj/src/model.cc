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

#include "efignn/model.h"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace efignn {
namespace {

// Inverted dropout over the stored entries of a constant sparse input.
// Structural zeros stay zero, so only the nonzeros need a coin flip.
std::shared_ptr<const CsrMatrix> dropout_csr(const CsrMatrix& x, double rate, Rng& rng) {
  auto out = std::make_shared<CsrMatrix>();
  out->rows = x.rows;
  out->cols = x.cols;
  out->row_ptr.assign(1, 0);
  const double scale = 1.0 / (1.0 - rate);
  for (std::size_t r = 0; r < x.rows; ++r) {
    for (std::size_t k = x.row_ptr[r]; k < x.row_ptr[r + 1]; ++k) {
      if (uniform01(rng) >= rate) {
        out->col_idx.push_back(x.col_idx[k]);
        out->values.push_back(x.values[k] * scale);
      }
    }
    out->row_ptr.push_back(out->col_idx.size());
  }
  return out;
}

std::size_t gcn_input_width(const ModelConfig& cfg, std::size_t layer) {
  // layer is 1-based.
  if (layer == 1) return cfg.in_features;
  if (cfg.gcn->skip == SkipMode::kDense) return (layer - 1) * cfg.gcn->units;
  return cfg.gcn->units;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kEfiGnn: return "efignn";
    case ModelKind::kGcn: return "gcn";
    case ModelKind::kJoint: return "joint";
  }
  return "?";
}

std::string_view to_string(SkipMode mode) {
  switch (mode) {
    case SkipMode::kNone: return "none";
    case SkipMode::kAdditive: return "additive";
    case SkipMode::kDense: return "dense";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view s) {
  if (s == "efignn") return ModelKind::kEfiGnn;
  if (s == "gcn") return ModelKind::kGcn;
  if (s == "joint") return ModelKind::kJoint;
  throw std::invalid_argument("unknown model kind '" + std::string(s) + "'");
}

SkipMode parse_skip_mode(std::string_view s) {
  if (s == "none") return SkipMode::kNone;
  if (s == "additive") return SkipMode::kAdditive;
  if (s == "dense") return SkipMode::kDense;
  throw std::invalid_argument("unknown skip mode '" + std::string(s) + "'");
}

void ModelConfig::validate() const {
  if (in_features == 0) throw std::invalid_argument("model: in_features must be >= 1");
  if (num_classes == 0) throw std::invalid_argument("model: num_classes must be >= 1");
  const bool want_efi = kind != ModelKind::kGcn;
  const bool want_gcn = kind != ModelKind::kEfiGnn;
  if (want_efi != efi.has_value())
    throw std::invalid_argument(std::string("model: EFI-GNN branch ") +
                                (want_efi ? "missing" : "not allowed") + " for kind " +
                                std::string(to_string(kind)));
  if (want_gcn != gcn.has_value())
    throw std::invalid_argument(std::string("model: GCN branch ") +
                                (want_gcn ? "missing" : "not allowed") + " for kind " +
                                std::string(to_string(kind)));
  if (efi) {
    if (efi->num_layers == 0 && !efi->include_block0)
      throw std::invalid_argument("model: efi layers = 0 requires block 0 in the concatenation");
    if (efi->units < 1) throw std::invalid_argument("model: efi units must be >= 1");
    if (!(efi->dropout >= 0.0 && efi->dropout < 1.0))
      throw std::invalid_argument("model: dropout must be in [0,1)");
  }
  if (gcn) {
    if (gcn->num_layers < 1) throw std::invalid_argument("model: gcn layers must be >= 1");
    if (gcn->units < 1) throw std::invalid_argument("model: gcn units must be >= 1");
    if (!(gcn->dropout >= 0.0 && gcn->dropout < 1.0))
      throw std::invalid_argument("model: dropout must be in [0,1)");
    if (!(gcn->slope > 0.0 && gcn->slope < 1.0))
      throw std::invalid_argument("model: activation slope must be in (0,1)");
  }
}

std::size_t ModelConfig::concat_width() const {
  std::size_t width = 0;
  if (efi) width += (efi->num_layers + (efi->include_block0 ? 1 : 0)) * efi->units;
  if (gcn) width += gcn->num_layers * gcn->units;
  return width;
}

std::vector<ModelParams::Entry> ModelParams::entries() {
  std::vector<Entry> out;
  for (std::size_t i = 0; i < efi_weights.size(); ++i)
    out.push_back({"efi.W" + std::to_string(i), &efi_weights[i], true});
  for (std::size_t i = 0; i < gcn_weights.size(); ++i)
    out.push_back({"gcn.W" + std::to_string(i + 1), &gcn_weights[i], true});
  for (std::size_t i = 0; i < gcn_bn.size(); ++i) {
    out.push_back({"gcn.bn" + std::to_string(i + 1) + ".gamma", &gcn_bn[i].gamma, false});
    out.push_back({"gcn.bn" + std::to_string(i + 1) + ".beta", &gcn_bn[i].beta, false});
  }
  out.push_back({"out.W", &out_weight, true});
  return out;
}

DenseMat glorot_init(std::size_t rows, std::size_t cols, Rng& rng) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("glorot_init: empty shape");
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  DenseMat m(rows, cols);
  for (double& v : m.values()) v = (2.0 * uniform01(rng) - 1.0) * bound;
  return m;
}

ModelParams init_params(const ModelConfig& cfg, Rng& rng) {
  cfg.validate();
  ModelParams p;
  if (cfg.efi) {
    p.efi_weights.push_back(glorot_init(cfg.in_features, cfg.efi->units, rng));
    for (std::size_t l = 1; l <= cfg.efi->num_layers; ++l)
      p.efi_weights.push_back(glorot_init(cfg.efi->units, cfg.efi->units, rng));
  }
  if (cfg.gcn) {
    for (std::size_t l = 1; l <= cfg.gcn->num_layers; ++l) {
      p.gcn_weights.push_back(glorot_init(gcn_input_width(cfg, l), cfg.gcn->units, rng));
      if (cfg.gcn->batch_norm) {
        BatchNormParams bn{DenseMat(1, cfg.gcn->units, 1.0), DenseMat(1, cfg.gcn->units, 0.0),
                           BatchNormStats::fresh(cfg.gcn->units)};
        bn.stats.momentum = cfg.gcn->bn_momentum;
        p.gcn_bn.push_back(std::move(bn));
      }
    }
  }
  p.out_weight = glorot_init(cfg.concat_width(), cfg.num_classes, rng);
  return p;
}

std::vector<Block> block_layout(const ModelConfig& cfg) {
  std::vector<Block> blocks;
  std::size_t offset = 0;
  if (cfg.efi) {
    for (std::size_t l = cfg.efi->include_block0 ? 0 : 1; l <= cfg.efi->num_layers; ++l) {
      blocks.push_back({Block::Branch::kEfi, l, offset, cfg.efi->units});
      offset += cfg.efi->units;
    }
  }
  if (cfg.gcn) {
    for (std::size_t l = 1; l <= cfg.gcn->num_layers; ++l) {
      blocks.push_back({Block::Branch::kGcn, l, offset, cfg.gcn->units});
      offset += cfg.gcn->units;
    }
  }
  return blocks;
}

std::optional<Block> find_efi_block(const std::vector<Block>& blocks, std::size_t layer) {
  for (const Block& b : blocks)
    if (b.branch == Block::Branch::kEfi && b.layer == layer) return b;
  return std::nullopt;
}

ParamVars register_params(Tape& tape, const ModelParams& params, bool requires_grad) {
  ParamVars v;
  for (const DenseMat& w : params.efi_weights) {
    v.efi_weights.push_back(tape.leaf(w, requires_grad));
    v.all.push_back(v.efi_weights.back());
  }
  for (const DenseMat& w : params.gcn_weights) {
    v.gcn_weights.push_back(tape.leaf(w, requires_grad));
    v.all.push_back(v.gcn_weights.back());
  }
  for (const BatchNormParams& bn : params.gcn_bn) {
    v.bn_gamma.push_back(tape.leaf(bn.gamma, requires_grad));
    v.all.push_back(v.bn_gamma.back());
    v.bn_beta.push_back(tape.leaf(bn.beta, requires_grad));
    v.all.push_back(v.bn_beta.back());
  }
  v.out_weight = tape.leaf(params.out_weight, requires_grad);
  v.all.push_back(v.out_weight);
  return v;
}

Var first_order(Tape& tape, Var x_init, Var w0) { return tape.matmul(x_init, w0); }

Var first_order(Tape& tape, const CsrMatrix& x_init, Var w0) { return tape.spmm(x_init, w0); }

Var efignn_layer(Tape& tape, const SparseAdj& adj, Var x_prev, Var wl, Var x0) {
  const Var aggregated = tape.spmm(adj, x_prev);   // node aggregation
  const Var mixed = tape.matmul(aggregated, wl);   // feature aggregation
  return tape.hadamard(mixed, x0);                 // feature crossing
}

Var gcn_layer(Tape& tape, const SparseAdj& adj, Var h_prev, Var w, double slope,
              BatchNormStats* bn_stats, Var bn_gamma, Var bn_beta, bool training,
              double bn_eps, std::optional<Var> residual) {
  Var z = tape.spmm(adj, tape.matmul(h_prev, w));
  if (bn_stats != nullptr) z = tape.batch_norm(z, bn_gamma, bn_beta, *bn_stats, training, bn_eps);
  Var h = tape.leaky_relu(z, slope);
  if (residual) h = tape.add(h, *residual);
  return h;
}

ForwardOutputs forward(Tape& tape, const SparseAdj& adj, const CsrMatrix& x_init,
                       ModelParams& params, const ParamVars& vars, const ModelConfig& cfg,
                       Mode mode, Rng& rng) {
  if (adj.rows != x_init.rows)
    throw std::invalid_argument("forward: adjacency has " + std::to_string(adj.rows) +
                                " nodes, features have " + std::to_string(x_init.rows) +
                                " rows");
  if (x_init.cols != cfg.in_features)
    throw std::invalid_argument("forward: expected " + std::to_string(cfg.in_features) +
                                " features, got " + std::to_string(x_init.cols));
  const bool training = mode == Mode::kTrain;
  ForwardOutputs out;
  out.blocks = block_layout(cfg);
  std::vector<Var> concat;

  if (cfg.efi) {
    const EfiGnnConfig& efi = *cfg.efi;
    Var x0 = training && efi.dropout > 0.0
                 ? tape.spmm(dropout_csr(x_init, efi.dropout, rng), vars.efi_weights[0])
                 : first_order(tape, x_init, vars.efi_weights[0]);
    out.efi_blocks.push_back(x0);
    Var prev = x0;
    for (std::size_t l = 1; l <= efi.num_layers; ++l) {
      Var in = tape.dropout(prev, efi.dropout, training, rng);
      prev = efignn_layer(tape, adj, in, vars.efi_weights[l], x0);
      out.efi_blocks.push_back(prev);
    }
    for (std::size_t l = efi.include_block0 ? 0 : 1; l <= efi.num_layers; ++l)
      concat.push_back(out.efi_blocks[l]);
  }

  if (cfg.gcn) {
    const GcnConfig& gcn = *cfg.gcn;
    for (std::size_t l = 1; l <= gcn.num_layers; ++l) {
      const std::size_t i = l - 1;
      BatchNormStats* stats = gcn.batch_norm ? &params.gcn_bn[i].stats : nullptr;
      Var gamma = gcn.batch_norm ? vars.bn_gamma[i] : Var{};
      Var beta = gcn.batch_norm ? vars.bn_beta[i] : Var{};
      Var z;
      if (l == 1) {
        Var xw = training && gcn.dropout > 0.0
                     ? tape.spmm(dropout_csr(x_init, gcn.dropout, rng), vars.gcn_weights[0])
                     : tape.spmm(x_init, vars.gcn_weights[0]);
        z = tape.spmm(adj, xw);
        if (stats) z = tape.batch_norm(z, gamma, beta, *stats, training, gcn.bn_eps);
        out.gcn_blocks.push_back(tape.leaky_relu(z, gcn.slope));
        continue;
      }
      Var input = out.gcn_blocks.back();
      if (gcn.skip == SkipMode::kDense && out.gcn_blocks.size() > 1)
        input = tape.concat_cols(out.gcn_blocks);
      Var dropped = tape.dropout(input, gcn.dropout, training, rng);
      std::optional<Var> residual;
      if (gcn.skip == SkipMode::kAdditive) residual = out.gcn_blocks.back();
      out.gcn_blocks.push_back(gcn_layer(tape, adj, dropped, vars.gcn_weights[i], gcn.slope,
                                         stats, gamma, beta, training, gcn.bn_eps, residual));
    }
    concat.insert(concat.end(), out.gcn_blocks.begin(), out.gcn_blocks.end());
  }

  const Var features = concat.size() == 1 ? concat.front() : tape.concat_cols(concat);
  out.logits = tape.matmul(features, vars.out_weight);
  return out;
}

BlockValues predict_blocks(const SparseAdj& adj, const CsrMatrix& x_init,
                           const ModelParams& params, const ModelConfig& cfg) {
  Tape tape;
  ModelParams scratch = params;  // batch-norm stats are read-only in eval mode
  const ParamVars vars = register_params(tape, scratch, false);
  Rng unused(0);
  const ForwardOutputs f = forward(tape, adj, x_init, scratch, vars, cfg, Mode::kEval, unused);
  BlockValues out;
  out.logits = tape.value(f.logits);
  for (Var v : f.efi_blocks) out.efi_blocks.push_back(tape.value(v));
  for (Var v : f.gcn_blocks) out.gcn_blocks.push_back(tape.value(v));
  out.blocks = f.blocks;
  return out;
}

DenseMat predict(const SparseAdj& adj, const CsrMatrix& x_init, const ModelParams& params,
                 const ModelConfig& cfg) {
  return predict_blocks(adj, x_init, params, cfg).logits;
}

double block_logit_contribution(const DenseMat& block_value, const DenseMat& out_weight,
                                const Block& block, std::size_t node, std::size_t cls) {
  if (block_value.cols() != block.width)
    throw std::invalid_argument("block_logit_contribution: width mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < block.width; ++k)
    s += block_value(node, k) * out_weight(block.begin + k, cls);
  return s;
}

}  // namespace efignn
