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

#include "efignn/trainer.h"

#include <chrono>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "efignn/tape.h"

namespace efignn {
namespace {

constexpr std::uint64_t kDropoutStream = 0x9E3779B97F4A7C15ull;

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be > 0");
  if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("train: weight_decay must be >= 0");
  if (eval_every < 1) throw std::invalid_argument("train: eval_every must be >= 1");
}

void SplitMasks::validate(std::size_t num_nodes) const {
  std::unordered_set<std::uint32_t> seen;
  auto check = [&](const std::vector<std::uint32_t>& set, const char* name) {
    for (std::uint32_t i : set) {
      if (i >= num_nodes)
        throw std::invalid_argument(std::string("split ") + name + ": index " +
                                    std::to_string(i) + " >= " + std::to_string(num_nodes));
      if (!seen.insert(i).second)
        throw std::invalid_argument(std::string("split ") + name + ": node " +
                                    std::to_string(i) + " appears in more than one split");
    }
  };
  check(train, "train");
  check(val, "val");
  check(test, "test");
}

AdamState AdamState::zeros_like(std::span<DenseMat* const> params) {
  AdamState s;
  for (const DenseMat* p : params) {
    s.m.emplace_back(p->rows(), p->cols());
    s.v.emplace_back(p->rows(), p->cols());
  }
  return s;
}

void adam_step(std::span<DenseMat* const> params, std::span<const DenseMat> grads,
               std::span<const bool> decay, AdamState& state, const TrainConfig& cfg) {
  if (grads.size() != params.size() || decay.size() != params.size() ||
      state.m.size() != params.size())
    throw std::invalid_argument("adam_step: parameter/gradient/state count mismatch");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    DenseMat& p = *params[i];
    const DenseMat& g = grads[i];
    if (!p.same_shape(g) || !p.same_shape(state.m[i]))
      throw std::invalid_argument("adam_step: shape mismatch for parameter " + std::to_string(i));
    require_finite(g, "gradient passed to adam_step");
    const double wd = decay[i] ? cfg.weight_decay : 0.0;
    double* pp = p.data();
    double* m = state.m[i].data();
    double* v = state.v[i].data();
    const double* gp = g.data();
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double gk = gp[k] + wd * pp[k];
      m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * gk;
      v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * gk * gk;
      const double mhat = m[k] / c1;
      const double vhat = v[k] / c2;
      pp[k] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    }
  }
}

double evaluate_accuracy(const DenseMat& logits, std::span<const std::uint32_t> labels,
                         std::span<const std::uint32_t> mask) {
  if (mask.empty()) throw std::invalid_argument("evaluate_accuracy: empty mask");
  std::size_t correct = 0;
  for (std::uint32_t r : mask) {
    auto row = logits.row(r);
    std::size_t best = 0;
    for (std::size_t k = 1; k < row.size(); ++k)
      if (row[k] > row[best]) best = k;
    if (best == labels[r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(mask.size());
}

TrainResult train(const ModelConfig& model, const GraphData& data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  model.validate();
  cfg.validate();
  data.masks.validate(data.adj.rows);
  if (data.masks.train.empty()) throw std::invalid_argument("train: empty training mask");
  if (data.labels.size() != data.adj.rows)
    throw std::invalid_argument("train: one label per node required");

  const auto start = std::chrono::steady_clock::now();
  Rng init_rng(cfg.seed);
  Rng dropout_rng(cfg.seed ^ kDropoutStream);

  TrainResult result;
  ModelParams params = init_params(model, init_rng);
  std::vector<ModelParams::Entry> entries = params.entries();
  std::vector<DenseMat*> slots;
  // std::vector<bool> cannot back a span.
  auto decay = std::make_unique<bool[]>(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    slots.push_back(entries[i].value);
    decay[i] = entries[i].decay;
  }
  AdamState adam = AdamState::zeros_like(slots);

  TrainReport& report = result.report;
  bool have_best = false;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    {
      Tape tape;
      const ParamVars vars = register_params(tape, params, true);
      const ForwardOutputs f =
          forward(tape, data.adj, data.features, params, vars, model, Mode::kTrain, dropout_rng);
      const Var loss = tape.softmax_cross_entropy(f.logits, data.labels, data.masks.train);
      rec.loss = tape.value(loss)(0, 0);
      if (!std::isfinite(rec.loss))
        throw NumericError("non-finite training loss at epoch " + std::to_string(epoch));
      tape.backward(loss);
      std::vector<DenseMat> grads;
      grads.reserve(vars.all.size());
      for (Var v : vars.all) grads.push_back(tape.grad(v));
      adam_step(slots, grads, std::span<const bool>(decay.get(), entries.size()), adam, cfg);
      ++report.adam_steps;
    }

    const bool last = epoch == cfg.epochs;
    if (epoch % cfg.eval_every == 0 || last) {
      const DenseMat logits = predict(data.adj, data.features, params, model);
      rec.evaluated = true;
      rec.train_acc = evaluate_accuracy(logits, data.labels, data.masks.train);
      rec.val_acc = data.masks.val.empty()
                        ? rec.train_acc
                        : evaluate_accuracy(logits, data.labels, data.masks.val);
      const double test_acc =
          data.masks.test.empty() ? 0.0 : evaluate_accuracy(logits, data.labels, data.masks.test);
      if (!have_best || rec.val_acc > report.best_val_acc) {
        have_best = true;
        report.best_epoch = epoch;
        report.best_val_acc = rec.val_acc;
        report.best_test_acc = test_acc;
        result.best_params = params;
      }
      if (last) {
        report.final_val_acc = rec.val_acc;
        report.final_test_acc = test_acc;
      }
    }
    report.epochs.push_back(rec);
    if (on_epoch && !on_epoch(rec)) {
      const DenseMat logits = predict(data.adj, data.features, params, model);
      report.final_val_acc = data.masks.val.empty()
                                 ? evaluate_accuracy(logits, data.labels, data.masks.train)
                                 : evaluate_accuracy(logits, data.labels, data.masks.val);
      report.final_test_acc =
          data.masks.test.empty() ? 0.0 : evaluate_accuracy(logits, data.labels, data.masks.test);
      break;
    }
  }
  result.final_params = std::move(params);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace efignn
