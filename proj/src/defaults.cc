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

#include "efignn/defaults.h"

#include <algorithm>
#include <cctype>

namespace efignn {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

HyperParams citation(std::size_t units, double decay, double dropout, SkipMode skip, bool bn) {
  HyperParams hp;
  hp.gnn_layers = 3;
  hp.efi_layers = 2;
  hp.units = units;
  hp.learning_rate = 0.001;
  hp.weight_decay = decay;
  hp.dropout = dropout;
  hp.skip = skip;
  hp.batch_norm = bn;
  hp.epochs = 200;
  hp.source = "citation";
  return hp;
}

}  // namespace

bool has_tuned_defaults(std::string_view dataset_name) {
  const std::string n = lower(dataset_name);
  return n == "cora" || n == "citeseer" || n == "pubmed";
}

HyperParams defaults_for(std::string_view dataset_name) {
  const std::string n = lower(dataset_name);
  if (n == "cora" || n == "citeseer")
    return citation(128, 1e-2, 0.9, SkipMode::kNone, false);
  if (n == "pubmed") return citation(1024, 1e-3, 0.85, SkipMode::kDense, true);
  HyperParams hp;
  hp.source = "large-benchmark";
  return hp;
}

ModelConfig make_model_config(ModelKind kind, const HyperParams& hp, std::size_t in_features,
                              std::size_t num_classes) {
  ModelConfig cfg;
  cfg.kind = kind;
  cfg.in_features = in_features;
  cfg.num_classes = num_classes;
  if (kind != ModelKind::kGcn) {
    EfiGnnConfig e;
    e.num_layers = hp.efi_layers;
    e.units = hp.units;
    e.dropout = hp.dropout;
    e.include_block0 = hp.include_block0;
    cfg.efi = e;
  }
  if (kind != ModelKind::kEfiGnn) {
    GcnConfig g;
    g.num_layers = hp.gnn_layers;
    g.units = hp.units;
    g.dropout = hp.dropout;
    g.skip = hp.skip;
    g.batch_norm = hp.batch_norm;
    cfg.gcn = g;
  }
  return cfg;
}

TrainConfig make_train_config(const HyperParams& hp, std::uint64_t seed) {
  TrainConfig tc;
  tc.learning_rate = hp.learning_rate;
  tc.weight_decay = hp.weight_decay;
  tc.epochs = hp.epochs;
  tc.seed = seed;
  return tc;
}

}  // namespace efignn
