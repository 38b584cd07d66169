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

// Published hyper-parameters, keyed by dataset name.

#ifndef EFIGNN_DEFAULTS_H_
#define EFIGNN_DEFAULTS_H_

#include <cstddef>
#include <string>
#include <string_view>

#include "efignn/model.h"
#include "efignn/trainer.h"

namespace efignn {

struct HyperParams {
  std::size_t gnn_layers = 1;
  std::size_t efi_layers = 1;
  std::size_t units = 128;
  double learning_rate = 0.01;
  double weight_decay = 0.0;
  double dropout = 0.3;
  SkipMode skip = SkipMode::kNone;
  bool batch_norm = true;
  bool include_block0 = true;
  std::size_t epochs = 1000;
  std::string source;  // which table the values came from
};

// cora / citeseer / pubmed (case-insensitive) get their tuned settings; any
// other name gets the large-benchmark setting.
HyperParams defaults_for(std::string_view dataset_name);
bool has_tuned_defaults(std::string_view dataset_name);

ModelConfig make_model_config(ModelKind kind, const HyperParams& hp, std::size_t in_features,
                              std::size_t num_classes);
TrainConfig make_train_config(const HyperParams& hp, std::uint64_t seed);

}  // namespace efignn

#endif  // EFIGNN_DEFAULTS_H_
