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

// efignn: train, evaluate, explain and verify EFI-GNN models.
//
// Exit codes: 0 success, 1 usage error, 2 verification failure, 3 numeric
// abort. EFIGNN_THREADS sets how many seeds train concurrently (default 1).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "efignn/bundle.h"
#include "efignn/defaults.h"
#include "efignn/heatmap.h"
#include "efignn/interpret.h"
#include "efignn/model.h"
#include "efignn/model_file.h"
#include "efignn/summary.h"
#include "efignn/trainer.h"
#include "efignn/verify.h"
#include "json.hpp"

namespace {

using namespace efignn;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerify = 2;
constexpr int kExitNumeric = 3;

// Thrown for bad flag values or combinations detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::size_t thread_count() {
  const char* env = std::getenv("EFIGNN_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) throw UsageError("EFIGNN_THREADS must be a positive integer");
  return static_cast<std::size_t>(v);
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw UsageError("--seeds: empty entry in '" + s + "'");
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size()) throw UsageError("--seeds: '" + item + "' is not an integer");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("--seeds: at least one seed required");
  return out;
}

bool on_off(const std::string& v) { return v == "on"; }

struct LoadedData {
  DatasetBundle bundle;
  SparseAdj adj;
};

LoadedData load_data(const std::string& dir, bool symmetrize) {
  LoadedData d;
  d.bundle = load_bundle(dir);
  d.adj = normalized_adjacency(d.bundle.edges, symmetrize);
  return d;
}

// ---------------------------------------------------------------- train ----

struct TrainArgs {
  std::string dataset;
  std::string model;
  std::optional<std::size_t> efi_layers, gnn_layers, units, epochs;
  std::optional<double> lr, weight_decay, dropout;
  std::optional<std::string> batch_norm, skip, include_block0;
  std::string seeds = "1";
  std::string out;
  std::string precision = "f64";
  std::string symmetrize = "on";
  std::string json_out;
};

int cmd_train(const TrainArgs& a) {
  if (a.precision != "f64")
    throw UsageError("--precision " + a.precision +
                     " is not supported; this build computes in 64-bit only (use f64)");
  const ModelKind kind = parse_model_kind(a.model);
  if (kind == ModelKind::kGcn && (a.efi_layers || a.include_block0))
    throw UsageError("--efi-layers/--include-block0 do not apply to --model gcn");
  if (kind == ModelKind::kEfiGnn && (a.gnn_layers || a.batch_norm || a.skip))
    throw UsageError("--gnn-layers/--batch-norm/--skip do not apply to --model efignn");
  const std::vector<std::uint64_t> seeds = parse_seeds(a.seeds);
  const std::size_t threads = thread_count();

  const LoadedData d = load_data(a.dataset, on_off(a.symmetrize));
  HyperParams hp = defaults_for(d.bundle.meta.name);
  if (a.efi_layers) hp.efi_layers = *a.efi_layers;
  if (a.gnn_layers) hp.gnn_layers = *a.gnn_layers;
  if (a.units) hp.units = *a.units;
  if (a.epochs) hp.epochs = *a.epochs;
  if (a.lr) hp.learning_rate = *a.lr;
  if (a.weight_decay) hp.weight_decay = *a.weight_decay;
  if (a.dropout) hp.dropout = *a.dropout;
  if (a.batch_norm) hp.batch_norm = on_off(*a.batch_norm);
  if (a.skip) hp.skip = parse_skip_mode(*a.skip);
  if (a.include_block0) hp.include_block0 = on_off(*a.include_block0);

  const ModelConfig cfg = make_model_config(kind, hp, d.bundle.meta.features, d.bundle.meta.classes);
  const TrainConfig tc = make_train_config(hp, seeds.front());
  try {
    cfg.validate();
    tc.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (!has_tuned_defaults(d.bundle.meta.name))
    std::cerr << "note: no tuned defaults for dataset '" << d.bundle.meta.name
              << "'; using the large-benchmark settings for unset flags\n";

  const GraphData data{d.adj, d.bundle.features, d.bundle.labels, d.bundle.masks};
  SweepResult sweep = run_seed_sweep(cfg, tc, seeds, data, threads, [](const SeedResult& r) {
    std::cerr << "seed " << r.seed << " done: best val " << 100.0 * r.report.best_val_acc
              << "% test " << 100.0 * r.report.best_test_acc << "%\n";
  });
  sweep.summary.command = "train";
  sweep.summary.dataset = d.bundle.meta.name;

  if (!a.out.empty()) {
    ModelFile mf{cfg, sweep.first_seed_best,
                 {{"dataset", d.bundle.meta.name},
                  {"seed", std::to_string(seeds.front())},
                  {"symmetrize", a.symmetrize}}};
    save_model(mf, a.out);
  }
  std::cout << summary_text(sweep.summary);
  const std::string line = summary_json_line(sweep.summary, true);
  std::cout << line << "\n";
  if (!a.json_out.empty()) {
    std::ofstream f(a.json_out, std::ios::app);
    if (!f) throw UsageError("cannot open " + a.json_out);
    f << line << "\n";
  }
  return kExitOk;
}

// ------------------------------------------------------------- evaluate ----

struct EvalArgs {
  std::string model_path;
  std::string dataset;
};

bool symmetrize_flag(const ModelFile& mf) {
  auto it = mf.info.find("symmetrize");
  return it == mf.info.end() || it->second != "off";
}

void check_compatible(const ModelFile& mf, const DatasetBundle& b) {
  if (mf.config.in_features != b.meta.features || mf.config.num_classes != b.meta.classes)
    throw UsageError("model expects " + std::to_string(mf.config.in_features) + " features / " +
                     std::to_string(mf.config.num_classes) + " classes, dataset has " +
                     std::to_string(b.meta.features) + " / " + std::to_string(b.meta.classes));
}

int cmd_evaluate(const EvalArgs& a) {
  const ModelFile mf = load_model(a.model_path);
  const LoadedData d = load_data(a.dataset, symmetrize_flag(mf));
  check_compatible(mf, d.bundle);
  const DenseMat logits = predict(d.adj, d.bundle.features, mf.params, mf.config);
  nlohmann::json j;
  j["schema_version"] = kSummarySchemaVersion;
  j["command"] = "evaluate";
  j["dataset"] = d.bundle.meta.name;
  j["model"] = nlohmann::json::parse(model_config_json(mf.config));
  const auto& m = d.bundle.masks;
  for (auto [name, mask] : {std::pair{"train", &m.train}, {"val", &m.val}, {"test", &m.test}}) {
    if (mask->empty()) continue;
    const double acc = 100.0 * evaluate_accuracy(logits, d.bundle.labels, *mask);
    j[std::string(name) + "_acc_pct"] = acc;
    std::printf("%-5s accuracy: %.2f%% (%zu nodes)\n", name, acc, mask->size());
  }
  std::cout << j.dump() << "\n";
  return kExitOk;
}

// -------------------------------------------------------------- explain ----

struct ExplainArgs {
  std::string model_path;
  std::string dataset;
  std::size_t node = 0;
  std::size_t cls = 0;
  std::size_t order = 1;
  std::optional<std::size_t> top_k;
  std::string format = "both";
  std::string out_prefix;
  std::string rule = "forward";
  std::string tuples;
};

std::vector<std::vector<std::uint32_t>> parse_tuples(const std::string& s) {
  std::vector<std::vector<std::uint32_t>> out;
  std::stringstream ss(s);
  std::string tuple;
  while (std::getline(ss, tuple, ',')) {
    std::vector<std::uint32_t> t;
    std::stringstream ts(tuple);
    std::string f;
    while (std::getline(ts, f, '+')) {
      try {
        t.push_back(static_cast<std::uint32_t>(std::stoul(f)));
      } catch (const std::exception&) {
        throw UsageError("--tuples: bad feature '" + f + "'");
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

int cmd_explain(const ExplainArgs& a) {
  const ModelFile mf = load_model(a.model_path);
  const DatasetBundle b = load_bundle(a.dataset);
  check_compatible(mf, b);
  if (a.node >= b.meta.nodes)
    throw UsageError("--node " + std::to_string(a.node) + " out of range (dataset has " +
                     std::to_string(b.meta.nodes) + " nodes)");
  if (a.cls >= b.meta.classes)
    throw UsageError("--class " + std::to_string(a.cls) + " out of range (dataset has " +
                     std::to_string(b.meta.classes) + " classes)");
  EffectQuery q;
  q.node = a.node;
  q.cls = a.cls;
  q.order = a.order;
  q.top_k = a.top_k;
  q.rule = parse_effect_rule(a.rule);
  if (!a.tuples.empty()) q.tuples = parse_tuples(a.tuples);
  const HeatmapFormat fmt = parse_heatmap_format(a.format);

  EffectTable table;
  try {
    table = higher_order_effects(mf.params, mf.config, b.features, q);
  } catch (const InterpretError& e) {
    throw UsageError(e.what());
  }
  const auto active = active_features(b.features, a.node);
  std::printf("node %zu class %zu order %zu: %zu active features, %zu entries\n", a.node, a.cls,
              a.order, active.size(), table.entries.size());
  if (table.entries.empty())
    std::cerr << "warning: empty effect table (node " << a.node << " has no active features)\n";

  std::vector<const EffectEntry*> ranked;
  for (const auto& e : table.entries) ranked.push_back(&e);
  std::stable_sort(ranked.begin(), ranked.end(), [](const EffectEntry* x, const EffectEntry* y) {
    return std::abs(x->effect) > std::abs(y->effect);
  });
  const std::size_t show = std::min(ranked.size(), a.top_k.value_or(10));
  for (std::size_t i = 0; i < show; ++i) {
    std::string feats;
    for (std::size_t k = 0; k < ranked[i]->features.size(); ++k)
      feats += (k ? "+" : "") + std::to_string(ranked[i]->features[k]);
    std::printf("  %-20s %+.6e\n", feats.c_str(), ranked[i]->effect);
  }

  const std::string stem = a.out_prefix.empty()
                               ? "effects_n" + std::to_string(a.node) + "_c" +
                                     std::to_string(a.cls) + "_o" + std::to_string(a.order)
                               : a.out_prefix;
  if (fmt != HeatmapFormat::kCsv && a.order > 2)
    std::cerr << "note: svg export supports orders 1 and 2; writing csv only\n";
  for (const auto& p : write_heatmap(table, stem, fmt)) std::printf("wrote %s\n", p.c_str());
  return kExitOk;
}

// --------------------------------------------------------------- verify ----

struct VerifyArgs {
  std::uint64_t seed = VerifyOptions{}.seed;
  bool inject_gradient_bug = false;
};

int cmd_verify(const VerifyArgs& a) {
  VerifyOptions opts;
  opts.seed = a.seed;
  opts.inject_gradient_bug = a.inject_gradient_bug;
  bool ok = true;
  for (const CheckResult& c : run_verification(opts)) {
    ok = ok && c.passed;
    std::printf("%s %-36s %.3e < %.0e  %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                c.value, c.tolerance, c.detail.c_str());
  }
  std::printf("%s\n", ok ? "all checks passed" : "verification FAILED");
  return ok ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EFI-GNN: explicit feature interaction graph networks"};
  app.require_subcommand(1);
  const std::vector<std::string> on_off_values{"on", "off"};

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "train one model per seed and print a summary");
  train->add_option("--dataset", ta.dataset, "bundle directory")->required();
  train->add_option("--model", ta.model, "efignn | gcn | joint")
      ->required()
      ->check(CLI::IsMember({"efignn", "gcn", "joint"}));
  train->add_option("--efi-layers", ta.efi_layers, "interaction layers L");
  train->add_option("--gnn-layers", ta.gnn_layers, "GCN branch layers");
  train->add_option("--units", ta.units, "hidden width of both branches");
  train->add_option("--lr", ta.lr, "Adam learning rate");
  train->add_option("--weight-decay", ta.weight_decay, "L2 coefficient");
  train->add_option("--dropout", ta.dropout, "dropout rate");
  train->add_option("--epochs", ta.epochs, "training epochs");
  train->add_option("--seeds", ta.seeds, "comma-separated seeds")->capture_default_str();
  train->add_option("--batch-norm", ta.batch_norm, "on | off")->check(CLI::IsMember(on_off_values));
  train->add_option("--skip", ta.skip, "none | additive | dense")
      ->check(CLI::IsMember({"none", "additive", "dense"}));
  train->add_option("--include-block0", ta.include_block0, "on | off")
      ->check(CLI::IsMember(on_off_values));
  train->add_option("--out", ta.out, "write the first seed's best-val model here");
  train->add_option("--precision", ta.precision, "f64 (f32 is not supported)")
      ->check(CLI::IsMember({"f32", "f64"}))
      ->capture_default_str();
  train->add_option("--symmetrize", ta.symmetrize, "treat edges as undirected (on | off)")
      ->check(CLI::IsMember(on_off_values))
      ->capture_default_str();
  train->add_option("--json-out", ta.json_out, "append the JSON summary line to this file");

  EvalArgs ea;
  auto* evaluate = app.add_subcommand("evaluate", "accuracy of a saved model on a bundle");
  evaluate->add_option("--model", ea.model_path, "model file")->required();
  evaluate->add_option("--dataset", ea.dataset, "bundle directory")->required();

  ExplainArgs xa;
  auto* explain = app.add_subcommand("explain", "feature-interaction effects of a saved model");
  explain->add_option("--model", xa.model_path, "model file")->required();
  explain->add_option("--dataset", xa.dataset, "bundle directory")->required();
  explain->add_option("--node", xa.node, "node index")->required();
  explain->add_option("--class", xa.cls, "class index")->required();
  explain->add_option("--order", xa.order, "interaction order (1 = single features)")
      ->capture_default_str();
  explain->add_option("--top-k", xa.top_k, "keep the k largest |effect| entries");
  explain->add_option("--format", xa.format, "csv | svg | both")
      ->check(CLI::IsMember({"csv", "svg", "both"}))
      ->capture_default_str();
  explain->add_option("--out-prefix", xa.out_prefix, "output path without extension");
  explain->add_option("--rule", xa.rule, "forward | verbatim")
      ->check(CLI::IsMember({"forward", "verbatim"}))
      ->capture_default_str();
  explain->add_option("--tuples", xa.tuples, "explicit tuples, e.g. 3+7,7+3 (default: all)");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "run gradient, oracle and invariant checks");
  verify->add_option("--seed", va.seed, "seed for random fixtures")->capture_default_str();
  verify->add_flag("--inject-gradient-bug", va.inject_gradient_bug,
                   "perturb analytic gradients (negative control)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) return cmd_train(ta);
    if (*evaluate) return cmd_evaluate(ea);
    if (*explain) return cmd_explain(xa);
    if (*verify) return cmd_verify(va);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const BundleError& e) {
    std::cerr << "dataset error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ModelFileError& e) {
    std::cerr << "model file error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
