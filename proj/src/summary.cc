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

#include "efignn/summary.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <exception>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace efignn {
namespace {

using json = nlohmann::json;

json config_json(const ModelConfig& c) {
  json j;
  j["kind"] = std::string(to_string(c.kind));
  j["in_features"] = c.in_features;
  j["num_classes"] = c.num_classes;
  if (c.efi)
    j["efi"] = {{"layers", c.efi->num_layers},
                {"units", c.efi->units},
                {"dropout", c.efi->dropout},
                {"include_block0", c.efi->include_block0}};
  if (c.gcn)
    j["gcn"] = {{"layers", c.gcn->num_layers},
                {"units", c.gcn->units},
                {"dropout", c.gcn->dropout},
                {"slope", c.gcn->slope},
                {"skip", std::string(to_string(c.gcn->skip))},
                {"batch_norm", c.gcn->batch_norm}};
  return j;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

MeanStd mean_std(std::span<const double> values) {
  MeanStd r;
  if (values.empty()) return r;
  double s = 0.0;
  for (double v : values) s += v;
  r.mean = s / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return r;
}

SweepResult run_seed_sweep(const ModelConfig& model, const TrainConfig& train_cfg,
                           std::span<const std::uint64_t> seeds, const GraphData& data,
                           std::size_t threads,
                           const std::function<void(const SeedResult&)>& on_seed_done) {
  if (seeds.empty()) throw std::invalid_argument("seed sweep: at least one seed required");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = seeds.size();
  std::vector<std::optional<TrainResult>> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::mutex mu;
  std::condition_variable cv;

  auto run_one = [&](std::size_t i) {
    TrainConfig tc = train_cfg;
    tc.seed = seeds[i];
    try {
      TrainResult r = train(model, data, tc);
      std::lock_guard<std::mutex> lock(mu);
      results[i] = std::move(r);
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      errors[i] = std::current_exception();
    }
    cv.notify_all();
  };

  SweepResult out;
  RunSummary& s = out.summary;
  s.model = model;
  s.train = train_cfg;
  auto finish = [&](std::size_t i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    SeedResult sr{seeds[i], results[i]->report};
    if (i == 0) out.first_seed_best = results[i]->best_params;
    results[i].reset();  // release parameters early
    if (on_seed_done) on_seed_done(sr);
    s.seeds.push_back(std::move(sr));
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      run_one(i);
      finish(i);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) run_one(i);
      });
    std::exception_ptr first_error;
    for (std::size_t i = 0; i < n; ++i) {
      std::unique_lock<std::mutex> lock(mu);
      cv.wait(lock, [&] { return results[i].has_value() || errors[i]; });
      lock.unlock();
      try {
        finish(i);
      } catch (...) {
        if (!first_error) first_error = std::current_exception();
      }
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  std::vector<double> best, fin;
  for (const SeedResult& r : s.seeds) {
    best.push_back(100.0 * r.report.best_test_acc);
    fin.push_back(100.0 * r.report.final_test_acc);
  }
  s.best_val_test_pct = mean_std(best);
  s.final_test_pct = mean_std(fin);
  s.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::string model_config_json(const ModelConfig& cfg) { return config_json(cfg).dump(); }

std::string summary_json_line(const RunSummary& s, bool include_wall_time) {
  json j;
  j["schema_version"] = kSummarySchemaVersion;
  j["command"] = s.command;
  j["dataset"] = s.dataset;
  j["model"] = config_json(s.model);
  j["train"] = {{"learning_rate", s.train.learning_rate},
                {"weight_decay", s.train.weight_decay},
                {"epochs", s.train.epochs},
                {"beta1", s.train.beta1},
                {"beta2", s.train.beta2},
                {"adam_eps", s.train.adam_eps},
                {"eval_every", s.train.eval_every}};
  json seeds = json::array();
  json runs = json::array();
  for (const SeedResult& r : s.seeds) {
    seeds.push_back(r.seed);
    runs.push_back({{"seed", r.seed},
                    {"best_epoch", r.report.best_epoch},
                    {"best_val_acc_pct", 100.0 * r.report.best_val_acc},
                    {"best_val_test_acc_pct", 100.0 * r.report.best_test_acc},
                    {"final_val_acc_pct", 100.0 * r.report.final_val_acc},
                    {"final_test_acc_pct", 100.0 * r.report.final_test_acc},
                    {"final_loss", r.report.epochs.empty() ? 0.0 : r.report.epochs.back().loss}});
  }
  j["seeds"] = seeds;
  j["runs"] = runs;
  j["best_val_test_acc_pct"] = {{"mean", s.best_val_test_pct.mean},
                                {"std", s.best_val_test_pct.std}};
  j["final_test_acc_pct"] = {{"mean", s.final_test_pct.mean}, {"std", s.final_test_pct.std}};
  if (include_wall_time) j["wall_seconds"] = s.wall_seconds;
  return j.dump();
}

std::string summary_text(const RunSummary& s) {
  std::ostringstream o;
  o << s.command << " " << s.dataset << " model=" << to_string(s.model.kind) << "\n";
  for (const SeedResult& r : s.seeds)
    o << "  seed " << r.seed << ": test " << pct(100.0 * r.report.best_test_acc)
      << "% at best val (epoch " << r.report.best_epoch << ", val "
      << pct(100.0 * r.report.best_val_acc) << "%), final " << pct(100.0 * r.report.final_test_acc)
      << "%\n";
  o << "  test accuracy at best val: " << pct(s.best_val_test_pct.mean) << " +- "
    << pct(s.best_val_test_pct.std) << "\n";
  o << "  test accuracy at final epoch: " << pct(s.final_test_pct.mean) << " +- "
    << pct(s.final_test_pct.std) << "\n";
  o << "  wall time: " << pct(s.wall_seconds) << " s\n";
  return o.str();
}

}  // namespace efignn
