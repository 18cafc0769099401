// Copyright 2026 The ROAR Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "roar/loss.hpp"
#include "roar/metrics.hpp"
#include "roar/model.hpp"

namespace roar {

struct TrainConfig {
  std::uint32_t epochs = 30;
  std::uint32_t batch_size = 10;
  double learning_rate = 1e-3;
  double plateau_factor = 0.5;
  std::uint32_t plateau_patience = 3;
  double min_learning_rate = 1e-5;
  std::uint64_t seed = 42;
  double val_fraction = 0.2;
  double grad_clip_norm = 5.0;  // 0 disables clipping
  LossConfig loss;

  void validate() const;
};

/// Per-parameter Adam moments plus the shared step counter.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

using Gradients = std::vector<std::vector<double>>;

/// One Adam update over the named-tensor order. Allocates moments lazily on
/// the first call. Throws on shape mismatch.
void adam_step(ModelParams& params, const Gradients& grads, AdamState& state, double lr);

/// Scales all gradients by max_norm/norm when the global norm exceeds it.
/// Returns the pre-clip norm.
double clip_gradients(Gradients& grads, double max_norm);

/// ReduceLROnPlateau: multiply the rate by `factor` after `patience` epochs
/// without an improvement larger than 1e-4, never below the floor.
class PlateauScheduler {
 public:
  PlateauScheduler(double initial_lr, double factor, std::uint32_t patience, double min_lr);

  /// Feeds one epoch's validation loss; returns the rate for the next epoch.
  double step(double validation_loss);
  double lr() const { return lr_; }

 private:
  double lr_;
  double factor_;
  std::uint32_t patience_;
  double min_lr_;
  double best_;
  std::uint32_t bad_epochs_ = 0;
  bool has_best_ = false;
};

struct EpochStats {
  std::uint32_t epoch = 0;  // 1-based
  double train_total = 0.0;
  double train_anticipation = 0.0;
  double train_auxiliary = 0.0;
  double val_loss = 0.0;
  double val_ap = 0.0;
  double val_mtta = 0.0;
  double lr = 0.0;
};

struct TrainLog {
  std::vector<EpochStats> epochs;
};

void write_train_log_csv(const TrainLog& log, const std::string& path);

struct TrainResult {
  ModelParams params;
  ModelConfig config;
  TrainLog log;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> val_indices;
};

/// Full training run: seeded 80/20 split, shuffled mini-batches, forward,
/// total loss, backward, Adam, per-epoch validation and plateau step.
/// Writes a checkpoint each epoch when checkpoint_path is non-empty.
/// Requires a non-empty dataset with at least one positive video.
TrainResult train(const std::vector<VideoSample>& dataset, const ModelConfig& model_config,
                  const TrainConfig& config, const std::string& checkpoint_path = "",
                  const std::function<void(const EpochStats&)>& on_epoch = nullptr);

/// Scores every video with the model; the helper the eval paths share.
std::vector<VideoScore> score_videos(const std::vector<VideoSample>& samples,
                                     const ModelParams& params, const ModelConfig& config);

// --- Flat key=value run configuration -----------------------------------------

/// Everything a `train` run reads from its --config file.
struct RunOptions {
  TrainConfig train;
  // model knobs; feature dims always come from the dataset
  std::uint32_t hidden_dim = 128;
  std::uint32_t attention_dim = 64;
  std::uint32_t mlp_hidden_dim = 64;
  std::uint32_t fusion_dim = 128;
  std::uint32_t max_objects = 19;
  WaveletMode wavelet_mode = WaveletMode::PaperExact;
  double threshold = 0.5;
  std::vector<std::string> disabled;  // ablation names

  /// ModelConfig for a dataset with the given feature dims.
  ModelConfig model_config(std::uint32_t image_dim, std::uint32_t object_dim) const;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Parses `key=value` lines ('#' comments, blank lines allowed). Unknown keys
/// raise ConfigError naming the key.
RunOptions load_run_options(const std::string& path);
RunOptions parse_run_options(const std::string& text);

/// Applies one ablation name (dwt, dwt-detail, dwt-approx, fusion, obj-attn,
/// temporal-fusion, time-weight, focal) to the switches; throws ConfigError
/// on an unknown name.
void apply_ablation(AblationSwitches& switches, const std::string& name);

/// The eight recognised ablation names, harness order.
const std::vector<std::string>& ablation_names();

}  // namespace roar
