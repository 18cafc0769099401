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
#include <vector>

#include "roar/dataset.hpp"
#include "roar/model.hpp"
#include "roar/tensor.hpp"

namespace roar {

enum class AlphaMode { Fixed, DynamicBatch };

struct LossConfig {
  double gamma = 2.0;             // focusing exponent
  AlphaMode alpha_mode = AlphaMode::DynamicBatch;
  double alpha = 0.25;            // used in Fixed mode
  double negative_weight = 1.0;   // constant c on the negative CE
  double aux_weight = 0.5;        // beta on the auxiliary loss
  double default_fps = 10.0;      // fallback when a sample carries no rate
  bool focal_enabled = true;      // off: positive path uses plain CE

  void validate() const;
};

// --- Scalar formulas (the spec's operations; also the eval/report path) ------

/// -[y ln p + (1-y) ln(1-p)] with p clamped to [1e-12, 1-1e-12].
double cross_entropy(double p, int y);

/// alpha * (1 - p_c)^gamma * ce with p_c = exp(-ce).
double dynamic_focal(double ce, double alpha, double gamma);

/// -max(0, (toa - t - 1) / fps); frames are 1-based. Always <= 0, and 0 for
/// every t >= toa - 1.
double temporal_penalty(std::uint32_t toa, std::uint32_t t, double fps);

/// time_weight * exp(penalty) * focal, non-negative.
double positive_frame_loss(double focal, double penalty, double time_weight);

/// Positive-class weight for a batch: fixed alpha, or clamp(1 - q, 0.05,
/// 0.95) from the batch's positive fraction q in DynamicBatch mode.
double resolve_alpha(const LossConfig& cfg, std::size_t positives, std::size_t batch_size);

/// Per-frame pieces of one video's anticipation loss.
struct LossBreakdown {
  std::vector<double> ce;           // per-frame cross-entropy
  std::vector<double> prob_correct; // p_c = exp(-ce)
  std::vector<double> focal;        // per-frame focal term (positives)
  std::vector<double> penalty;      // per-frame temporal penalty (positives)
  std::vector<double> time_weight;  // sigma_t used
  std::vector<double> positive;     // per-frame positive loss
  std::vector<double> negative;     // per-frame negative loss
  double anticipation = 0.0;        // video total
  double auxiliary = 0.0;
  double total = 0.0;
};

/// Frame-by-frame anticipation loss of one video against its trace. alpha is
/// already resolved at batch level.
LossBreakdown anticipation_loss(const PredictionTrace& trace, const VideoSample& sample,
                                const LossConfig& cfg, double alpha);

double auxiliary_loss(double aux_prob, int label);
double total_loss(double anticipation, double auxiliary, double aux_weight);

// --- Tape builders (the training path) ----------------------------------------

/// One video's anticipation loss as a live tensor; same formulas as the
/// scalar path.
Tensor video_anticipation_loss(const ForwardPass& pass, const VideoSample& sample,
                               const LossConfig& cfg, double alpha);

/// Batch objective: mean anticipation loss plus beta times the mean auxiliary
/// loss. Auxiliary terms are skipped when the temporal-fusion head is ablated
/// (the probability is a constant there).
Tensor batch_total_loss(const std::vector<ForwardPass>& passes,
                        const std::vector<const VideoSample*>& samples, const LossConfig& cfg,
                        bool aux_enabled = true);

}  // namespace roar
