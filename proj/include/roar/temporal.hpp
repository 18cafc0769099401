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

#include <vector>

#include "roar/tensor.hpp"

namespace roar {

/// Gates of one recurrent cell: update z, reset r, candidate. Input weights
/// are input-dim x hidden, recurrent weights hidden x hidden.
struct GruParams {
  Tensor update_in, update_rec, update_bias;
  Tensor reset_in, reset_rec, reset_bias;
  Tensor cand_in, cand_rec, cand_bias;
};

/// One gated update: z and r from sigmoid gates, candidate from tanh with the
/// reset-scaled state, output (1-z) * h + z * candidate.
Tensor gru_step(const Tensor& input, const Tensor& hidden, const GruParams& params);

/// Fuses a frame's raw image features with its wavelet coefficients: the
/// coefficients are projected to the recurrent state, the raw features drive
/// one cell step, and a linear layer maps the state to the fusion width.
struct FusionParams {
  Tensor state_proj;  // combined dim x hidden
  Tensor state_bias;  // hidden
  GruParams cell;     // input = image dim
  Tensor out_weight;  // hidden x fusion dim
  Tensor out_bias;    // fusion dim
};

Tensor fuse_image_features(const Tensor& image_feat, const Tensor& combined_coeffs,
                           const FusionParams& params);

/// Frame recurrence over the concatenated fused-image and aggregated-object
/// features. The per-frame output equals the new state.
Tensor frame_recurrence(const Tensor& fused_image, const Tensor& object_agg,
                        const Tensor& prev_hidden, const GruParams& params);

/// Two-layer probability head: hidden -> relu layer -> sigmoid scalar.
struct MlpParams {
  Tensor w1, b1;  // hidden x mlp hidden, mlp hidden
  Tensor w2, b2;  // mlp hidden x 1, 1
};

Tensor frame_probability(const Tensor& state, const MlpParams& params);

/// Learned per-frame loss multiplier in (1, 2): 1 + sigmoid(affine(state)).
struct TimeWeightParams {
  Tensor weight;  // hidden x 1
  Tensor bias;    // 1
};

Tensor time_weight(const Tensor& state, const TimeWeightParams& params);

/// Video-level attention over the frame states. Each frame is pooled to a
/// channel-average and channel-max descriptor; frame-pair similarities feed
/// a row-softmax whose weights recombine the descriptors; a learned 2-vector
/// folds them to one value per frame and a scalar affine over their mean
/// yields the auxiliary probability.
struct TemporalFusionParams {
  Tensor mix;        // 2
  Tensor out_scale;  // 1
  Tensor out_bias;   // 1
};

struct TemporalFusionTrace {
  std::size_t frames = 0;
  std::vector<double> pooled;      // 2 x T, row 0 average, row 1 max
  std::vector<double> energies;    // T x T
  std::vector<double> weights;     // T x T, rows sum to 1
  std::vector<double> weighted;    // 2 x T
  std::vector<double> aggregated;  // T
  double aux_prob = 0.0;
};

struct TemporalFusionResult {
  Tensor aux_prob;  // scalar in (0,1)
  TemporalFusionTrace trace;
};

TemporalFusionResult temporal_attention_fusion(const std::vector<Tensor>& hidden_seq,
                                               const TemporalFusionParams& params);

}  // namespace roar
