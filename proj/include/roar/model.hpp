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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "roar/attention.hpp"
#include "roar/dataset.hpp"
#include "roar/temporal.hpp"
#include "roar/tensor.hpp"
#include "roar/wavelet.hpp"

namespace roar {

/// Switches that replace one pipeline block with an identity or mean
/// passthrough of matching shape. All on by default.
struct AblationSwitches {
  bool dwt = true;
  bool dwt_approx = true;       // keep cA
  bool dwt_detail = true;       // keep cD
  bool fusion = true;           // wavelet-image fusion cell
  bool object_attention = true; // learned weights vs mean of present objects
  bool temporal_fusion = true;  // auxiliary video-level head
  bool time_weight = true;      // learned sigma_t vs constant 1
  bool focal = true;            // dynamic focal vs plain cross-entropy
};

struct ModelConfig {
  std::uint32_t image_dim = 64;
  std::uint32_t object_dim = 32;
  std::uint32_t max_objects = 19;
  std::uint32_t hidden_dim = 128;
  std::uint32_t attention_dim = 64;
  std::uint32_t mlp_hidden_dim = 64;
  std::uint32_t fusion_dim = 128;
  WaveletMode wavelet_mode = WaveletMode::PaperExact;
  double default_fps = 10.0;
  double threshold = 0.5;
  AblationSwitches ablation;

  /// Width of the wavelet branch output consumed by the fusion projection.
  std::uint32_t combined_dim() const {
    return ablation.dwt ? static_cast<std::uint32_t>(combined_length(image_dim)) : image_dim;
  }
  /// Width of the image half of the frame-recurrence input.
  std::uint32_t fused_dim() const { return ablation.fusion ? fusion_dim : combined_dim(); }
  /// Full frame-recurrence input width.
  std::uint32_t frame_input_dim() const { return fused_dim() + object_dim; }

  void validate() const;
};

struct ModelParams {
  AttentionParams attention;
  FusionParams fusion;
  GruParams frame_cell;
  MlpParams probability;
  TimeWeightParams time_weight;
  TemporalFusionParams temporal;

  /// Stable name -> tensor view, the serialization and optimizer order.
  std::vector<std::pair<std::string, Tensor*>> named_tensors();
  std::vector<std::pair<std::string, const Tensor*>> named_tensors() const;

  void watch_all(Tape& tape);
};

/// Fresh parameters: weights uniform on (-s, s) with s = 1/sqrt(fan-in),
/// biases zero; deterministic per seed.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

/// Everything the forward pass produces for one video, as plain values.
struct PredictionTrace {
  std::vector<double> prob;                        // T frame probabilities
  std::vector<double> sigma;                       // T time weights
  std::vector<std::vector<double>> hidden;         // T x H
  std::vector<std::vector<double>> obj_attention;  // T x N
  std::vector<bool> no_objects;                    // T
  TemporalFusionTrace fusion;
  double aux_prob = 0.5;
};

/// Trace plus the live tensors the training loss needs. The tensors are
/// attached to the caller's tape when one was passed to forward_video.
struct ForwardPass {
  PredictionTrace trace;
  std::vector<Tensor> frame_prob;   // T scalars
  std::vector<Tensor> time_weights; // T scalars
  Tensor aux_prob;                  // scalar
};

/// Runs the per-frame pipeline (object attention, wavelet branch, fusion,
/// recurrence, probability and time-weight heads) and the video-level
/// temporal fusion. h_0 is the zero vector. Pass a tape to record gradients.
ForwardPass forward_video(const VideoSample& sample, const ModelParams& params,
                          const ModelConfig& config, Tape* tape = nullptr);

/// Smallest 1-based frame with probability >= threshold, if any.
std::optional<std::uint32_t> first_crossing(const PredictionTrace& trace, double threshold);

// --- "ROARCK01" checkpoint format -------------------------------------------
//
// magic 8 bytes, version u32, parameter count u32, then per parameter:
// name length u16, name bytes, rank u8, extents u32 each, f64 values,
// all little-endian. A leading "config.meta" record carries the ModelConfig.

inline constexpr char kCheckpointMagic[8] = {'R', 'O', 'A', 'R', 'C', 'K', '0', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const ModelParams& params, const ModelConfig& config,
                     const std::string& path);
std::pair<ModelParams, ModelConfig> load_checkpoint(const std::string& path);

}  // namespace roar
