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
#include <string>
#include <vector>

namespace roar {

/// One clip: per-frame image features, per-frame object embeddings with a
/// presence mask, the binary label, and the accident frame (1-based; 0 for
/// negatives). Features live as 32-bit floats, matching the on-disk format;
/// the model widens to 64-bit when it consumes them.
struct VideoSample {
  std::string id;
  std::uint32_t frames = 0;      // T
  std::uint32_t objects = 0;     // N slots per frame
  std::uint32_t image_dim = 0;   // D_img
  std::uint32_t object_dim = 0;  // D_obj
  std::uint32_t fps = 10;
  std::uint32_t label = 0;       // 1 = contains an accident
  std::uint32_t toa = 0;         // accident frame, 1-based; 0 iff label == 0

  std::vector<float> image_features;   // frames x image_dim, row-major
  std::vector<float> object_features;  // frames x objects x object_dim
  std::vector<std::uint8_t> present;   // frames x objects; 0 or 1

  float image_at(std::uint32_t t, std::uint32_t d) const {
    return image_features[t * image_dim + d];
  }
  float object_at(std::uint32_t t, std::uint32_t n, std::uint32_t d) const {
    return object_features[(t * objects + n) * object_dim + d];
  }
  bool present_at(std::uint32_t t, std::uint32_t n) const {
    return present[t * objects + n] != 0;
  }

  /// Checks shape consistency, the label/toa rule, and value finiteness.
  /// Throws FormatError with the given base offset on violation.
  void validate(std::uint64_t base_offset = 0) const;

  bool operator==(const VideoSample&) const = default;
};

// --- "ROARFT01" feature-file format ----------------------------------------
//
// magic 8 bytes, version u32, video count u32; per video: id length u16 + id
// bytes, T u32, N u32, D_img u32, D_obj u32, fps u32, label u32, toa u32,
// then F_img, F_obj and the mask as little-endian 32-bit floats, row-major.

inline constexpr char kDatasetMagic[8] = {'R', 'O', 'A', 'R', 'F', 'T', '0', '1'};
inline constexpr std::uint32_t kDatasetVersion = 1;

void write_dataset(const std::vector<VideoSample>& samples, const std::string& path);
std::vector<VideoSample> read_dataset(const std::string& path);

/// Checksum over the file's bytes; stable across runs for equal content.
std::uint64_t dataset_checksum(const std::string& path);

// --- Synthetic generator ----------------------------------------------------

struct SynthConfig {
  std::uint32_t videos = 100;
  double positive_rate = 0.4;
  std::uint32_t frames = 50;  // T
  std::uint32_t fps = 10;
  std::uint32_t image_dim = 64;
  std::uint32_t object_dim = 32;
  std::uint32_t objects = 5;       // N
  std::uint32_t ramp_width = 30;   // frames over which risk ramps 0 -> 1
  double signal_magnitude = 0.55;  // low-frequency image signature amplitude
  double hf_magnitude = 0.45;      // alternating-sign detail signature amplitude
  double risky_shift = 2.0;        // mean shift on the risky object
  double presence_rate = 0.8;      // per-slot object presence probability
  std::uint64_t seed = 42;
};

/// Seeded generator. Negatives are unit Gaussians per dimension. Positives
/// ramp a latent risk r_t = clamp((t - (toa - w)) / w, 0, 1) that injects a
/// smooth image signature, an alternating-sign high-frequency signature, and
/// a mean shift on one designated risky object. toa is uniform on [T/2, T].
/// Per-video seeds derive from the master seed by counter.
std::vector<VideoSample> synth_generate(const SynthConfig& cfg);

// --- Gaussian-noise injection ------------------------------------------------

enum class NoiseTarget { Image, Object, Both };

struct NoiseConfig {
  double variance = 0.0;  // sigma^2; 0 is the identity transform
  std::uint64_t seed = 0;
  NoiseTarget target = NoiseTarget::Both;
};

/// Adds i.i.d. Normal(0, variance) samples to the targeted feature arrays.
/// Labels, toa and masks are untouched. Per-video noise streams are seeded
/// from the video id, so injection commutes with dataset order. Throws
/// std::invalid_argument on negative variance.
std::vector<VideoSample> add_gaussian_noise(const std::vector<VideoSample>& samples,
                                            const NoiseConfig& cfg);

/// splitmix64; used to derive per-video seeds.
std::uint64_t mix_seed(std::uint64_t seed);

}  // namespace roar
