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

#include "roar/dataset.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

#include "roar/binio.hpp"

namespace roar {

std::uint64_t mix_seed(std::uint64_t seed) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

void VideoSample::validate(std::uint64_t base_offset) const {
  auto fail = [&](const std::string& msg) {
    throw FormatError("invariant violation in video '" + id + "': " + msg, base_offset);
  };
  if (frames == 0) fail("zero frames");
  if ((label == 0) != (toa == 0)) fail("toa must be 0 iff label is 0");
  if (label == 1 && (toa < 1 || toa > frames)) fail("toa outside [1, T]");
  if (image_features.size() != static_cast<std::size_t>(frames) * image_dim)
    fail("image feature count does not match T x D_img");
  if (object_features.size() != static_cast<std::size_t>(frames) * objects * object_dim)
    fail("object feature count does not match T x N x D_obj");
  if (present.size() != static_cast<std::size_t>(frames) * objects)
    fail("mask size does not match T x N");
  for (float v : image_features)
    if (!std::isfinite(v)) fail("non-finite image feature");
  for (float v : object_features)
    if (!std::isfinite(v)) fail("non-finite object feature");
  for (std::uint8_t m : present)
    if (m > 1) fail("mask entry not 0/1");
}

// --- File format -------------------------------------------------------------

void write_dataset(const std::vector<VideoSample>& samples, const std::string& path) {
  if (samples.empty()) throw std::invalid_argument("write_dataset: empty dataset");
  for (const auto& s : samples) s.validate();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_dataset: cannot open '" + path + "'");
  binio::Writer w(out);

  w.bytes(kDatasetMagic, sizeof(kDatasetMagic));
  w.u32(kDatasetVersion);
  w.u32(static_cast<std::uint32_t>(samples.size()));
  for (const auto& s : samples) {
    w.u16(static_cast<std::uint16_t>(s.id.size()));
    w.bytes(s.id.data(), s.id.size());
    w.u32(s.frames);
    w.u32(s.objects);
    w.u32(s.image_dim);
    w.u32(s.object_dim);
    w.u32(s.fps);
    w.u32(s.label);
    w.u32(s.toa);
    for (float v : s.image_features) w.f32(v);
    for (float v : s.object_features) w.f32(v);
    for (std::uint8_t m : s.present) w.f32(m ? 1.0f : 0.0f);
  }
  out.flush();
  if (!out) throw std::runtime_error("write_dataset: write failed for '" + path + "'");
}

std::vector<VideoSample> read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_dataset: cannot open '" + path + "'");
  binio::Reader r(in);

  char magic[8];
  r.bytes(magic, sizeof(magic), "magic");
  if (std::memcmp(magic, kDatasetMagic, sizeof(magic)) != 0)
    throw FormatError("bad magic, not a ROARFT01 file", 0);
  const std::uint32_t version = r.u32("version");
  if (version != kDatasetVersion)
    throw FormatError("unsupported version " + std::to_string(version), 8);
  const std::uint32_t count = r.u32("video count");

  std::vector<VideoSample> samples;
  samples.reserve(count);
  for (std::uint32_t vi = 0; vi < count; ++vi) {
    const std::uint64_t base = r.offset();
    VideoSample s;
    const std::uint16_t id_len = r.u16("id length");
    s.id.resize(id_len);
    if (id_len) r.bytes(s.id.data(), id_len, "id");
    s.frames = r.u32("frame count");
    s.objects = r.u32("object count");
    s.image_dim = r.u32("image dim");
    s.object_dim = r.u32("object dim");
    s.fps = r.u32("fps");
    s.label = r.u32("label");
    s.toa = r.u32("toa");

    const std::size_t n_img = static_cast<std::size_t>(s.frames) * s.image_dim;
    const std::size_t n_obj = static_cast<std::size_t>(s.frames) * s.objects * s.object_dim;
    const std::size_t n_mask = static_cast<std::size_t>(s.frames) * s.objects;
    s.image_features.resize(n_img);
    for (auto& v : s.image_features) v = r.f32("image features");
    s.object_features.resize(n_obj);
    for (auto& v : s.object_features) v = r.f32("object features");
    s.present.resize(n_mask);
    for (auto& m : s.present) {
      const float v = r.f32("presence mask");
      if (v != 0.0f && v != 1.0f)
        throw FormatError("invariant violation in video '" + s.id + "': mask value not 0/1",
                          r.offset() - 4);
      m = v == 1.0f ? 1 : 0;
    }
    s.validate(base);
    samples.push_back(std::move(s));
  }
  return samples;
}

std::uint64_t dataset_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("dataset_checksum: cannot open '" + path + "'");
  std::uint64_t h = 14695981039346656037ull;
  char buf[8192];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
    h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
  return h;
}

// --- Synthetic generator -------------------------------------------------------

namespace {

float narrow(double v) { return static_cast<float>(v); }

}  // namespace

std::vector<VideoSample> synth_generate(const SynthConfig& cfg) {
  if (cfg.videos == 0) throw std::invalid_argument("synth_generate: zero videos requested");
  if (cfg.positive_rate < 0.0 || cfg.positive_rate > 1.0)
    throw std::invalid_argument("synth_generate: positive rate must lie in [0,1]");
  if (cfg.ramp_width == 0 || cfg.ramp_width >= cfg.frames)
    throw std::invalid_argument("synth_generate: ramp width must lie in [1, T)");

  // Dataset-level signatures, fixed across videos so they are learnable.
  // Per-dimension amplitudes stay below 1 so the noise can be shrunk to keep
  // E[x^2] = 1 on every frame: positives differ from negatives in feature
  // direction, not magnitude, and an untrained model cannot separate them.
  constexpr double kMaxAmplitude = 0.95;
  std::vector<double> signature(cfg.image_dim);
  for (std::uint32_t d = 0; d < cfg.image_dim; ++d) {
    const double smooth = cfg.signal_magnitude *
                          std::sin(2.0 * std::numbers::pi * static_cast<double>(d) /
                                   cfg.image_dim);
    const double jitter = cfg.hf_magnitude * (d % 2 == 0 ? 1.0 : -1.0);
    signature[d] = std::clamp(smooth + jitter, -kMaxAmplitude, kMaxAmplitude);
  }
  const double risky_per_dim =
      std::clamp(cfg.risky_shift / std::sqrt(static_cast<double>(cfg.object_dim)),
                 -kMaxAmplitude, kMaxAmplitude);

  std::vector<VideoSample> samples;
  samples.reserve(cfg.videos);
  for (std::uint32_t vi = 0; vi < cfg.videos; ++vi) {
    std::mt19937_64 rng(mix_seed(cfg.seed + vi));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    VideoSample s;
    s.id = "synth-" + std::to_string(cfg.seed) + "-" + std::to_string(vi);
    s.frames = cfg.frames;
    s.objects = cfg.objects;
    s.image_dim = cfg.image_dim;
    s.object_dim = cfg.object_dim;
    s.fps = cfg.fps;
    s.label = unit(rng) < cfg.positive_rate ? 1 : 0;
    std::uint32_t risky_slot = 0;
    if (s.label == 1) {
      std::uniform_int_distribution<std::uint32_t> toa_dist(cfg.frames / 2, cfg.frames);
      s.toa = toa_dist(rng);
      std::uniform_int_distribution<std::uint32_t> slot_dist(0, cfg.objects - 1);
      risky_slot = slot_dist(rng);
    }

    s.image_features.resize(static_cast<std::size_t>(cfg.frames) * cfg.image_dim);
    s.object_features.resize(static_cast<std::size_t>(cfg.frames) * cfg.objects * cfg.object_dim);
    s.present.resize(static_cast<std::size_t>(cfg.frames) * cfg.objects);

    for (std::uint32_t t = 0; t < cfg.frames; ++t) {
      const double frame = static_cast<double>(t) + 1.0;  // 1-based in the risk ramp
      double risk = 0.0;
      if (s.label == 1) {
        const double start = static_cast<double>(s.toa) - cfg.ramp_width;
        risk = std::clamp((frame - start) / cfg.ramp_width, 0.0, 1.0);
      }

      for (std::uint32_t d = 0; d < cfg.image_dim; ++d) {
        const double shift = risk * signature[d];
        const double v = std::sqrt(1.0 - shift * shift) * gauss(rng) + shift;
        s.image_features[t * cfg.image_dim + d] = narrow(v);
      }
      for (std::uint32_t n = 0; n < cfg.objects; ++n) {
        const bool here = unit(rng) < cfg.presence_rate;
        s.present[t * cfg.objects + n] = here ? 1 : 0;
        for (std::uint32_t d = 0; d < cfg.object_dim; ++d) {
          const double shift =
              s.label == 1 && n == risky_slot ? risk * risky_per_dim : 0.0;
          const double v = std::sqrt(1.0 - shift * shift) * gauss(rng) + shift;
          s.object_features[(t * cfg.objects + n) * cfg.object_dim + d] = narrow(v);
        }
      }
    }
    s.validate();
    samples.push_back(std::move(s));
  }
  return samples;
}

// --- Noise injection -----------------------------------------------------------

std::vector<VideoSample> add_gaussian_noise(const std::vector<VideoSample>& samples,
                                            const NoiseConfig& cfg) {
  if (cfg.variance < 0.0)
    throw std::invalid_argument("add_gaussian_noise: negative variance");
  if (cfg.variance == 0.0) return samples;  // identity, bit-exact

  const double sigma = std::sqrt(cfg.variance);
  std::vector<VideoSample> out = samples;
  for (auto& s : out) {
    // Seed from the video id, not its index: injection then commutes with
    // dataset order.
    std::mt19937_64 rng(mix_seed(cfg.seed ^ fnv1a64(s.id.data(), s.id.size())));
    std::normal_distribution<double> gauss(0.0, sigma);
    if (cfg.target != NoiseTarget::Object)
      for (auto& v : s.image_features) v = narrow(v + gauss(rng));
    if (cfg.target != NoiseTarget::Image)
      for (auto& v : s.object_features) v = narrow(v + gauss(rng));
  }
  return out;
}

}  // namespace roar
