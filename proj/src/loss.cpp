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

#include "roar/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace roar {

void LossConfig::validate() const {
  if (gamma < 0.0) throw std::invalid_argument("LossConfig: gamma must be >= 0");
  if (negative_weight <= 0.0) throw std::invalid_argument("LossConfig: c must be > 0");
  if (aux_weight < 0.0) throw std::invalid_argument("LossConfig: beta must be >= 0");
  if (alpha_mode == AlphaMode::Fixed && (alpha <= 0.0 || alpha >= 1.0))
    throw std::invalid_argument("LossConfig: fixed alpha must lie in (0,1)");
}

double cross_entropy(double p, int y) {
  constexpr double kEps = 1e-12;
  const double pc = std::clamp(p, kEps, 1.0 - kEps);
  return -(y * std::log(pc) + (1 - y) * std::log(1.0 - pc));
}

double dynamic_focal(double ce, double alpha, double gamma) {
  const double prob_correct = std::exp(-ce);
  return alpha * std::pow(1.0 - prob_correct, gamma) * ce;
}

double temporal_penalty(std::uint32_t toa, std::uint32_t t, double fps) {
  if (fps <= 0.0) throw std::invalid_argument("temporal_penalty: fps must be positive");
  const double frames_early = static_cast<double>(toa) - static_cast<double>(t) - 1.0;
  return -std::max(0.0, frames_early / fps);
}

double positive_frame_loss(double focal, double penalty, double time_weight) {
  return time_weight * std::exp(penalty) * focal;
}

double resolve_alpha(const LossConfig& cfg, std::size_t positives, std::size_t batch_size) {
  if (cfg.alpha_mode == AlphaMode::Fixed) return cfg.alpha;
  if (batch_size == 0) throw std::invalid_argument("resolve_alpha: empty batch");
  const double q = static_cast<double>(positives) / static_cast<double>(batch_size);
  return std::clamp(1.0 - q, 0.05, 0.95);
}

LossBreakdown anticipation_loss(const PredictionTrace& trace, const VideoSample& sample,
                                const LossConfig& cfg, double alpha) {
  cfg.validate();
  if (trace.prob.size() != sample.frames || trace.sigma.size() != sample.frames)
    throw std::invalid_argument("anticipation_loss: trace not aligned with sample");
  if (sample.label == 1 && (sample.toa < 1 || sample.toa > sample.frames))
    throw std::invalid_argument("anticipation_loss: toa outside [1, T] for a positive sample");

  const double fps = sample.fps > 0 ? static_cast<double>(sample.fps) : cfg.default_fps;
  LossBreakdown out;
  const std::size_t frames = sample.frames;
  out.ce.resize(frames);
  out.prob_correct.resize(frames);
  out.focal.assign(frames, 0.0);
  out.penalty.assign(frames, 0.0);
  out.time_weight.resize(frames);
  out.positive.assign(frames, 0.0);
  out.negative.assign(frames, 0.0);

  double acc = 0.0;
  for (std::size_t t = 0; t < frames; ++t) {
    out.time_weight[t] = trace.sigma[t];
    if (sample.label == 1) {
      const double ce = cross_entropy(trace.prob[t], 1);
      out.ce[t] = ce;
      out.prob_correct[t] = std::exp(-ce);
      out.focal[t] = cfg.focal_enabled ? dynamic_focal(ce, alpha, cfg.gamma) : ce;
      out.penalty[t] = temporal_penalty(sample.toa, static_cast<std::uint32_t>(t + 1), fps);
      out.positive[t] = positive_frame_loss(out.focal[t], out.penalty[t], trace.sigma[t]);
      acc += out.positive[t];
    } else {
      const double ce = cross_entropy(trace.prob[t], 0);
      out.ce[t] = ce;
      out.prob_correct[t] = std::exp(-ce);
      out.negative[t] = cfg.negative_weight * ce;
      acc += out.negative[t];
    }
  }
  out.anticipation = acc;
  out.auxiliary = auxiliary_loss(trace.aux_prob, static_cast<int>(sample.label));
  out.total = total_loss(out.anticipation, out.auxiliary, cfg.aux_weight);
  return out;
}

double auxiliary_loss(double aux_prob, int label) { return cross_entropy(aux_prob, label); }

double total_loss(double anticipation, double auxiliary, double aux_weight) {
  return anticipation + aux_weight * auxiliary;
}

// --- Tape builders --------------------------------------------------------------

Tensor video_anticipation_loss(const ForwardPass& pass, const VideoSample& sample,
                               const LossConfig& cfg, double alpha) {
  cfg.validate();
  if (pass.frame_prob.size() != sample.frames)
    throw std::invalid_argument("video_anticipation_loss: pass not aligned with sample");
  if (sample.label == 1 && (sample.toa < 1 || sample.toa > sample.frames))
    throw std::invalid_argument("video_anticipation_loss: toa outside [1, T]");

  const double fps = sample.fps > 0 ? static_cast<double>(sample.fps) : cfg.default_fps;
  Tensor acc = Tensor::scalar(0.0);
  for (std::uint32_t t = 0; t < sample.frames; ++t) {
    if (sample.label == 1) {
      Tensor ce = bce(pass.frame_prob[t], 1.0);
      Tensor frame_loss = ce;
      if (cfg.focal_enabled) {
        Tensor modulator = pow_const(add_const(scale(roar::exp(scale(ce, -1.0)), -1.0), 1.0),
                                     cfg.gamma);  // (1 - exp(-ce))^gamma
        frame_loss = scale(mul(modulator, ce), alpha);
      }
      const double decay = std::exp(temporal_penalty(sample.toa, t + 1, fps));
      acc = add(acc, scale(mul(pass.time_weights[t], frame_loss), decay));
    } else {
      acc = add(acc, scale(bce(pass.frame_prob[t], 0.0), cfg.negative_weight));
    }
  }
  return acc;
}

Tensor batch_total_loss(const std::vector<ForwardPass>& passes,
                        const std::vector<const VideoSample*>& samples, const LossConfig& cfg,
                        bool aux_enabled) {
  if (passes.empty() || passes.size() != samples.size())
    throw std::invalid_argument("batch_total_loss: empty or misaligned batch");

  std::size_t positives = 0;
  for (const auto* s : samples) positives += s->label;
  const double alpha = resolve_alpha(cfg, positives, samples.size());
  const double inv = 1.0 / static_cast<double>(samples.size());

  Tensor anticipation = Tensor::scalar(0.0);
  Tensor auxiliary = Tensor::scalar(0.0);
  for (std::size_t i = 0; i < passes.size(); ++i) {
    anticipation = add(anticipation, video_anticipation_loss(passes[i], *samples[i], cfg, alpha));
    if (aux_enabled && cfg.aux_weight > 0.0)
      auxiliary = add(auxiliary, bce(passes[i].aux_prob, static_cast<double>(samples[i]->label)));
  }
  Tensor total = scale(anticipation, inv);
  if (aux_enabled && cfg.aux_weight > 0.0)
    total = add(total, scale(auxiliary, cfg.aux_weight * inv));
  return total;
}

}  // namespace roar
