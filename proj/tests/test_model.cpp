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

#include <cmath>
#include <fstream>
#include <random>

#include "doctest.h"
#include "roar/binio.hpp"
#include "roar/loss.hpp"
#include "roar/model.hpp"
#include "support/gradcheck.hpp"
#include "support/tmpdir.hpp"

using namespace roar;
using roar::testing::grad_check;
using roar::testing::TempDir;
using roar::testing::slurp;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.image_dim = 8;
  cfg.object_dim = 4;
  cfg.max_objects = 2;
  cfg.hidden_dim = 6;
  cfg.attention_dim = 4;
  cfg.mlp_hidden_dim = 5;
  cfg.fusion_dim = 6;
  return cfg;
}

VideoSample random_sample(const ModelConfig& cfg, std::uint32_t frames, std::uint32_t seed,
                          std::uint32_t label = 1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  VideoSample s;
  s.id = "test-" + std::to_string(seed);
  s.frames = frames;
  s.objects = cfg.max_objects;
  s.image_dim = cfg.image_dim;
  s.object_dim = cfg.object_dim;
  s.fps = 10;
  s.label = label;
  s.toa = label ? frames : 0;
  s.image_features.resize(frames * cfg.image_dim);
  for (auto& v : s.image_features) v = static_cast<float>(gauss(rng));
  s.object_features.resize(static_cast<std::size_t>(frames) * s.objects * cfg.object_dim);
  for (auto& v : s.object_features) v = static_cast<float>(gauss(rng));
  s.present.assign(static_cast<std::size_t>(frames) * s.objects, 1);
  s.present[1] = 0;  // one padded slot in the first frame
  return s;
}

ModelParams zero_params(const ModelConfig& cfg) {
  ModelParams p = init_params(cfg, 0);
  for (auto& [name, t] : p.named_tensors()) t->assign(std::vector<double>(t->size(), 0.0));
  return p;
}

ModelParams params_from(std::vector<Tensor>& in) {
  ModelParams p;
  auto named = p.named_tensors();
  REQUIRE(named.size() == in.size());
  for (std::size_t i = 0; i < named.size(); ++i) *named[i].second = in[i];
  return p;
}

std::vector<Tensor> tensors_of(ModelParams& p) {
  std::vector<Tensor> out;
  for (auto& [name, t] : p.named_tensors()) out.push_back(*t);
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("init is deterministic per seed and bounded by fan-in") {
  ModelConfig cfg = tiny_config();
  auto a = init_params(cfg, 7);
  auto b = init_params(cfg, 7);
  for (std::size_t i = 0; i < a.named_tensors().size(); ++i)
    CHECK(a.named_tensors()[i].second->values() == b.named_tensors()[i].second->values());

  auto c = init_params(cfg, 8);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.named_tensors().size(); ++i)
    any_diff = any_diff ||
               a.named_tensors()[i].second->values() != c.named_tensors()[i].second->values();
  CHECK(any_diff);

  ModelConfig wide = cfg;
  wide.hidden_dim = 100;  // fan-in 100 into the probability head
  auto p = init_params(wide, 3);
  for (double w : p.probability.w1.values()) CHECK(std::fabs(w) < 0.1);
  for (double b2 : p.probability.b1.values()) CHECK(b2 == 0.0);
}

TEST_CASE("zero model on a single zero frame gives the sigmoid midpoints") {
  ModelConfig cfg = tiny_config();
  ModelParams params = zero_params(cfg);
  VideoSample s = random_sample(cfg, 1, 5);
  std::fill(s.image_features.begin(), s.image_features.end(), 0.0f);
  std::fill(s.object_features.begin(), s.object_features.end(), 0.0f);

  auto pass = forward_video(s, params, cfg);
  CHECK(pass.trace.prob[0] == 0.5);
  CHECK(pass.trace.sigma[0] == 1.5);
  CHECK(pass.trace.aux_prob == 0.5);
}

TEST_CASE("forward is deterministic and length-preserving") {
  ModelConfig cfg = tiny_config();
  auto params = init_params(cfg, 11);
  auto s = random_sample(cfg, 7, 21);
  auto a = forward_video(s, params, cfg);
  auto b = forward_video(s, params, cfg);
  CHECK(a.trace.prob == b.trace.prob);
  CHECK(a.trace.sigma == b.trace.sigma);
  CHECK(a.trace.aux_prob == b.trace.aux_prob);

  CHECK(a.trace.prob.size() == 7);
  CHECK(a.trace.sigma.size() == 7);
  CHECK(a.trace.hidden.size() == 7);
  CHECK(a.trace.obj_attention.size() == 7);
  CHECK(a.trace.no_objects.size() == 7);
  for (double p : a.trace.prob) {
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }
  for (double sg : a.trace.sigma) {
    CHECK(sg > 1.0);
    CHECK(sg < 2.0);
  }
}

TEST_CASE("forward matches the hand-composed module pipeline") {
  ModelConfig cfg = tiny_config();
  auto params = init_params(cfg, 13);
  auto s = random_sample(cfg, 3, 23);

  auto pass = forward_video(s, params, cfg);

  // oracle: the same module calls composed explicitly, in the stated order
  Tensor hidden({cfg.hidden_dim});
  std::vector<Tensor> hidden_seq;
  auto filter = WaveletFilter::haar(cfg.wavelet_mode);
  for (std::uint32_t t = 0; t < s.frames; ++t) {
    std::vector<double> obj_values;
    std::vector<bool> present;
    for (std::uint32_t n = 0; n < s.objects; ++n) {
      present.push_back(s.present_at(t, n));
      for (std::uint32_t d = 0; d < s.object_dim; ++d)
        obj_values.push_back(s.object_at(t, n, d));
    }
    ObjectFrame frame{Tensor({s.objects, s.object_dim}, obj_values), present};
    Tensor energies = attention_energies(hidden, frame, params.attention);
    Tensor weights = attention_weights(energies, present);
    Tensor agg = apply_object_attention(weights, frame).aggregate;

    std::vector<double> row(s.image_dim);
    for (std::uint32_t d = 0; d < s.image_dim; ++d) row[d] = s.image_at(t, d);
    auto coeffs = haar_decompose(row, filter);
    Tensor combined({coeffs.combined.size()}, coeffs.combined);
    Tensor image({row.size()}, row);

    Tensor fused = fuse_image_features(image, combined, params.fusion);
    hidden = frame_recurrence(fused, agg, hidden, params.frame_cell);
    hidden_seq.push_back(hidden);

    CHECK(std::fabs(pass.trace.prob[t] -
                    frame_probability(hidden, params.probability).item()) <= 1e-12);
    CHECK(std::fabs(pass.trace.sigma[t] -
                    time_weight(hidden, params.time_weight).item()) <= 1e-12);
    for (std::uint32_t n = 0; n < s.objects; ++n)
      CHECK(std::fabs(pass.trace.obj_attention[t][n] - weights.at(n)) <= 1e-12);
    for (std::uint32_t i = 0; i < cfg.hidden_dim; ++i)
      CHECK(std::fabs(pass.trace.hidden[t][i] - hidden.at(i)) <= 1e-12);
  }
  auto fusion = temporal_attention_fusion(hidden_seq, params.temporal);
  CHECK(std::fabs(pass.trace.aux_prob - fusion.trace.aux_prob) <= 1e-12);
}

TEST_CASE("dimension mismatches and empty videos are rejected") {
  ModelConfig cfg = tiny_config();
  auto params = init_params(cfg, 1);
  auto s = random_sample(cfg, 3, 2);
  s.image_dim = cfg.image_dim + 2;
  s.image_features.resize(static_cast<std::size_t>(s.frames) * s.image_dim);
  CHECK_THROWS_AS(forward_video(s, params, cfg), ShapeError);

  auto empty = random_sample(cfg, 2, 3);
  empty.frames = 0;
  CHECK_THROWS_AS(forward_video(empty, params, cfg), std::invalid_argument);
}

TEST_CASE("first crossing") {
  PredictionTrace trace;
  trace.prob = {0.1, 0.4, 0.6, 0.9};
  CHECK(first_crossing(trace, 0.5).value() == 3);

  trace.prob = {0.2, 0.2, 0.2};
  CHECK(!first_crossing(trace, 0.5).has_value());

  trace.prob = {0.01, 0.99};
  CHECK(first_crossing(trace, 1e-9).value() == 1);  // p_t > 0 everywhere
  CHECK_THROWS_AS(first_crossing(trace, 0.0), std::invalid_argument);
}

TEST_CASE("ablated pipelines still produce valid probabilities") {
  ModelConfig cfg = tiny_config();
  auto s = random_sample(cfg, 5, 31);

  auto check_valid = [&](ModelConfig variant) {
    auto params = init_params(variant, 3);
    auto pass = forward_video(s, params, variant);
    REQUIRE(pass.trace.prob.size() == s.frames);
    for (double p : pass.trace.prob) {
      CHECK(p > 0.0);
      CHECK(p < 1.0);
    }
    return pass;
  };

  ModelConfig no_dwt = cfg;
  no_dwt.ablation.dwt = false;
  check_valid(no_dwt);

  ModelConfig approx_only = cfg;
  approx_only.ablation.dwt_detail = false;
  check_valid(approx_only);

  ModelConfig detail_only = cfg;
  detail_only.ablation.dwt_approx = false;
  check_valid(detail_only);

  ModelConfig no_fusion = cfg;
  no_fusion.ablation.fusion = false;
  check_valid(no_fusion);

  ModelConfig no_attention = cfg;
  no_attention.ablation.object_attention = false;
  auto pass = check_valid(no_attention);
  for (const auto& row : pass.trace.obj_attention)
    for (double w : row) CHECK(w == 0.0);

  ModelConfig no_temporal = cfg;
  no_temporal.ablation.temporal_fusion = false;
  CHECK(check_valid(no_temporal).trace.aux_prob == 0.5);

  ModelConfig no_tw = cfg;
  no_tw.ablation.time_weight = false;
  for (double sg : check_valid(no_tw).trace.sigma) CHECK(sg == 1.0);
}

TEST_CASE("end-to-end gradients of the total loss match finite differences") {
  ModelConfig cfg = tiny_config();
  LossConfig loss_cfg;
  loss_cfg.alpha_mode = AlphaMode::Fixed;
  loss_cfg.alpha = 0.25;

  for (std::uint32_t label : {1u, 0u}) {
    VideoSample s = random_sample(cfg, 4, 51 + label, label);
    if (label) s.toa = 3;
    auto fn = [&](std::vector<Tensor>& in) {
      ModelParams p = params_from(in);
      std::vector<ForwardPass> passes;
      passes.push_back(forward_video(s, p, cfg));
      std::vector<const VideoSample*> batch{&s};
      return batch_total_loss(passes, batch, loss_cfg, true);
    };
    auto params = init_params(cfg, 61);
    auto res = grad_check(fn, tensors_of(params));
    CHECK(res.max_rel_err < 1e-5);
  }
}

TEST_CASE("checkpoints round-trip byte-exactly") {
  TempDir dir("ckpt");
  ModelConfig cfg = tiny_config();
  cfg.ablation.dwt_detail = false;
  cfg.wavelet_mode = WaveletMode::Orthonormal;
  auto params = init_params(cfg, 17);

  const std::string a = dir.file("a.ck");
  const std::string b = dir.file("b.ck");
  save_checkpoint(params, cfg, a);
  auto [loaded, loaded_cfg] = load_checkpoint(a);
  save_checkpoint(loaded, loaded_cfg, b);
  CHECK(slurp(a) == slurp(b));

  CHECK(loaded_cfg.image_dim == cfg.image_dim);
  CHECK(loaded_cfg.wavelet_mode == cfg.wavelet_mode);
  CHECK(loaded_cfg.ablation.dwt_detail == false);
  auto named = params.named_tensors();
  auto named_loaded = loaded.named_tensors();
  for (std::size_t i = 0; i < named.size(); ++i)
    CHECK(named[i].second->values() == named_loaded[i].second->values());

  // forwards agree exactly after the round trip
  auto s = random_sample(cfg, 4, 71);
  CHECK(forward_video(s, params, cfg).trace.prob ==
        forward_video(s, loaded, loaded_cfg).trace.prob);
}

TEST_CASE("checkpoint with corrupt magic is rejected") {
  TempDir dir("ckpt_bad");
  const std::string path = dir.file("bad.ck");
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOTROAR0" << std::string(32, '\0');
  }
  CHECK_THROWS_AS(load_checkpoint(path), FormatError);
}

TEST_SUITE_END();
