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

#include "roar/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

#include "roar/binio.hpp"

namespace roar {

void ModelConfig::validate() const {
  auto positive = [](std::uint32_t v, const char* name) {
    if (v == 0) throw std::invalid_argument(std::string("ModelConfig: ") + name + " must be positive");
  };
  positive(image_dim, "image_dim");
  positive(object_dim, "object_dim");
  positive(max_objects, "max_objects");
  positive(hidden_dim, "hidden_dim");
  positive(attention_dim, "attention_dim");
  positive(mlp_hidden_dim, "mlp_hidden_dim");
  positive(fusion_dim, "fusion_dim");
  if (default_fps <= 0.0) throw std::invalid_argument("ModelConfig: fps must be positive");
  if (threshold <= 0.0 || threshold >= 1.0)
    throw std::invalid_argument("ModelConfig: threshold must lie in (0,1)");
}

std::vector<std::pair<std::string, Tensor*>> ModelParams::named_tensors() {
  return {
      {"attention.hidden_proj", &attention.hidden_proj},
      {"attention.object_proj", &attention.object_proj},
      {"attention.bias", &attention.bias},
      {"attention.score", &attention.score},
      {"fusion.state_proj", &fusion.state_proj},
      {"fusion.state_bias", &fusion.state_bias},
      {"fusion.cell.update_in", &fusion.cell.update_in},
      {"fusion.cell.update_rec", &fusion.cell.update_rec},
      {"fusion.cell.update_bias", &fusion.cell.update_bias},
      {"fusion.cell.reset_in", &fusion.cell.reset_in},
      {"fusion.cell.reset_rec", &fusion.cell.reset_rec},
      {"fusion.cell.reset_bias", &fusion.cell.reset_bias},
      {"fusion.cell.cand_in", &fusion.cell.cand_in},
      {"fusion.cell.cand_rec", &fusion.cell.cand_rec},
      {"fusion.cell.cand_bias", &fusion.cell.cand_bias},
      {"fusion.out_weight", &fusion.out_weight},
      {"fusion.out_bias", &fusion.out_bias},
      {"frame.update_in", &frame_cell.update_in},
      {"frame.update_rec", &frame_cell.update_rec},
      {"frame.update_bias", &frame_cell.update_bias},
      {"frame.reset_in", &frame_cell.reset_in},
      {"frame.reset_rec", &frame_cell.reset_rec},
      {"frame.reset_bias", &frame_cell.reset_bias},
      {"frame.cand_in", &frame_cell.cand_in},
      {"frame.cand_rec", &frame_cell.cand_rec},
      {"frame.cand_bias", &frame_cell.cand_bias},
      {"probability.w1", &probability.w1},
      {"probability.b1", &probability.b1},
      {"probability.w2", &probability.w2},
      {"probability.b2", &probability.b2},
      {"time_weight.weight", &time_weight.weight},
      {"time_weight.bias", &time_weight.bias},
      {"temporal.mix", &temporal.mix},
      {"temporal.out_scale", &temporal.out_scale},
      {"temporal.out_bias", &temporal.out_bias},
  };
}

std::vector<std::pair<std::string, const Tensor*>> ModelParams::named_tensors() const {
  auto mut = const_cast<ModelParams*>(this)->named_tensors();
  std::vector<std::pair<std::string, const Tensor*>> out;
  out.reserve(mut.size());
  for (auto& [name, t] : mut) out.emplace_back(name, t);
  return out;
}

void ModelParams::watch_all(Tape& tape) {
  for (auto& [name, t] : named_tensors()) tape.watch(*t);
}

namespace {

Tensor init_weight(std::vector<std::size_t> shape, std::size_t fan_in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return Tensor(std::move(shape), std::move(v));
}

GruParams init_gru(std::size_t input_dim, std::size_t hidden_dim, std::mt19937_64& rng) {
  GruParams p;
  p.update_in = init_weight({input_dim, hidden_dim}, input_dim, rng);
  p.update_rec = init_weight({hidden_dim, hidden_dim}, hidden_dim, rng);
  p.update_bias = Tensor({hidden_dim});
  p.reset_in = init_weight({input_dim, hidden_dim}, input_dim, rng);
  p.reset_rec = init_weight({hidden_dim, hidden_dim}, hidden_dim, rng);
  p.reset_bias = Tensor({hidden_dim});
  p.cand_in = init_weight({input_dim, hidden_dim}, input_dim, rng);
  p.cand_rec = init_weight({hidden_dim, hidden_dim}, hidden_dim, rng);
  p.cand_bias = Tensor({hidden_dim});
  return p;
}

}  // namespace

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);

  const std::size_t hidden = config.hidden_dim;
  const std::size_t attn = config.attention_dim;

  ModelParams p;
  p.attention.hidden_proj = init_weight({hidden, attn}, hidden, rng);
  p.attention.object_proj = init_weight({config.object_dim, attn}, config.object_dim, rng);
  p.attention.bias = Tensor({attn});
  p.attention.score = init_weight({attn, 1}, attn, rng);

  p.fusion.state_proj = init_weight({config.combined_dim(), hidden}, config.combined_dim(), rng);
  p.fusion.state_bias = Tensor({hidden});
  p.fusion.cell = init_gru(config.image_dim, hidden, rng);
  p.fusion.out_weight = init_weight({hidden, config.fusion_dim}, hidden, rng);
  p.fusion.out_bias = Tensor({config.fusion_dim});

  p.frame_cell = init_gru(config.frame_input_dim(), hidden, rng);

  p.probability.w1 = init_weight({hidden, config.mlp_hidden_dim}, hidden, rng);
  p.probability.b1 = Tensor({config.mlp_hidden_dim});
  p.probability.w2 = init_weight({config.mlp_hidden_dim, 1}, config.mlp_hidden_dim, rng);
  p.probability.b2 = Tensor({1});

  p.time_weight.weight = init_weight({hidden, 1}, hidden, rng);
  p.time_weight.bias = Tensor({1});

  p.temporal.mix = init_weight({2}, 2, rng);
  p.temporal.out_scale = init_weight({1}, 1, rng);
  p.temporal.out_bias = Tensor({1});
  return p;
}

// --- Forward pass -------------------------------------------------------------

namespace {

// Widens one frame's object embeddings into a matrix plus mask.
ObjectFrame make_object_frame(const VideoSample& sample, std::uint32_t t) {
  ObjectFrame frame;
  std::vector<double> values(static_cast<std::size_t>(sample.objects) * sample.object_dim);
  for (std::uint32_t n = 0; n < sample.objects; ++n)
    for (std::uint32_t d = 0; d < sample.object_dim; ++d)
      values[n * sample.object_dim + d] = sample.object_at(t, n, d);
  frame.embeddings = Tensor({sample.objects, sample.object_dim}, std::move(values));
  frame.present.resize(sample.objects);
  for (std::uint32_t n = 0; n < sample.objects; ++n)
    frame.present[n] = sample.present_at(t, n);
  return frame;
}

// Unweighted mean of the present objects; zero vector when none are.
Tensor mean_object_aggregate(const ObjectFrame& frame) {
  const std::size_t n = frame.embeddings.rows();
  const std::size_t d = frame.embeddings.cols();
  std::size_t count = 0;
  for (bool p : frame.present) count += p ? 1 : 0;
  std::vector<double> agg(d, 0.0);
  if (count > 0) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!frame.present[i]) continue;
      for (std::size_t j = 0; j < d; ++j) agg[j] += frame.embeddings.at(i, j);
    }
    for (auto& v : agg) v /= static_cast<double>(count);
  }
  return Tensor({d}, std::move(agg));
}

// Wavelet branch for one frame, honoring the ablation switches. Runs outside
// the tape: the inputs are data, not parameters.
Tensor wavelet_branch(const VideoSample& sample, std::uint32_t t, const ModelConfig& config) {
  std::vector<double> row(sample.image_dim);
  for (std::uint32_t d = 0; d < sample.image_dim; ++d) row[d] = sample.image_at(t, d);
  if (!config.ablation.dwt) {
    const std::size_t dim = row.size();
    return Tensor({dim}, std::move(row));
  }

  auto coeffs = haar_decompose(row, WaveletFilter::haar(config.wavelet_mode));
  if (!config.ablation.dwt_approx)
    std::fill(coeffs.combined.begin(), coeffs.combined.begin() + coeffs.approx.size(), 0.0);
  if (!config.ablation.dwt_detail)
    std::fill(coeffs.combined.begin() + coeffs.approx.size(), coeffs.combined.end(), 0.0);
  const std::size_t dim = coeffs.combined.size();
  return Tensor({dim}, std::move(coeffs.combined));
}

}  // namespace

ForwardPass forward_video(const VideoSample& sample, const ModelParams& params,
                          const ModelConfig& config, Tape* tape) {
  if (sample.frames == 0) throw std::invalid_argument("forward_video: empty video");
  if (sample.image_dim != config.image_dim || sample.object_dim != config.object_dim)
    throw ShapeError("forward_video: sample dims [" + std::to_string(sample.image_dim) + "," +
                     std::to_string(sample.object_dim) + "] do not match config [" +
                     std::to_string(config.image_dim) + "," + std::to_string(config.object_dim) +
                     "]");
  if (sample.objects > config.max_objects)
    throw ShapeError("forward_video: sample has " + std::to_string(sample.objects) +
                     " object slots, config caps at " + std::to_string(config.max_objects));

  // Recording happens implicitly through the watched parameters; the tape
  // argument only asserts intent and keeps eval paths cheap.
  ModelParams& mutable_params = const_cast<ModelParams&>(params);
  if (tape) mutable_params.watch_all(*tape);

  ForwardPass pass;
  pass.trace.prob.reserve(sample.frames);
  pass.trace.sigma.reserve(sample.frames);

  Tensor hidden({config.hidden_dim});  // h_0 = 0
  std::vector<Tensor> hidden_seq;
  hidden_seq.reserve(sample.frames);

  for (std::uint32_t t = 0; t < sample.frames; ++t) {
    ObjectFrame frame = make_object_frame(sample, t);

    Tensor object_agg;
    bool no_objects = false;
    if (config.ablation.object_attention) {
      Tensor energies = attention_energies(hidden, frame, params.attention);
      Tensor weights = attention_weights(energies, frame.present, &no_objects);
      object_agg = apply_object_attention(weights, frame).aggregate;
      pass.trace.obj_attention.push_back(weights.values());
    } else {
      no_objects = true;
      for (bool p : frame.present)
        if (p) no_objects = false;
      object_agg = mean_object_aggregate(frame);
      pass.trace.obj_attention.emplace_back(sample.objects, 0.0);
    }
    pass.trace.no_objects.push_back(no_objects);

    Tensor combined = wavelet_branch(sample, t, config);
    std::vector<double> image_row(sample.image_dim);
    for (std::uint32_t d = 0; d < sample.image_dim; ++d) image_row[d] = sample.image_at(t, d);
    Tensor image_feat({static_cast<std::size_t>(sample.image_dim)}, std::move(image_row));

    Tensor fused = config.ablation.fusion
                       ? fuse_image_features(image_feat, combined, params.fusion)
                       : combined;

    hidden = frame_recurrence(fused, object_agg, hidden, params.frame_cell);
    hidden_seq.push_back(hidden);
    pass.trace.hidden.push_back(hidden.values());

    Tensor prob = frame_probability(hidden, params.probability);
    pass.trace.prob.push_back(prob.item());
    pass.frame_prob.push_back(prob);

    Tensor sigma = config.ablation.time_weight ? time_weight(hidden, params.time_weight)
                                               : Tensor::scalar(1.0);
    pass.trace.sigma.push_back(sigma.item());
    pass.time_weights.push_back(sigma);
  }

  if (config.ablation.temporal_fusion) {
    auto fusion = temporal_attention_fusion(hidden_seq, params.temporal);
    pass.trace.fusion = fusion.trace;
    pass.trace.aux_prob = fusion.trace.aux_prob;
    pass.aux_prob = fusion.aux_prob;
  } else {
    pass.trace.aux_prob = 0.5;
    pass.aux_prob = Tensor::scalar(0.5);
  }
  return pass;
}

std::optional<std::uint32_t> first_crossing(const PredictionTrace& trace, double threshold) {
  if (threshold <= 0.0 || threshold >= 1.0)
    throw std::invalid_argument("first_crossing: threshold must lie in (0,1)");
  for (std::size_t t = 0; t < trace.prob.size(); ++t)
    if (trace.prob[t] >= threshold) return static_cast<std::uint32_t>(t + 1);
  return std::nullopt;
}

// --- Checkpoint I/O -------------------------------------------------------------

namespace {

constexpr char kConfigRecord[] = "config.meta";

std::vector<double> encode_config(const ModelConfig& c) {
  const auto& a = c.ablation;
  return {1.0,
          static_cast<double>(c.image_dim),
          static_cast<double>(c.object_dim),
          static_cast<double>(c.max_objects),
          static_cast<double>(c.hidden_dim),
          static_cast<double>(c.attention_dim),
          static_cast<double>(c.mlp_hidden_dim),
          static_cast<double>(c.fusion_dim),
          c.wavelet_mode == WaveletMode::Orthonormal ? 1.0 : 0.0,
          c.default_fps,
          c.threshold,
          a.dwt ? 1.0 : 0.0,
          a.dwt_approx ? 1.0 : 0.0,
          a.dwt_detail ? 1.0 : 0.0,
          a.fusion ? 1.0 : 0.0,
          a.object_attention ? 1.0 : 0.0,
          a.temporal_fusion ? 1.0 : 0.0,
          a.time_weight ? 1.0 : 0.0,
          a.focal ? 1.0 : 0.0};
}

ModelConfig decode_config(const std::vector<double>& v, std::uint64_t offset) {
  if (v.size() != 19 || v[0] != 1.0)
    throw FormatError("unrecognized config.meta record", offset);
  ModelConfig c;
  c.image_dim = static_cast<std::uint32_t>(v[1]);
  c.object_dim = static_cast<std::uint32_t>(v[2]);
  c.max_objects = static_cast<std::uint32_t>(v[3]);
  c.hidden_dim = static_cast<std::uint32_t>(v[4]);
  c.attention_dim = static_cast<std::uint32_t>(v[5]);
  c.mlp_hidden_dim = static_cast<std::uint32_t>(v[6]);
  c.fusion_dim = static_cast<std::uint32_t>(v[7]);
  c.wavelet_mode = v[8] == 1.0 ? WaveletMode::Orthonormal : WaveletMode::PaperExact;
  c.default_fps = v[9];
  c.threshold = v[10];
  c.ablation.dwt = v[11] == 1.0;
  c.ablation.dwt_approx = v[12] == 1.0;
  c.ablation.dwt_detail = v[13] == 1.0;
  c.ablation.fusion = v[14] == 1.0;
  c.ablation.object_attention = v[15] == 1.0;
  c.ablation.temporal_fusion = v[16] == 1.0;
  c.ablation.time_weight = v[17] == 1.0;
  c.ablation.focal = v[18] == 1.0;
  return c;
}

void write_record(binio::Writer& w, const std::string& name,
                  const std::vector<std::size_t>& shape, const std::vector<double>& values) {
  w.u16(static_cast<std::uint16_t>(name.size()));
  w.bytes(name.data(), name.size());
  w.u8(static_cast<std::uint8_t>(shape.size()));
  for (std::size_t e : shape) w.u32(static_cast<std::uint32_t>(e));
  for (double v : values) w.f64(v);
}

}  // namespace

void save_checkpoint(const ModelParams& params, const ModelConfig& config,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open '" + path + "'");
  binio::Writer w(out);

  auto named = params.named_tensors();
  w.bytes(kCheckpointMagic, sizeof(kCheckpointMagic));
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(named.size() + 1));

  auto meta = encode_config(config);
  write_record(w, kConfigRecord, {meta.size()}, meta);
  for (const auto& [name, tensor] : named)
    write_record(w, name, tensor->shape(), tensor->values());
  out.flush();
  if (!out) throw std::runtime_error("save_checkpoint: write failed for '" + path + "'");
}

std::pair<ModelParams, ModelConfig> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open '" + path + "'");
  binio::Reader r(in);

  char magic[8];
  r.bytes(magic, sizeof(magic), "magic");
  if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw FormatError("bad magic, not a ROARCK01 file", 0);
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointVersion)
    throw FormatError("unsupported version " + std::to_string(version), 8);
  const std::uint32_t count = r.u32("parameter count");

  struct Record {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double> values;
  };
  std::vector<Record> records;
  records.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Record rec;
    const std::uint16_t name_len = r.u16("parameter name length");
    rec.name.resize(name_len);
    if (name_len) r.bytes(rec.name.data(), name_len, "parameter name");
    const std::uint8_t rank = r.u8("parameter rank");
    std::size_t n = 1;
    for (std::uint8_t d = 0; d < rank; ++d) {
      const std::uint32_t extent = r.u32("parameter extent");
      rec.shape.push_back(extent);
      n *= extent;
    }
    rec.values.resize(n);
    for (auto& v : rec.values) v = r.f64("parameter values");
    records.push_back(std::move(rec));
  }

  if (records.empty() || records.front().name != kConfigRecord)
    throw FormatError("checkpoint missing leading config.meta record", 16);
  ModelConfig config = decode_config(records.front().values, 16);

  ModelParams params = init_params(config, 0);  // shapes only; overwritten below
  auto named = params.named_tensors();
  if (records.size() != named.size() + 1)
    throw FormatError("checkpoint parameter count mismatch: expected " +
                          std::to_string(named.size() + 1) + ", found " +
                          std::to_string(records.size()),
                      16);
  for (std::size_t i = 0; i < named.size(); ++i) {
    const auto& rec = records[i + 1];
    auto& [name, tensor] = named[i];
    if (rec.name != name)
      throw FormatError("checkpoint parameter order mismatch: expected '" + name +
                            "', found '" + rec.name + "'",
                        16);
    if (rec.shape != tensor->shape())
      throw FormatError("checkpoint shape mismatch for '" + name + "'", 16);
    tensor->assign(rec.values);
  }
  return {std::move(params), config};
}

}  // namespace roar
