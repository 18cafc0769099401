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

#include "roar/temporal.hpp"

#include <stdexcept>

namespace roar {

namespace {

// row-vector x matrix + bias, returned as a vector
Tensor affine_vec(const Tensor& v, const Tensor& weight, const Tensor& bias) {
  return add(reshape(matmul(as_row(v), weight), {weight.cols()}), bias);
}

}  // namespace

Tensor gru_step(const Tensor& input, const Tensor& hidden, const GruParams& params) {
  Tensor z = sigmoid(add(affine_vec(input, params.update_in, params.update_bias),
                         reshape(matmul(as_row(hidden), params.update_rec),
                                 {params.update_rec.cols()})));
  Tensor r = sigmoid(add(affine_vec(input, params.reset_in, params.reset_bias),
                         reshape(matmul(as_row(hidden), params.reset_rec),
                                 {params.reset_rec.cols()})));
  Tensor candidate = tanh(add(affine_vec(input, params.cand_in, params.cand_bias),
                              reshape(matmul(as_row(mul(r, hidden)), params.cand_rec),
                                      {params.cand_rec.cols()})));
  // (1 - z) carries the old state, z admits the candidate
  return add(mul(add_const(scale(z, -1.0), 1.0), hidden), mul(z, candidate));
}

Tensor fuse_image_features(const Tensor& image_feat, const Tensor& combined_coeffs,
                           const FusionParams& params) {
  Tensor state = affine_vec(combined_coeffs, params.state_proj, params.state_bias);
  Tensor next = gru_step(image_feat, state, params.cell);
  return affine_vec(next, params.out_weight, params.out_bias);
}

Tensor frame_recurrence(const Tensor& fused_image, const Tensor& object_agg,
                        const Tensor& prev_hidden, const GruParams& params) {
  return gru_step(concat(fused_image, object_agg), prev_hidden, params);
}

Tensor frame_probability(const Tensor& state, const MlpParams& params) {
  Tensor hidden = relu(affine_vec(state, params.w1, params.b1));
  return sigmoid(affine_vec(hidden, params.w2, params.b2));
}

Tensor time_weight(const Tensor& state, const TimeWeightParams& params) {
  Tensor gate = sigmoid(affine_vec(state, params.weight, params.bias));
  return add_const(gate, 1.0);
}

TemporalFusionResult temporal_attention_fusion(const std::vector<Tensor>& hidden_seq,
                                               const TemporalFusionParams& params) {
  if (hidden_seq.empty())
    throw std::invalid_argument("temporal_attention_fusion: empty sequence");
  const std::size_t frames = hidden_seq.size();

  std::vector<Tensor> averages, maxima;
  averages.reserve(frames);
  maxima.reserve(frames);
  for (const auto& h : hidden_seq) {
    averages.push_back(mean(h));
    maxima.push_back(vmax(h));
  }
  Tensor pooled = stack_rows(pack(averages), pack(maxima));  // 2 x T
  Tensor energies = matmul(transpose(pooled), pooled);       // T x T
  Tensor weights = softmax(energies, 1);
  Tensor weighted = matmul(pooled, weights);  // 2 x T
  Tensor aggregated = reshape(matmul(transpose(weighted), as_col(params.mix)), {frames});
  Tensor logit = add(mul(params.out_scale, mean(aggregated)), params.out_bias);
  Tensor aux = sigmoid(logit);

  TemporalFusionResult result{aux, {}};
  result.trace.frames = frames;
  result.trace.pooled = pooled.values();
  result.trace.energies = energies.values();
  result.trace.weights = weights.values();
  result.trace.weighted = weighted.values();
  result.trace.aggregated = aggregated.values();
  result.trace.aux_prob = aux.item();
  return result;
}

}  // namespace roar
