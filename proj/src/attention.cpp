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

#include "roar/attention.hpp"

namespace roar {

Tensor attention_energies(const Tensor& prev_hidden, const ObjectFrame& frame,
                          const AttentionParams& params) {
  // hidden projection broadcasts across the object rows
  Tensor hidden_part = matmul(as_row(prev_hidden), params.hidden_proj);  // 1 x A
  Tensor object_part = matmul(frame.embeddings, params.object_proj);    // N x A
  Tensor energies = tanh(add_row(add_row(object_part, hidden_part), params.bias));
  Tensor scores = matmul(energies, params.score);  // N x 1
  return reshape(scores, {frame.embeddings.rows()});
}

Tensor attention_weights(const Tensor& energies, const std::vector<bool>& present,
                         bool* no_objects) {
  bool any = false;
  for (bool p : present) any = any || p;
  if (no_objects) *no_objects = !any;
  return masked_softmax(energies, present);
}

AttendedObjects apply_object_attention(const Tensor& weights, const ObjectFrame& frame) {
  AttendedObjects out;
  out.weighted = rowwise_scale(frame.embeddings, weights);
  out.aggregate = reshape(matmul(as_row(weights), frame.embeddings),
                          {frame.embeddings.cols()});
  return out;
}

}  // namespace roar
