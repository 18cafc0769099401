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

/// Per-frame attention over detected-object embeddings, conditioned on the
/// previous recurrent state.
struct AttentionParams {
  Tensor hidden_proj;  // hidden dim x attention dim
  Tensor object_proj;  // object dim x attention dim
  Tensor bias;         // attention dim
  Tensor score;        // attention dim x 1
};

/// Object embeddings for one frame plus the detector's presence mask; padded
/// slots are masked out and contribute nothing.
struct ObjectFrame {
  Tensor embeddings;          // objects x object dim
  std::vector<bool> present;  // objects
};

/// Scores each object: tanh of the summed hidden/object projections and
/// bias, then a shared linear scoring head. Returns one energy per object
/// slot (masking is applied downstream in attention_weights).
Tensor attention_energies(const Tensor& prev_hidden, const ObjectFrame& frame,
                          const AttentionParams& params);

/// Softmax over the unmasked energies; masked slots get exactly zero weight.
/// An all-masked frame yields all zeros and sets *no_objects when provided.
Tensor attention_weights(const Tensor& energies, const std::vector<bool>& present,
                         bool* no_objects = nullptr);

struct AttendedObjects {
  Tensor weighted;   // objects x object dim, row i scaled by weight i
  Tensor aggregate;  // object dim; sum of the weighted rows
};

/// Applies the weights to the embeddings and sums them into the aggregate
/// descriptor the frame recurrence consumes.
AttendedObjects apply_object_attention(const Tensor& weights, const ObjectFrame& frame);

}  // namespace roar
