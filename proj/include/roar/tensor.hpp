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

#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace roar {

class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {
struct TapeState;
}

/// Dense row-major tensor of 64-bit floats.
///
/// Copies are cheap and share storage; every operation allocates a fresh
/// output and never mutates its inputs. When an operation sees an input that
/// is attached to a live Tape, the result is attached too and the operation
/// is recorded for reverse-mode differentiation. Detached tensors are plain
/// values and evaluate with zero tape overhead.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor scalar(double value);
  static Tensor zeros(std::vector<std::size_t> shape);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const;
  std::size_t rows() const;
  std::size_t cols() const;
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  std::string shape_str() const;

  /// Value of a scalar (size-1) tensor.
  double item() const;
  double at(std::size_t i) const { return (*data_)[i]; }
  double at(std::size_t r, std::size_t c) const;

  const std::vector<double>& values() const { return *data_; }

  /// Direct write access. Callers must not mutate a tensor after it has been
  /// recorded on a live tape; recorded operations keep references to the
  /// current storage.
  std::vector<double>& mutable_values();

  /// Replaces the storage with a fresh buffer and detaches from any tape.
  void assign(std::vector<double> values);

  bool tracked() const;
  int node() const { return node_; }

 private:
  std::vector<std::size_t> shape_{};
  std::shared_ptr<std::vector<double>> data_{};
  std::weak_ptr<detail::TapeState> state_{};
  int node_ = -1;

  friend class Tape;
  friend std::shared_ptr<detail::TapeState> live_state(const Tensor&);
  friend void attach(Tensor&, const std::shared_ptr<detail::TapeState>&, int);
  friend std::shared_ptr<const std::vector<double>> storage(const Tensor&);
};

/// Records an eager forward pass so it can be replayed backwards.
///
/// Creation order of recorded nodes is a topological order of the compute
/// graph, so the backward sweep is a single reverse walk over the node list.
/// One tape serves one training step; tensors attached to a destroyed tape
/// silently fall back to detached (pure value) behaviour.
class Tape {
 public:
  Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Registers a leaf (typically a parameter) so its gradient is retained.
  void watch(Tensor& t);

  /// Runs the reverse sweep from a scalar loss. Throws on a non-scalar or
  /// detached loss. Seeds d(loss)/d(loss) = 1.
  void backward(const Tensor& loss);

  /// Gradient of the last backward() target with respect to t. Zeros if the
  /// loss did not depend on t. Throws if t is not on this tape.
  std::vector<double> gradient(const Tensor& t) const;

  std::size_t node_count() const;

 private:
  std::shared_ptr<detail::TapeState> state_;
};

// ---------------------------------------------------------------------------
// Operations. All are pure; gradients are recorded when any input is tracked.

/// Matrix product of a [m x k] and b [k x n]. Throws ShapeError naming both
/// shapes when the inner extents disagree.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& m);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // element-wise
Tensor scale(const Tensor& a, double c);
Tensor add_const(const Tensor& a, double c);

/// out[i, :] = m[i, :] + row; row may be shaped [n] or [1 x n].
Tensor add_row(const Tensor& m, const Tensor& row);

/// out[i, :] = s[i] * m[i, :].
Tensor rowwise_scale(const Tensor& m, const Tensor& s);

enum class Activation { Tanh, Sigmoid, Relu };
Tensor activation(const Tensor& x, Activation kind);
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor pow_const(const Tensor& x, double exponent);

/// Numerically stabilised softmax along `axis` (max subtraction). Supports
/// rank-1 (axis 0) and rank-2 (axis 0 or 1) tensors.
Tensor softmax(const Tensor& x, std::size_t axis);

/// Softmax over the entries of e whose mask bit is set; masked outputs are
/// exactly zero. An all-false mask yields all zeros (no-objects case).
Tensor masked_softmax(const Tensor& e, const std::vector<bool>& mask);

Tensor sum(const Tensor& x);        // scalar
Tensor mean(const Tensor& x);       // scalar
Tensor vmax(const Tensor& x);       // scalar; gradient routes to first argmax
Tensor row_mean(const Tensor& m);   // [t x h] -> [t]
Tensor row_max(const Tensor& m);    // [t x h] -> [t]

Tensor concat(const Tensor& a, const Tensor& b);      // rank-1 tensors
Tensor pack(const std::vector<Tensor>& parts);        // concat of many
Tensor stack_rows(const Tensor& a, const Tensor& b);  // two [t] -> [2 x t]
Tensor reshape(const Tensor& x, std::vector<std::size_t> shape);
Tensor as_row(const Tensor& v);  // [n] -> [1 x n]
Tensor as_col(const Tensor& v);  // [n] -> [n x 1]

/// Binary cross-entropy of probability p (scalar tensor) against target
/// y in {0,1}; p is clamped to [1e-12, 1-1e-12] before the logs.
Tensor bce(const Tensor& p, double target);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(const Tensor& a, double c) { return scale(a, c); }
inline Tensor operator*(double c, const Tensor& a) { return scale(a, c); }

}  // namespace roar
