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

#include "roar/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace roar {

namespace detail {

struct TapeState {
  struct Node {
    std::size_t size = 0;
    // Accumulates into parent adjoints; null for leaves.
    std::function<void(const std::vector<double>& upstream, TapeState&)> backward;
  };

  std::vector<Node> nodes;
  std::vector<std::vector<double>> adjoints;

  int add_leaf(std::size_t size) {
    nodes.push_back(Node{size, nullptr});
    return static_cast<int>(nodes.size()) - 1;
  }

  int add_node(std::size_t size,
               std::function<void(const std::vector<double>&, TapeState&)> fn) {
    nodes.push_back(Node{size, std::move(fn)});
    return static_cast<int>(nodes.size()) - 1;
  }

  // Lazily sized adjoint buffer for a node.
  std::vector<double>& grad(int node) {
    auto& g = adjoints[static_cast<std::size_t>(node)];
    if (g.empty()) g.assign(nodes[static_cast<std::size_t>(node)].size, 0.0);
    return g;
  }
};

}  // namespace detail

using detail::TapeState;

// --- Tensor ------------------------------------------------------------

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return shape.empty() ? 0 : n;
}

[[noreturn]] void shape_fail(const std::string& msg) { throw ShapeError(msg); }

std::string to_str(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)),
      data_(std::make_shared<std::vector<double>>(shape_product(shape_), 0.0)) {
  for (std::size_t e : shape_)
    if (e == 0) shape_fail("tensor extent must be positive, got shape " + to_str(shape_));
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)),
      data_(std::make_shared<std::vector<double>>(std::move(values))) {
  if (shape_product(shape_) != data_->size())
    shape_fail("value count " + std::to_string(data_->size()) +
               " does not match shape " + to_str(shape_));
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }

std::size_t Tensor::size() const { return data_ ? data_->size() : 0; }

std::size_t Tensor::rows() const {
  if (rank() != 2) shape_fail("rows() on tensor of shape " + shape_str());
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) shape_fail("cols() on tensor of shape " + shape_str());
  return shape_[1];
}

std::string Tensor::shape_str() const { return to_str(shape_); }

double Tensor::item() const {
  if (size() != 1) shape_fail("item() on non-scalar tensor of shape " + shape_str());
  return (*data_)[0];
}

double Tensor::at(std::size_t r, std::size_t c) const {
  return (*data_)[r * shape_[1] + c];
}

std::vector<double>& Tensor::mutable_values() { return *data_; }

void Tensor::assign(std::vector<double> values) {
  if (values.size() != size())
    shape_fail("assign() size " + std::to_string(values.size()) +
               " does not match shape " + shape_str());
  data_ = std::make_shared<std::vector<double>>(std::move(values));
  state_.reset();
  node_ = -1;
}

bool Tensor::tracked() const { return node_ >= 0 && !state_.expired(); }

std::shared_ptr<TapeState> live_state(const Tensor& t) {
  if (t.node_ < 0) return nullptr;
  return t.state_.lock();
}

void attach(Tensor& t, const std::shared_ptr<TapeState>& state, int node) {
  t.state_ = state;
  t.node_ = node;
}

std::shared_ptr<const std::vector<double>> storage(const Tensor& t) { return t.data_; }

// --- Tape --------------------------------------------------------------

Tape::Tape() : state_(std::make_shared<TapeState>()) {}

void Tape::watch(Tensor& t) {
  if (auto st = live_state(t); st == state_) return;  // already on this tape
  attach(t, state_, state_->add_leaf(t.size()));
}

std::size_t Tape::node_count() const { return state_->nodes.size(); }

void Tape::backward(const Tensor& loss) {
  if (loss.size() != 1)
    throw std::invalid_argument("backward: loss must be scalar, got shape " + loss.shape_str());
  auto st = live_state(loss);
  if (st != state_)
    throw std::invalid_argument("backward: loss is detached from this tape");

  state_->adjoints.assign(state_->nodes.size(), {});
  state_->grad(loss.node())[0] = 1.0;
  for (int i = loss.node(); i >= 0; --i) {
    auto& node = state_->nodes[static_cast<std::size_t>(i)];
    auto& adj = state_->adjoints[static_cast<std::size_t>(i)];
    if (!adj.empty() && node.backward) node.backward(adj, *state_);
  }
}

std::vector<double> Tape::gradient(const Tensor& t) const {
  auto st = live_state(t);
  if (st != state_)
    throw std::invalid_argument("gradient: tensor is not on this tape");
  const auto& adj = state_->adjoints[static_cast<std::size_t>(t.node())];
  if (adj.empty()) return std::vector<double>(t.size(), 0.0);
  return adj;
}

// --- Op plumbing ---------------------------------------------------------

namespace {

using Storage = std::shared_ptr<const std::vector<double>>;
using BackFn = std::function<void(const std::vector<double>&, TapeState&)>;

std::shared_ptr<TapeState> joint_state(const Tensor& a, const Tensor& b) {
  auto sa = live_state(a);
  auto sb = live_state(b);
  if (sa && sb && sa != sb)
    throw std::invalid_argument("operation mixes tensors from two live tapes");
  return sa ? sa : sb;
}

void maybe_record(Tensor& out, const std::shared_ptr<TapeState>& st, BackFn fn) {
  if (!st) return;
  int node = st->add_node(out.size(), std::move(fn));
  attach(out, st, node);
}

// Elementwise unary op helper: fn(x) with local derivative dfn evaluated
// from input x and output y.
template <typename F, typename DF>
Tensor unary_op(const Tensor& x, F&& fn, DF&& dlocal) {
  std::vector<double> out(x.size());
  const auto& xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(xv[i]);
  Tensor result(x.shape(), std::move(out));
  if (auto st = live_state(x)) {
    Storage xs = storage(x);
    Storage ys = storage(result);
    int xn = x.node();
    maybe_record(result, st, [xs, ys, xn, dlocal](const std::vector<double>& up, TapeState& s) {
      auto& gx = s.grad(xn);
      for (std::size_t i = 0; i < up.size(); ++i)
        gx[i] += dlocal((*xs)[i], (*ys)[i]) * up[i];
    });
  }
  return result;
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b))
    shape_fail(std::string(op) + ": shapes disagree: " + a.shape_str() + " vs " + b.shape_str());
}

}  // namespace

// --- Linear algebra ------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2)
    shape_fail("matmul: expects rank-2 tensors, got " + a.shape_str() + " x " + b.shape_str());
  if (a.cols() != b.rows())
    shape_fail("matmul: inner extents disagree: " + a.shape_str() + " x " + b.shape_str());

  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> out(m * n, 0.0);
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      const double* brow = &bv[p * n];
      double* orow = &out[i * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  Tensor result({m, n}, std::move(out));
  if (auto st = joint_state(a, b)) {
    Storage as = storage(a), bs = storage(b);
    int an = live_state(a) ? a.node() : -1;
    int bn = live_state(b) ? b.node() : -1;
    maybe_record(result, st, [as, bs, an, bn, m, k, n](const std::vector<double>& up, TapeState& s) {
      if (an >= 0) {
        auto& ga = s.grad(an);  // up . b^T
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            double acc = 0.0;
            const double* urow = &up[i * n];
            const double* brow = &(*bs)[p * n];
            for (std::size_t j = 0; j < n; ++j) acc += urow[j] * brow[j];
            ga[i * k + p] += acc;
          }
      }
      if (bn >= 0) {
        auto& gb = s.grad(bn);  // a^T . up
        for (std::size_t i = 0; i < m; ++i) {
          const double* arow = &(*as)[i * k];
          const double* urow = &up[i * n];
          for (std::size_t p = 0; p < k; ++p) {
            const double aip = arow[p];
            double* grow = &gb[p * n];
            for (std::size_t j = 0; j < n; ++j) grow[j] += aip * urow[j];
          }
        }
      }
    });
  }
  return result;
}

Tensor transpose(const Tensor& m) {
  if (m.rank() != 2) shape_fail("transpose: expects rank-2 tensor, got " + m.shape_str());
  const std::size_t r = m.rows(), c = m.cols();
  std::vector<double> out(r * c);
  const auto& v = m.values();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = v[i * c + j];
  Tensor result({c, r}, std::move(out));
  if (auto st = live_state(m)) {
    int mn = m.node();
    maybe_record(result, st, [mn, r, c](const std::vector<double>& up, TapeState& s) {
      auto& g = s.grad(mn);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) g[i * c + j] += up[j * r + i];
    });
  }
  return result;
}

// --- Pointwise arithmetic ------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) + b.at(i);
  Tensor result(a.shape(), std::move(out));
  if (auto st = joint_state(a, b)) {
    int an = live_state(a) ? a.node() : -1;
    int bn = live_state(b) ? b.node() : -1;
    maybe_record(result, st, [an, bn](const std::vector<double>& up, TapeState& s) {
      if (an >= 0) {
        auto& g = s.grad(an);
        for (std::size_t i = 0; i < up.size(); ++i) g[i] += up[i];
      }
      if (bn >= 0) {
        auto& g = s.grad(bn);
        for (std::size_t i = 0; i < up.size(); ++i) g[i] += up[i];
      }
    });
  }
  return result;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) - b.at(i);
  Tensor result(a.shape(), std::move(out));
  if (auto st = joint_state(a, b)) {
    int an = live_state(a) ? a.node() : -1;
    int bn = live_state(b) ? b.node() : -1;
    maybe_record(result, st, [an, bn](const std::vector<double>& up, TapeState& s) {
      if (an >= 0) {
        auto& g = s.grad(an);
        for (std::size_t i = 0; i < up.size(); ++i) g[i] += up[i];
      }
      if (bn >= 0) {
        auto& g = s.grad(bn);
        for (std::size_t i = 0; i < up.size(); ++i) g[i] -= up[i];
      }
    });
  }
  return result;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) * b.at(i);
  Tensor result(a.shape(), std::move(out));
  if (auto st = joint_state(a, b)) {
    Storage as = storage(a), bs = storage(b);
    int an = live_state(a) ? a.node() : -1;
    int bn = live_state(b) ? b.node() : -1;
    maybe_record(result, st, [as, bs, an, bn](const std::vector<double>& up, TapeState& s) {
      if (an >= 0) {
        auto& g = s.grad(an);
        for (std::size_t i = 0; i < up.size(); ++i) g[i] += (*bs)[i] * up[i];
      }
      if (bn >= 0) {
        auto& g = s.grad(bn);
        for (std::size_t i = 0; i < up.size(); ++i) g[i] += (*as)[i] * up[i];
      }
    });
  }
  return result;
}

Tensor scale(const Tensor& a, double c) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * a.at(i);
  Tensor result(a.shape(), std::move(out));
  if (auto st = live_state(a)) {
    int an = a.node();
    maybe_record(result, st, [an, c](const std::vector<double>& up, TapeState& s) {
      auto& g = s.grad(an);
      for (std::size_t i = 0; i < up.size(); ++i) g[i] += c * up[i];
    });
  }
  return result;
}

Tensor add_const(const Tensor& a, double c) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) + c;
  Tensor result(a.shape(), std::move(out));
  if (auto st = live_state(a)) {
    int an = a.node();
    maybe_record(result, st, [an](const std::vector<double>& up, TapeState& s) {
      auto& g = s.grad(an);
      for (std::size_t i = 0; i < up.size(); ++i) g[i] += up[i];
    });
  }
  return result;
}

Tensor add_row(const Tensor& m, const Tensor& row) {
  if (m.rank() != 2) shape_fail("add_row: matrix must be rank-2, got " + m.shape_str());
  const std::size_t r = m.rows(), c = m.cols();
  if (row.size() != c || row.rank() > 2)
    shape_fail("add_row: row shape " + row.shape_str() + " does not match matrix " + m.shape_str());
  std::vector<double> out(m.size());
  const auto& mv = m.values();
  const auto& rv = row.values();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = mv[i * c + j] + rv[j];
  Tensor result(m.shape(), std::move(out));
  if (auto st = joint_state(m, row)) {
    int mn = live_state(m) ? m.node() : -1;
    int rn = live_state(row) ? row.node() : -1;
    maybe_record(result, st, [mn, rn, r, c](const std::vector<double>& up, TapeState& s) {
      if (mn >= 0) {
        auto& g = s.grad(mn);
        for (std::size_t i = 0; i < up.size(); ++i) g[i] += up[i];
      }
      if (rn >= 0) {
        auto& g = s.grad(rn);
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < c; ++j) g[j] += up[i * c + j];
      }
    });
  }
  return result;
}

Tensor rowwise_scale(const Tensor& m, const Tensor& s_vec) {
  if (m.rank() != 2) shape_fail("rowwise_scale: matrix must be rank-2, got " + m.shape_str());
  const std::size_t r = m.rows(), c = m.cols();
  if (s_vec.size() != r)
    shape_fail("rowwise_scale: scale shape " + s_vec.shape_str() + " does not match matrix " +
               m.shape_str());
  std::vector<double> out(m.size());
  const auto& mv = m.values();
  const auto& sv = s_vec.values();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = sv[i] * mv[i * c + j];
  Tensor result(m.shape(), std::move(out));
  if (auto st = joint_state(m, s_vec)) {
    Storage ms = storage(m), ss = storage(s_vec);
    int mn = live_state(m) ? m.node() : -1;
    int sn = live_state(s_vec) ? s_vec.node() : -1;
    maybe_record(result, st, [ms, ss, mn, sn, r, c](const std::vector<double>& up, TapeState& s) {
      if (mn >= 0) {
        auto& g = s.grad(mn);
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < c; ++j) g[i * c + j] += (*ss)[i] * up[i * c + j];
      }
      if (sn >= 0) {
        auto& g = s.grad(sn);
        for (std::size_t i = 0; i < r; ++i) {
          double acc = 0.0;
          for (std::size_t j = 0; j < c; ++j) acc += (*ms)[i * c + j] * up[i * c + j];
          g[i] += acc;
        }
      }
    });
  }
  return result;
}

// --- Activations and transcendentals --------------------------------------

Tensor tanh(const Tensor& x) {
  return unary_op(
      x, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& x) {
  return unary_op(
      x,
      [](double v) {
        // Split on sign so exp never overflows.
        return v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& x) {
  return unary_op(
      x, [](double v) { return v > 0 ? v : 0.0; },
      [](double v, double) { return v > 0 ? 1.0 : 0.0; });
}

Tensor activation(const Tensor& x, Activation kind) {
  switch (kind) {
    case Activation::Tanh: return tanh(x);
    case Activation::Sigmoid: return sigmoid(x);
    case Activation::Relu: return relu(x);
  }
  throw std::invalid_argument("activation: unknown kind");
}

Tensor exp(const Tensor& x) {
  return unary_op(
      x, [](double v) { return std::exp(v); },
      [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  return unary_op(
      x, [](double v) { return std::log(v); },
      [](double v, double) { return 1.0 / v; });
}

Tensor pow_const(const Tensor& x, double exponent) {
  return unary_op(
      x, [exponent](double v) { return std::pow(v, exponent); },
      [exponent](double v, double) {
        return exponent == 0.0 ? 0.0 : exponent * std::pow(v, exponent - 1.0);
      });
}

// --- Softmax ---------------------------------------------------------------

namespace {

// Softmax of one strided slice; writes outputs in place.
void softmax_slice(const double* x, double* y, std::size_t n, std::size_t stride) {
  double mx = x[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, x[i * stride]);
  double denom = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    y[i * stride] = std::exp(x[i * stride] - mx);
    denom += y[i * stride];
  }
  for (std::size_t i = 0; i < n; ++i) y[i * stride] /= denom;
}

}  // namespace

Tensor softmax(const Tensor& x, std::size_t axis) {
  if (x.rank() == 0 || x.rank() > 2 || axis >= x.rank())
    shape_fail("softmax: invalid axis " + std::to_string(axis) + " for shape " + x.shape_str());

  std::vector<double> out(x.size());
  const auto& xv = x.values();
  std::size_t slices, n, stride, step;
  if (x.rank() == 1) {
    slices = 1;
    n = x.size();
    stride = 1;
    step = 0;
  } else if (axis == 1) {  // along rows
    slices = x.rows();
    n = x.cols();
    stride = 1;
    step = x.cols();
  } else {  // along columns
    slices = x.cols();
    n = x.rows();
    stride = x.cols();
    step = 1;
  }
  for (std::size_t si = 0; si < slices; ++si)
    softmax_slice(&xv[si * step], &out[si * step], n, stride);

  Tensor result(x.shape(), std::move(out));
  if (auto st = live_state(x)) {
    Storage ys = storage(result);
    int xn = x.node();
    maybe_record(result, st,
                 [ys, xn, slices, n, stride, step](const std::vector<double>& up, TapeState& s) {
                   auto& g = s.grad(xn);
                   for (std::size_t si = 0; si < slices; ++si) {
                     const double* y = &(*ys)[si * step];
                     const double* u = &up[si * step];
                     double dot = 0.0;
                     for (std::size_t i = 0; i < n; ++i) dot += y[i * stride] * u[i * stride];
                     double* gd = &g[si * step];
                     for (std::size_t i = 0; i < n; ++i)
                       gd[i * stride] += y[i * stride] * (u[i * stride] - dot);
                   }
                 });
  }
  return result;
}

Tensor masked_softmax(const Tensor& e, const std::vector<bool>& mask) {
  if (e.rank() != 1 || e.size() != mask.size())
    shape_fail("masked_softmax: energies " + e.shape_str() + " vs mask of " +
               std::to_string(mask.size()));
  const std::size_t n = e.size();
  std::vector<double> out(n, 0.0);
  const auto& ev = e.values();

  bool any = false;
  double mx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    mx = any ? std::max(mx, ev[i]) : ev[i];
    any = true;
  }
  if (any) {
    double denom = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!mask[i]) continue;
      out[i] = std::exp(ev[i] - mx);
      denom += out[i];
    }
    for (std::size_t i = 0; i < n; ++i)
      if (mask[i]) out[i] /= denom;
  }

  Tensor result(e.shape(), std::move(out));
  if (auto st = live_state(e)) {
    Storage ys = storage(result);
    int en = e.node();
    maybe_record(result, st, [ys, en, mask, n](const std::vector<double>& up, TapeState& s) {
      auto& g = s.grad(en);
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (mask[i]) dot += (*ys)[i] * up[i];
      for (std::size_t i = 0; i < n; ++i)
        if (mask[i]) g[i] += (*ys)[i] * (up[i] - dot);
    });
  }
  return result;
}

// --- Reductions ------------------------------------------------------------

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x.at(i);
  Tensor result = Tensor::scalar(acc);
  if (auto st = live_state(x)) {
    int xn = x.node();
    std::size_t n = x.size();
    maybe_record(result, st, [xn, n](const std::vector<double>& up, TapeState& s) {
      auto& g = s.grad(xn);
      for (std::size_t i = 0; i < n; ++i) g[i] += up[0];
    });
  }
  return result;
}

Tensor mean(const Tensor& x) {
  const double inv = 1.0 / static_cast<double>(x.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x.at(i);
  Tensor result = Tensor::scalar(acc * inv);
  if (auto st = live_state(x)) {
    int xn = x.node();
    std::size_t n = x.size();
    maybe_record(result, st, [xn, n, inv](const std::vector<double>& up, TapeState& s) {
      auto& g = s.grad(xn);
      for (std::size_t i = 0; i < n; ++i) g[i] += inv * up[0];
    });
  }
  return result;
}

Tensor vmax(const Tensor& x) {
  if (x.size() == 0) shape_fail("vmax: empty tensor");
  std::size_t arg = 0;
  for (std::size_t i = 1; i < x.size(); ++i)
    if (x.at(i) > x.at(arg)) arg = i;
  Tensor result = Tensor::scalar(x.at(arg));
  if (auto st = live_state(x)) {
    int xn = x.node();
    maybe_record(result, st, [xn, arg](const std::vector<double>& up, TapeState& s) {
      s.grad(xn)[arg] += up[0];
    });
  }
  return result;
}

Tensor row_mean(const Tensor& m) {
  if (m.rank() != 2) shape_fail("row_mean: expects rank-2 tensor, got " + m.shape_str());
  const std::size_t r = m.rows(), c = m.cols();
  const double inv = 1.0 / static_cast<double>(c);
  std::vector<double> out(r, 0.0);
  const auto& mv = m.values();
  for (std::size_t i = 0; i < r; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < c; ++j) acc += mv[i * c + j];
    out[i] = acc * inv;
  }
  Tensor result({r}, std::move(out));
  if (auto st = live_state(m)) {
    int mn = m.node();
    maybe_record(result, st, [mn, r, c, inv](const std::vector<double>& up, TapeState& s) {
      auto& g = s.grad(mn);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) g[i * c + j] += inv * up[i];
    });
  }
  return result;
}

Tensor row_max(const Tensor& m) {
  if (m.rank() != 2) shape_fail("row_max: expects rank-2 tensor, got " + m.shape_str());
  const std::size_t r = m.rows(), c = m.cols();
  std::vector<double> out(r);
  std::vector<std::size_t> args(r, 0);
  const auto& mv = m.values();
  for (std::size_t i = 0; i < r; ++i) {
    std::size_t arg = 0;
    for (std::size_t j = 1; j < c; ++j)
      if (mv[i * c + j] > mv[i * c + arg]) arg = j;
    args[i] = arg;
    out[i] = mv[i * c + arg];
  }
  Tensor result({r}, std::move(out));
  if (auto st = live_state(m)) {
    int mn = m.node();
    maybe_record(result, st, [mn, c, args](const std::vector<double>& up, TapeState& s) {
      auto& g = s.grad(mn);
      for (std::size_t i = 0; i < up.size(); ++i) g[i * c + args[i]] += up[i];
    });
  }
  return result;
}

// --- Structure -------------------------------------------------------------

Tensor concat(const Tensor& a, const Tensor& b) { return pack({a, b}); }

Tensor pack(const std::vector<Tensor>& parts) {
  if (parts.empty()) shape_fail("pack: no parts");
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  std::vector<double> out;
  out.reserve(total);
  for (const auto& p : parts)
    out.insert(out.end(), p.values().begin(), p.values().end());
  Tensor result({total}, std::move(out));

  std::shared_ptr<TapeState> st;
  for (const auto& p : parts) {
    auto ps = live_state(p);
    if (ps && st && ps != st)
      throw std::invalid_argument("pack: parts from two live tapes");
    if (ps) st = ps;
  }
  if (st) {
    struct Piece {
      int node;
      std::size_t offset, size;
    };
    std::vector<Piece> pieces;
    std::size_t off = 0;
    for (const auto& p : parts) {
      if (live_state(p)) pieces.push_back({p.node(), off, p.size()});
      off += p.size();
    }
    maybe_record(result, st, [pieces](const std::vector<double>& up, TapeState& s) {
      for (const auto& pc : pieces) {
        auto& g = s.grad(pc.node);
        for (std::size_t i = 0; i < pc.size; ++i) g[i] += up[pc.offset + i];
      }
    });
  }
  return result;
}

Tensor stack_rows(const Tensor& a, const Tensor& b) {
  if (a.rank() != 1 || b.rank() != 1 || a.size() != b.size())
    shape_fail("stack_rows: expects two equal-length vectors, got " + a.shape_str() + " and " +
               b.shape_str());
  Tensor flat = pack({a, b});
  return reshape(flat, {2, a.size()});
}

Tensor reshape(const Tensor& x, std::vector<std::size_t> shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  if (shape.empty() || n != x.size())
    shape_fail("reshape: cannot view " + x.shape_str() + " as " + to_str(shape));
  Tensor result(std::move(shape), x.values());
  if (auto st = live_state(x)) {
    int xn = x.node();
    maybe_record(result, st, [xn](const std::vector<double>& up, TapeState& s) {
      auto& g = s.grad(xn);
      for (std::size_t i = 0; i < up.size(); ++i) g[i] += up[i];
    });
  }
  return result;
}

Tensor as_row(const Tensor& v) { return reshape(v, {1, v.size()}); }
Tensor as_col(const Tensor& v) { return reshape(v, {v.size(), 1}); }

// --- Losses ----------------------------------------------------------------

Tensor bce(const Tensor& p, double target) {
  if (p.size() != 1) shape_fail("bce: probability must be scalar, got " + p.shape_str());
  if (target != 0.0 && target != 1.0)
    throw std::invalid_argument("bce: target must be 0 or 1");
  constexpr double kEps = 1e-12;
  const double pc = std::clamp(p.item(), kEps, 1.0 - kEps);
  const double value = -(target * std::log(pc) + (1.0 - target) * std::log(1.0 - pc));
  Tensor result = Tensor::scalar(value);
  if (auto st = live_state(p)) {
    int pn = p.node();
    maybe_record(result, st, [pn, pc, target](const std::vector<double>& up, TapeState& s) {
      s.grad(pn)[0] += (pc - target) / (pc * (1.0 - pc)) * up[0];
    });
  }
  return result;
}

}  // namespace roar
