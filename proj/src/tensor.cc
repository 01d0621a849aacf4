// s2t/tensor.cc

// Copyright 2026  The s2t Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "s2t/tensor.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace s2t {

namespace {

std::atomic<uint64_t> g_next_id{1};
thread_local bool g_autograd_enabled = true;

const double kMaskValue = -1e30;

std::string ShapeStr(const std::vector<int64_t>& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

int64_t NumelOf(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    if (d <= 0) throw std::invalid_argument("tensor dimension must be positive, got shape " + ShapeStr(shape));
    n *= d;
  }
  return n;
}

std::shared_ptr<TensorNode> NewNode(std::vector<int64_t> shape) {
  auto node = std::make_shared<TensorNode>();
  node->value.assign(static_cast<size_t>(NumelOf(shape)), 0.0);
  node->shape = std::move(shape);
  node->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  return node;
}

void CheckSameShape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                ShapeStr(a.shape()) + " vs " +
                                ShapeStr(b.shape()));
  }
}

void Check2d(const char* op, const Tensor& a) {
  if (a.rank() != 2) {
    throw std::invalid_argument(std::string(op) + ": expected rank-2 tensor, got " + ShapeStr(a.shape()));
  }
}

}  // namespace

Tensor MakeTensor(std::shared_ptr<TensorNode> node) {
  return Tensor(std::move(node));
}

std::vector<double>& TensorNode::grad_buffer() {
  if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  return grad;
}

NoGradGuard::NoGradGuard() : prev_(g_autograd_enabled) {
  g_autograd_enabled = false;
}
NoGradGuard::~NoGradGuard() { g_autograd_enabled = prev_; }

bool autograd_enabled() { return g_autograd_enabled; }

// ---------------------------------------------------------------------------
// Tensor basics

Tensor Tensor::Zeros(std::vector<int64_t> shape, bool requires_grad) {
  auto node = NewNode(std::move(shape));
  node->requires_grad = requires_grad;
  return MakeTensor(std::move(node));
}

Tensor Tensor::Full(std::vector<int64_t> shape, double value, bool requires_grad) {
  auto node = NewNode(std::move(shape));
  std::fill(node->value.begin(), node->value.end(), value);
  node->requires_grad = requires_grad;
  return MakeTensor(std::move(node));
}

Tensor Tensor::FromData(std::vector<int64_t> shape, std::vector<double> data,
                        bool requires_grad) {
  const int64_t n = NumelOf(shape);
  if (n != static_cast<int64_t>(data.size())) {
    throw std::invalid_argument("FromData: shape " + ShapeStr(shape) + " wants " +
                                std::to_string(n) + " values, got " +
                                std::to_string(data.size()));
  }
  auto node = NewNode(std::move(shape));
  node->value = std::move(data);
  node->requires_grad = requires_grad;
  return MakeTensor(std::move(node));
}

Tensor Tensor::Scalar(double value, bool requires_grad) {
  return FromData({}, {value}, requires_grad);
}

Tensor Tensor::Randn(std::vector<int64_t> shape, Rng* rng, double stddev,
                     bool requires_grad) {
  auto node = NewNode(std::move(shape));
  for (double& v : node->value) v = rng->Normal(0.0, stddev);
  node->requires_grad = requires_grad;
  return MakeTensor(std::move(node));
}

Tensor Tensor::RandUniform(std::vector<int64_t> shape, Rng* rng, double lo,
                           double hi, bool requires_grad) {
  auto node = NewNode(std::move(shape));
  for (double& v : node->value) v = rng->Uniform(lo, hi);
  node->requires_grad = requires_grad;
  return MakeTensor(std::move(node));
}

const std::vector<int64_t>& Tensor::shape() const { return node_->shape; }
int Tensor::rank() const { return static_cast<int>(node_->shape.size()); }
int64_t Tensor::dim(int i) const { return node_->shape.at(i); }
int64_t Tensor::numel() const { return node_->numel(); }
const std::vector<double>& Tensor::data() const { return node_->value; }
std::vector<double>& Tensor::mutable_data() { return node_->value; }
bool Tensor::requires_grad() const { return node_->requires_grad; }
void Tensor::set_requires_grad(bool value) { node_->requires_grad = value; }

const std::vector<double>& Tensor::grad() const {
  return node_->grad_buffer();
}
std::vector<double>& Tensor::mutable_grad() { return node_->grad_buffer(); }
bool Tensor::grad_allocated() const { return !node_->grad.empty(); }

void Tensor::ZeroGrad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

double Tensor::item() const {
  if (numel() != 1) {
    throw std::invalid_argument("item(): tensor has " + std::to_string(numel()) + " elements");
  }
  return node_->value[0];
}

double Tensor::at(std::initializer_list<int64_t> idx) const {
  if (static_cast<int>(idx.size()) != rank()) {
    throw std::invalid_argument("at(): index rank mismatch");
  }
  int64_t flat = 0;
  int i = 0;
  for (int64_t v : idx) {
    flat = flat * node_->shape[i] + v;
    ++i;
  }
  return node_->value[static_cast<size_t>(flat)];
}

void Tensor::Backward() const {
  if (!defined()) throw std::invalid_argument("Backward(): undefined tensor");
  if (numel() != 1) {
    throw std::invalid_argument("Backward(): loss must be a scalar, got shape " + ShapeStr(shape()));
  }
  // Collect the reachable graph.
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> seen;
  std::vector<TensorNode*> stack{node_.get()};
  seen.insert(node_.get());
  while (!stack.empty()) {
    TensorNode* n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (const auto& p : n->parents) {
      if (seen.insert(p.get()).second) stack.push_back(p.get());
    }
  }
  std::sort(order.begin(), order.end(),
            [](TensorNode* a, TensorNode* b) { return a->id > b->id; });
  // Interior grads are scratch space for this pass; only leaves accumulate
  // across Backward() calls. Allocation (not just zeroing) is required:
  // an op whose gradient vanishes may legitimately skip writing to its
  // parents, and those parents' own backward functions still read their
  // incoming grad buffers.
  for (TensorNode* n : order) {
    if (n->backward_fn) {
      if (n->grad.size() != n->value.size()) {
        n->grad.assign(n->value.size(), 0.0);
      } else {
        std::fill(n->grad.begin(), n->grad.end(), 0.0);
      }
    }
  }
  node_->grad_buffer()[0] += 1.0;
  for (TensorNode* n : order) {
    if (n->backward_fn && n->requires_grad) n->backward_fn(*n);
  }
}

// ---------------------------------------------------------------------------
// Op plumbing

namespace {

// Builds the output node, wires parents and the backward function when
// recording is active.
Tensor MakeOp(std::vector<int64_t> shape,
              std::vector<std::shared_ptr<TensorNode>> parents,
              std::function<void(TensorNode&)> backward_fn) {
  auto node = NewNode(std::move(shape));
  bool needs_grad = false;
  for (const auto& p : parents) needs_grad = needs_grad || p->requires_grad;
  if (g_autograd_enabled && needs_grad) {
    node->requires_grad = true;
    node->parents = std::move(parents);
    node->backward_fn = std::move(backward_fn);
  }
  return MakeTensor(std::move(node));
}

}  // namespace

// ---------------------------------------------------------------------------
// Elementwise

Tensor Add(const Tensor& a, const Tensor& b) {
  CheckSameShape("Add", a, b);
  auto pa = a.shared_node();
  auto pb = b.shared_node();
  Tensor out = MakeOp(a.shape(), {pa, pb}, [pa, pb](TensorNode& n) {
    if (pa->requires_grad) {
      auto& g = pa->grad_buffer();
      for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
    if (pb->requires_grad) {
      auto& g = pb->grad_buffer();
      for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
  });
  auto& o = out.mutable_data();
  const auto& x = pa->value;
  const auto& y = pb->value;
  for (size_t i = 0; i < o.size(); ++i) o[i] = x[i] + y[i];
  return out;
}

Tensor Sub(const Tensor& a, const Tensor& b) {
  CheckSameShape("Sub", a, b);
  auto pa = a.shared_node();
  auto pb = b.shared_node();
  Tensor out = MakeOp(a.shape(), {pa, pb}, [pa, pb](TensorNode& n) {
    if (pa->requires_grad) {
      auto& g = pa->grad_buffer();
      for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
    if (pb->requires_grad) {
      auto& g = pb->grad_buffer();
      for (size_t i = 0; i < g.size(); ++i) g[i] -= n.grad[i];
    }
  });
  auto& o = out.mutable_data();
  const auto& x = pa->value;
  const auto& y = pb->value;
  for (size_t i = 0; i < o.size(); ++i) o[i] = x[i] - y[i];
  return out;
}

Tensor Mul(const Tensor& a, const Tensor& b) {
  CheckSameShape("Mul", a, b);
  auto pa = a.shared_node();
  auto pb = b.shared_node();
  Tensor out = MakeOp(a.shape(), {pa, pb}, [pa, pb](TensorNode& n) {
    if (pa->requires_grad) {
      auto& g = pa->grad_buffer();
      for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * pb->value[i];
    }
    if (pb->requires_grad) {
      auto& g = pb->grad_buffer();
      for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * pa->value[i];
    }
  });
  auto& o = out.mutable_data();
  const auto& x = pa->value;
  const auto& y = pb->value;
  for (size_t i = 0; i < o.size(); ++i) o[i] = x[i] * y[i];
  return out;
}

Tensor Scale(const Tensor& a, double c) {
  auto pa = a.shared_node();
  Tensor out = MakeOp(a.shape(), {pa}, [pa, c](TensorNode& n) {
    auto& g = pa->grad_buffer();
    for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * c;
  });
  auto& o = out.mutable_data();
  for (size_t i = 0; i < o.size(); ++i) o[i] = pa->value[i] * c;
  return out;
}

Tensor AddScalar(const Tensor& a, double c) {
  auto pa = a.shared_node();
  Tensor out = MakeOp(a.shape(), {pa}, [pa](TensorNode& n) {
    auto& g = pa->grad_buffer();
    for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
  });
  auto& o = out.mutable_data();
  for (size_t i = 0; i < o.size(); ++i) o[i] = pa->value[i] + c;
  return out;
}

Tensor Neg(const Tensor& a) { return Scale(a, -1.0); }

Tensor Relu(const Tensor& a) {
  auto pa = a.shared_node();
  Tensor out = MakeOp(a.shape(), {pa}, [pa](TensorNode& n) {
    auto& g = pa->grad_buffer();
    for (size_t i = 0; i < g.size(); ++i) {
      if (pa->value[i] > 0.0) g[i] += n.grad[i];
    }
  });
  auto& o = out.mutable_data();
  for (size_t i = 0; i < o.size(); ++i) o[i] = pa->value[i] > 0.0 ? pa->value[i] : 0.0;
  return out;
}

Tensor Gelu(const Tensor& a) {
  auto pa = a.shared_node();
  Tensor out = MakeOp(a.shape(), {pa}, [pa](TensorNode& n) {
    auto& g = pa->grad_buffer();
    const double inv_sqrt2 = 0.7071067811865475244;
    const double inv_sqrt2pi = 0.3989422804014326779;
    for (size_t i = 0; i < g.size(); ++i) {
      const double x = pa->value[i];
      const double cdf = 0.5 * (1.0 + std::erf(x * inv_sqrt2));
      const double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
      g[i] += n.grad[i] * (cdf + x * pdf);
    }
  });
  auto& o = out.mutable_data();
  const double inv_sqrt2 = 0.7071067811865475244;
  for (size_t i = 0; i < o.size(); ++i) {
    const double x = pa->value[i];
    o[i] = x * 0.5 * (1.0 + std::erf(x * inv_sqrt2));
  }
  return out;
}

Tensor Sqrt(const Tensor& a) {
  auto pa = a.shared_node();
  Tensor out = MakeOp(a.shape(), {pa}, [pa](TensorNode& n) {
    auto& g = pa->grad_buffer();
    for (size_t i = 0; i < g.size(); ++i) {
      const double s = std::sqrt(std::max(pa->value[i], 0.0));
      g[i] += n.grad[i] * 0.5 / std::max(s, 1e-12);
    }
  });
  auto& o = out.mutable_data();
  for (size_t i = 0; i < o.size(); ++i) o[i] = std::sqrt(std::max(pa->value[i], 0.0));
  return out;
}

Tensor Detach(const Tensor& a) {
  auto node = NewNode(a.shape());
  node->value = a.data();
  return MakeTensor(std::move(node));
}

// ---------------------------------------------------------------------------
// Linear algebra

namespace {

// C(m×n) += A(m×k) * B(k×n); row-major ikj order so inner loops stream.
void GemmAcc(const double* a, const double* b, double* c, int64_t m, int64_t k,
             int64_t n) {
  for (int64_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (int64_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C(m×n) += A(k×m)^T * B(k×n)
void GemmAccTA(const double* a, const double* b, double* c, int64_t k,
               int64_t m, int64_t n) {
  for (int64_t p = 0; p < k; ++p) {
    const double* arow = a + p * m;
    const double* brow = b + p * n;
    for (int64_t i = 0; i < m; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* crow = c + i * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C(m×n) += A(m×k) * B(n×k)^T
void GemmAccTB(const double* a, const double* b, double* c, int64_t m,
               int64_t k, int64_t n) {
  for (int64_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (int64_t j = 0; j < n; ++j) {
      const double* brow = b + j * k;
      double acc = 0.0;
      for (int64_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] += acc;
    }
  }
}

}  // namespace

Tensor MatMul(const Tensor& a, const Tensor& b) {
  Check2d("MatMul", a);
  Check2d("MatMul", b);
  if (a.dim(1) != b.dim(0)) {
    throw std::invalid_argument("MatMul: inner dims differ, " + ShapeStr(a.shape()) + " x " + ShapeStr(b.shape()));
  }
  const int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  auto pa = a.shared_node();
  auto pb = b.shared_node();
  Tensor out = MakeOp({m, n}, {pa, pb}, [pa, pb, m, k, n](TensorNode& node) {
    if (pa->requires_grad) {
      GemmAccTB(node.grad.data(), pb->value.data(), pa->grad_buffer().data(), m, n, k);
    }
    if (pb->requires_grad) {
      GemmAccTA(pa->value.data(), node.grad.data(), pb->grad_buffer().data(), m, k, n);
    }
  });
  GemmAcc(pa->value.data(), pb->value.data(), out.mutable_data().data(), m, k, n);
  return out;
}

Tensor Transpose(const Tensor& a) {
  Check2d("Transpose", a);
  const int64_t m = a.dim(0), n = a.dim(1);
  auto pa = a.shared_node();
  Tensor out = MakeOp({n, m}, {pa}, [pa, m, n](TensorNode& node) {
    auto& g = pa->grad_buffer();
    for (int64_t i = 0; i < m; ++i)
      for (int64_t j = 0; j < n; ++j) g[i * n + j] += node.grad[j * m + i];
  });
  auto& o = out.mutable_data();
  const auto& x = pa->value;
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j) o[j * m + i] = x[i * n + j];
  return out;
}

Tensor Affine(const Tensor& x, const Tensor& w, const Tensor& b) {
  Check2d("Affine", x);
  Check2d("Affine", w);
  if (x.dim(1) != w.dim(0) || b.rank() != 1 || b.dim(0) != w.dim(1)) {
    throw std::invalid_argument("Affine: incompatible shapes x" + ShapeStr(x.shape()) + " w" + ShapeStr(w.shape()) + " b" + ShapeStr(b.shape()));
  }
  const int64_t t = x.dim(0), in = x.dim(1), out_dim = w.dim(1);
  auto px = x.shared_node();
  auto pw = w.shared_node();
  auto pb = b.shared_node();
  Tensor out = MakeOp({t, out_dim}, {px, pw, pb},
                      [px, pw, pb, t, in, out_dim](TensorNode& node) {
    if (px->requires_grad) {
      GemmAccTB(node.grad.data(), pw->value.data(), px->grad_buffer().data(), t, out_dim, in);
    }
    if (pw->requires_grad) {
      GemmAccTA(px->value.data(), node.grad.data(), pw->grad_buffer().data(), t, in, out_dim);
    }
    if (pb->requires_grad) {
      auto& g = pb->grad_buffer();
      for (int64_t i = 0; i < t; ++i) {
        const double* grow = node.grad.data() + i * out_dim;
        for (int64_t j = 0; j < out_dim; ++j) g[j] += grow[j];
      }
    }
  });
  auto& o = out.mutable_data();
  for (int64_t i = 0; i < t; ++i) {
    double* orow = o.data() + i * out_dim;
    for (int64_t j = 0; j < out_dim; ++j) orow[j] = pb->value[j];
  }
  GemmAcc(px->value.data(), pw->value.data(), o.data(), t, in, out_dim);
  return out;
}

// ---------------------------------------------------------------------------
// Shape ops

Tensor Reshape(const Tensor& a, std::vector<int64_t> shape) {
  if (NumelOf(shape) != a.numel()) {
    throw std::invalid_argument("Reshape: cannot view " + ShapeStr(a.shape()) +
                                " as " + ShapeStr(shape));
  }
  auto pa = a.shared_node();
  Tensor out = MakeOp(std::move(shape), {pa}, [pa](TensorNode& node) {
    auto& g = pa->grad_buffer();
    for (size_t i = 0; i < g.size(); ++i) g[i] += node.grad[i];
  });
  out.mutable_data() = pa->value;
  return out;
}

Tensor SliceCols(const Tensor& a, int64_t start, int64_t len) {
  Check2d("SliceCols", a);
  const int64_t rows = a.dim(0), cols = a.dim(1);
  if (start < 0 || len <= 0 || start + len > cols) {
    throw std::invalid_argument("SliceCols: range [" + std::to_string(start) + ", " + std::to_string(start + len) + ") out of " + std::to_string(cols) + " columns");
  }
  auto pa = a.shared_node();
  Tensor out = MakeOp({rows, len}, {pa}, [pa, start, len, rows, cols](TensorNode& node) {
    auto& g = pa->grad_buffer();
    for (int64_t i = 0; i < rows; ++i)
      for (int64_t j = 0; j < len; ++j) g[i * cols + start + j] += node.grad[i * len + j];
  });
  auto& o = out.mutable_data();
  const auto& x = pa->value;
  for (int64_t i = 0; i < rows; ++i)
    for (int64_t j = 0; j < len; ++j) o[i * len + j] = x[i * cols + start + j];
  return out;
}

Tensor SliceRows(const Tensor& a, int64_t start, int64_t len) {
  Check2d("SliceRows", a);
  const int64_t rows = a.dim(0), cols = a.dim(1);
  if (start < 0 || len <= 0 || start + len > rows) {
    throw std::invalid_argument("SliceRows: range [" + std::to_string(start) + ", " + std::to_string(start + len) + ") out of " + std::to_string(rows) + " rows");
  }
  auto pa = a.shared_node();
  Tensor out = MakeOp({len, cols}, {pa}, [pa, start, len, cols](TensorNode& node) {
    auto& g = pa->grad_buffer();
    for (int64_t i = 0; i < len; ++i)
      for (int64_t j = 0; j < cols; ++j) g[(start + i) * cols + j] += node.grad[i * cols + j];
  });
  auto& o = out.mutable_data();
  const auto& x = pa->value;
  std::copy(x.begin() + start * cols, x.begin() + (start + len) * cols, o.begin());
  return out;
}

Tensor ConcatCols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("ConcatCols: no parts");
  const int64_t rows = parts[0].dim(0);
  int64_t total = 0;
  std::vector<std::shared_ptr<TensorNode>> parents;
  for (const auto& p : parts) {
    Check2d("ConcatCols", p);
    if (p.dim(0) != rows) throw std::invalid_argument("ConcatCols: row mismatch");
    total += p.dim(1);
    parents.push_back(p.shared_node());
  }
  auto parents_copy = parents;
  Tensor out = MakeOp({rows, total}, std::move(parents),
                      [parents_copy, rows, total](TensorNode& node) {
    int64_t off = 0;
    for (const auto& p : parents_copy) {
      const int64_t w = p->shape[1];
      if (p->requires_grad) {
        auto& g = p->grad_buffer();
        for (int64_t i = 0; i < rows; ++i)
          for (int64_t j = 0; j < w; ++j) g[i * w + j] += node.grad[i * total + off + j];
      }
      off += w;
    }
  });
  auto& o = out.mutable_data();
  int64_t off = 0;
  for (const auto& p : parts) {
    const int64_t w = p.dim(1);
    const auto& x = p.data();
    for (int64_t i = 0; i < rows; ++i)
      for (int64_t j = 0; j < w; ++j) o[i * total + off + j] = x[i * w + j];
    off += w;
  }
  return out;
}

Tensor ConcatRows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("ConcatRows: no parts");
  const int64_t cols = parts[0].dim(1);
  int64_t total = 0;
  std::vector<std::shared_ptr<TensorNode>> parents;
  for (const auto& p : parts) {
    Check2d("ConcatRows", p);
    if (p.dim(1) != cols) throw std::invalid_argument("ConcatRows: column mismatch");
    total += p.dim(0);
    parents.push_back(p.shared_node());
  }
  auto parents_copy = parents;
  Tensor out = MakeOp({total, cols}, std::move(parents),
                      [parents_copy, cols](TensorNode& node) {
    int64_t off = 0;
    for (const auto& p : parents_copy) {
      const int64_t rows = p->shape[0];
      if (p->requires_grad) {
        auto& g = p->grad_buffer();
        for (int64_t i = 0; i < rows * cols; ++i) g[i] += node.grad[off * cols + i];
      }
      off += rows;
    }
  });
  auto& o = out.mutable_data();
  int64_t off = 0;
  for (const auto& p : parts) {
    const auto& x = p.data();
    std::copy(x.begin(), x.end(), o.begin() + off);
    off += static_cast<int64_t>(x.size());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reductions

Tensor Sum(const Tensor& a) {
  auto pa = a.shared_node();
  Tensor out = MakeOp({}, {pa}, [pa](TensorNode& node) {
    auto& g = pa->grad_buffer();
    const double gy = node.grad[0];
    for (double& v : g) v += gy;
  });
  double acc = 0.0;
  for (double v : pa->value) acc += v;
  out.mutable_data()[0] = acc;
  return out;
}

Tensor Mean(const Tensor& a) {
  const double inv = 1.0 / static_cast<double>(a.numel());
  auto pa = a.shared_node();
  Tensor out = MakeOp({}, {pa}, [pa, inv](TensorNode& node) {
    auto& g = pa->grad_buffer();
    const double gy = node.grad[0] * inv;
    for (double& v : g) v += gy;
  });
  double acc = 0.0;
  for (double v : pa->value) acc += v;
  out.mutable_data()[0] = acc * inv;
  return out;
}

// ---------------------------------------------------------------------------
// Softmax family

Tensor SoftmaxRows(const Tensor& a) {
  Check2d("SoftmaxRows", a);
  const int64_t rows = a.dim(0), cols = a.dim(1);
  auto pa = a.shared_node();
  Tensor out = MakeOp(a.shape(), {pa}, [pa, rows, cols](TensorNode& node) {
    auto& g = pa->grad_buffer();
    for (int64_t i = 0; i < rows; ++i) {
      const double* y = node.value.data() + i * cols;
      const double* gy = node.grad.data() + i * cols;
      double dot = 0.0;
      for (int64_t j = 0; j < cols; ++j) dot += gy[j] * y[j];
      double* gx = g.data() + i * cols;
      for (int64_t j = 0; j < cols; ++j) gx[j] += y[j] * (gy[j] - dot);
    }
  });
  auto& o = out.mutable_data();
  for (int64_t i = 0; i < rows; ++i) {
    const double* x = pa->value.data() + i * cols;
    double* y = o.data() + i * cols;
    double mx = x[0];
    for (int64_t j = 1; j < cols; ++j) mx = std::max(mx, x[j]);
    double denom = 0.0;
    for (int64_t j = 0; j < cols; ++j) {
      y[j] = std::exp(x[j] - mx);
      denom += y[j];
    }
    const double inv = 1.0 / denom;
    for (int64_t j = 0; j < cols; ++j) y[j] *= inv;
  }
  return out;
}

Tensor LogSoftmaxRows(const Tensor& a) {
  Check2d("LogSoftmaxRows", a);
  const int64_t rows = a.dim(0), cols = a.dim(1);
  auto pa = a.shared_node();
  Tensor out = MakeOp(a.shape(), {pa, }, [pa, rows, cols](TensorNode& node) {
    auto& g = pa->grad_buffer();
    for (int64_t i = 0; i < rows; ++i) {
      const double* y = node.value.data() + i * cols;
      const double* gy = node.grad.data() + i * cols;
      double gsum = 0.0;
      for (int64_t j = 0; j < cols; ++j) gsum += gy[j];
      double* gx = g.data() + i * cols;
      for (int64_t j = 0; j < cols; ++j) gx[j] += gy[j] - std::exp(y[j]) * gsum;
    }
  });
  auto& o = out.mutable_data();
  for (int64_t i = 0; i < rows; ++i) {
    const double* x = pa->value.data() + i * cols;
    double* y = o.data() + i * cols;
    double mx = x[0];
    for (int64_t j = 1; j < cols; ++j) mx = std::max(mx, x[j]);
    double denom = 0.0;
    for (int64_t j = 0; j < cols; ++j) denom += std::exp(x[j] - mx);
    const double lse = mx + std::log(denom);
    for (int64_t j = 0; j < cols; ++j) y[j] = x[j] - lse;
  }
  return out;
}

Tensor CausalMask(const Tensor& scores) {
  Check2d("CausalMask", scores);
  const int64_t rows = scores.dim(0), cols = scores.dim(1);
  auto pa = scores.shared_node();
  Tensor out = MakeOp(scores.shape(), {pa}, [pa](TensorNode& node) {
    auto& g = pa->grad_buffer();
    for (size_t i = 0; i < g.size(); ++i) g[i] += node.grad[i];
  });
  auto& o = out.mutable_data();
  const auto& x = pa->value;
  for (int64_t i = 0; i < rows; ++i)
    for (int64_t j = 0; j < cols; ++j)
      o[i * cols + j] = j > i ? x[i * cols + j] + kMaskValue : x[i * cols + j];
  return out;
}

// ---------------------------------------------------------------------------
// LayerNorm

Tensor LayerNorm(const Tensor& x, const Tensor& gain, const Tensor& shift,
                 double epsilon) {
  if (x.rank() < 1) throw std::invalid_argument("LayerNorm: rank-0 input");
  const int64_t dim = x.shape().back();
  if (gain.rank() != 1 || gain.dim(0) != dim || shift.rank() != 1 || shift.dim(0) != dim) {
    throw std::invalid_argument("LayerNorm: gain/shift length must equal last axis (" + std::to_string(dim) + "), got gain" + ShapeStr(gain.shape()) + " shift" + ShapeStr(shift.shape()));
  }
  const int64_t rows = x.numel() / dim;
  auto px = x.shared_node();
  auto pg = gain.shared_node();
  auto ps = shift.shared_node();
  Tensor out = MakeOp(x.shape(), {px, pg, ps},
                      [px, pg, ps, rows, dim, epsilon](TensorNode& node) {
    std::vector<double> xhat(static_cast<size_t>(dim));
    for (int64_t i = 0; i < rows; ++i) {
      const double* xr = px->value.data() + i * dim;
      const double* gy = node.grad.data() + i * dim;
      double mean = 0.0;
      for (int64_t j = 0; j < dim; ++j) mean += xr[j];
      mean /= static_cast<double>(dim);
      double var = 0.0;
      for (int64_t j = 0; j < dim; ++j) var += (xr[j] - mean) * (xr[j] - mean);
      var /= static_cast<double>(dim);
      const double inv_std = 1.0 / std::sqrt(var + epsilon);
      for (int64_t j = 0; j < dim; ++j) xhat[j] = (xr[j] - mean) * inv_std;
      if (pg->requires_grad) {
        auto& gg = pg->grad_buffer();
        for (int64_t j = 0; j < dim; ++j) gg[j] += gy[j] * xhat[j];
      }
      if (ps->requires_grad) {
        auto& gs = ps->grad_buffer();
        for (int64_t j = 0; j < dim; ++j) gs[j] += gy[j];
      }
      if (px->requires_grad) {
        double m1 = 0.0, m2 = 0.0;
        for (int64_t j = 0; j < dim; ++j) {
          const double dxh = gy[j] * pg->value[j];
          m1 += dxh;
          m2 += dxh * xhat[j];
        }
        m1 /= static_cast<double>(dim);
        m2 /= static_cast<double>(dim);
        auto& gx = px->grad_buffer();
        for (int64_t j = 0; j < dim; ++j) {
          const double dxh = gy[j] * pg->value[j];
          gx[i * dim + j] += inv_std * (dxh - m1 - xhat[j] * m2);
        }
      }
    }
  });
  auto& o = out.mutable_data();
  for (int64_t i = 0; i < rows; ++i) {
    const double* xr = px->value.data() + i * dim;
    double* yr = o.data() + i * dim;
    double mean = 0.0;
    for (int64_t j = 0; j < dim; ++j) mean += xr[j];
    mean /= static_cast<double>(dim);
    double var = 0.0;
    for (int64_t j = 0; j < dim; ++j) var += (xr[j] - mean) * (xr[j] - mean);
    var /= static_cast<double>(dim);
    const double inv_std = 1.0 / std::sqrt(var + epsilon);
    for (int64_t j = 0; j < dim; ++j) {
      yr[j] = (xr[j] - mean) * inv_std * pg->value[j] + ps->value[j];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Conv1d

int64_t Conv1dOutputLength(int64_t time, int64_t kernel, int64_t stride,
                           int64_t padding) {
  return (time + 2 * padding - kernel) / stride + 1;
}

Tensor Conv1d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              int64_t stride, int64_t padding) {
  Check2d("Conv1d", input);
  if (weight.rank() != 3) {
    throw std::invalid_argument("Conv1d: weight must be (out×in×kernel), got " + ShapeStr(weight.shape()));
  }
  const int64_t c_in = input.dim(0), time = input.dim(1);
  const int64_t c_out = weight.dim(0), w_in = weight.dim(1), kernel = weight.dim(2);
  if (w_in != c_in) {
    throw std::invalid_argument("Conv1d: input has " + std::to_string(c_in) + " channels but weight expects " + std::to_string(w_in));
  }
  if (bias.rank() != 1 || bias.dim(0) != c_out) {
    throw std::invalid_argument("Conv1d: bias length " + ShapeStr(bias.shape()) + " must equal out channels " + std::to_string(c_out));
  }
  if (stride < 1 || padding < 0) {
    throw std::invalid_argument("Conv1d: stride must be >= 1 and padding >= 0");
  }
  if (kernel > time + 2 * padding) {
    throw std::invalid_argument("Conv1d: kernel " + std::to_string(kernel) + " exceeds padded time " + std::to_string(time + 2 * padding));
  }
  const int64_t t_out = Conv1dOutputLength(time, kernel, stride, padding);
  auto px = input.shared_node();
  auto pw = weight.shared_node();
  auto pb = bias.shared_node();
  Tensor out = MakeOp({c_out, t_out}, {px, pw, pb},
                      [px, pw, pb, c_in, time, c_out, kernel, stride, padding,
                       t_out](TensorNode& node) {
    const double* wv = pw->value.data();
    const double* xv = px->value.data();
    for (int64_t o = 0; o < c_out; ++o) {
      const double* gy = node.grad.data() + o * t_out;
      if (pb->requires_grad) {
        double acc = 0.0;
        for (int64_t t = 0; t < t_out; ++t) acc += gy[t];
        pb->grad_buffer()[o] += acc;
      }
      for (int64_t i = 0; i < c_in; ++i) {
        const double* xrow = xv + i * time;
        for (int64_t k = 0; k < kernel; ++k) {
          const double wval = wv[(o * c_in + i) * kernel + k];
          double wacc = 0.0;
          for (int64_t t = 0; t < t_out; ++t) {
            const int64_t src = t * stride + k - padding;
            if (src < 0 || src >= time) continue;
            const double g = gy[t];
            wacc += g * xrow[src];
            if (px->requires_grad) px->grad_buffer()[i * time + src] += g * wval;
          }
          if (pw->requires_grad) pw->grad_buffer()[(o * c_in + i) * kernel + k] += wacc;
        }
      }
    }
  });
  auto& ov = out.mutable_data();
  const double* wv = pw->value.data();
  const double* xv = px->value.data();
  for (int64_t o = 0; o < c_out; ++o) {
    double* yrow = ov.data() + o * t_out;
    for (int64_t t = 0; t < t_out; ++t) yrow[t] = pb->value[o];
    for (int64_t i = 0; i < c_in; ++i) {
      const double* xrow = xv + i * time;
      for (int64_t k = 0; k < kernel; ++k) {
        const double wval = wv[(o * c_in + i) * kernel + k];
        if (wval == 0.0) continue;
        const int64_t lo = std::max<int64_t>(0, (padding - k + stride - 1) / stride);
        for (int64_t t = lo; t < t_out; ++t) {
          const int64_t src = t * stride + k - padding;
          if (src >= time) break;
          yrow[t] += wval * xrow[src];
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Embedding

Tensor EmbeddingRows(const Tensor& table, const std::vector<int>& ids) {
  Check2d("EmbeddingRows", table);
  const int64_t vocab = table.dim(0), dim = table.dim(1);
  for (int id : ids) {
    if (id < 0 || id >= vocab) {
      throw std::invalid_argument("EmbeddingRows: id " + std::to_string(id) + " out of vocabulary size " + std::to_string(vocab));
    }
  }
  const int64_t len = static_cast<int64_t>(ids.size());
  auto pt = table.shared_node();
  auto ids_copy = ids;
  Tensor out = MakeOp({len, dim}, {pt}, [pt, ids_copy, dim](TensorNode& node) {
    auto& g = pt->grad_buffer();
    for (size_t i = 0; i < ids_copy.size(); ++i) {
      const double* gy = node.grad.data() + i * dim;
      double* grow = g.data() + static_cast<int64_t>(ids_copy[i]) * dim;
      for (int64_t j = 0; j < dim; ++j) grow[j] += gy[j];
    }
  });
  auto& o = out.mutable_data();
  for (size_t i = 0; i < ids.size(); ++i) {
    const double* row = pt->value.data() + static_cast<int64_t>(ids[i]) * dim;
    std::copy(row, row + dim, o.data() + i * dim);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Distances & similarity

Tensor PairwiseSqDist(const Tensor& a, const Tensor& b) {
  Check2d("PairwiseSqDist", a);
  Check2d("PairwiseSqDist", b);
  if (a.dim(1) != b.dim(1)) {
    throw std::invalid_argument("PairwiseSqDist: feature dims differ, " + ShapeStr(a.shape()) + " vs " + ShapeStr(b.shape()));
  }
  const int64_t m = a.dim(0), n = b.dim(0), d = a.dim(1);
  auto pa = a.shared_node();
  auto pb = b.shared_node();
  Tensor out = MakeOp({m, n}, {pa, pb}, [pa, pb, m, n, d](TensorNode& node) {
    for (int64_t i = 0; i < m; ++i) {
      const double* ai = pa->value.data() + i * d;
      const double* gi = node.grad.data() + i * n;
      for (int64_t j = 0; j < n; ++j) {
        const double g2 = 2.0 * gi[j];
        if (g2 == 0.0) continue;
        const double* bj = pb->value.data() + j * d;
        if (pa->requires_grad) {
          double* ga = pa->grad_buffer().data() + i * d;
          for (int64_t k = 0; k < d; ++k) ga[k] += g2 * (ai[k] - bj[k]);
        }
        if (pb->requires_grad) {
          double* gb = pb->grad_buffer().data() + j * d;
          for (int64_t k = 0; k < d; ++k) gb[k] += g2 * (bj[k] - ai[k]);
        }
      }
    }
  });
  auto& o = out.mutable_data();
  for (int64_t i = 0; i < m; ++i) {
    const double* ai = pa->value.data() + i * d;
    for (int64_t j = 0; j < n; ++j) {
      const double* bj = pb->value.data() + j * d;
      double acc = 0.0;
      for (int64_t k = 0; k < d; ++k) {
        const double diff = ai[k] - bj[k];
        acc += diff * diff;
      }
      o[i * n + j] = acc;
    }
  }
  return out;
}

Tensor CosineSim(const Tensor& a, const Tensor& b) {
  if (a.numel() != b.numel()) {
    throw std::invalid_argument("CosineSim: size mismatch " + ShapeStr(a.shape()) + " vs " + ShapeStr(b.shape()));
  }
  const int64_t n = a.numel();
  auto pa = a.shared_node();
  auto pb = b.shared_node();
  Tensor out = MakeOp({}, {pa, pb}, [pa, pb, n](TensorNode& node) {
    const double* av = pa->value.data();
    const double* bv = pb->value.data();
    double dot = 0.0, na2 = 0.0, nb2 = 0.0;
    for (int64_t i = 0; i < n; ++i) {
      dot += av[i] * bv[i];
      na2 += av[i] * av[i];
      nb2 += bv[i] * bv[i];
    }
    const double na = std::sqrt(na2), nb = std::sqrt(nb2);
    if (na < 1e-12 || nb < 1e-12) return;  // similarity pinned to 0
    const double s = dot / (na * nb);
    const double gy = node.grad[0];
    if (pa->requires_grad) {
      auto& g = pa->grad_buffer();
      for (int64_t i = 0; i < n; ++i) g[i] += gy * (bv[i] / (na * nb) - s * av[i] / na2);
    }
    if (pb->requires_grad) {
      auto& g = pb->grad_buffer();
      for (int64_t i = 0; i < n; ++i) g[i] += gy * (av[i] / (na * nb) - s * bv[i] / nb2);
    }
  });
  const double* av = pa->value.data();
  const double* bv = pb->value.data();
  double dot = 0.0, na2 = 0.0, nb2 = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    dot += av[i] * bv[i];
    na2 += av[i] * av[i];
    nb2 += bv[i] * bv[i];
  }
  const double na = std::sqrt(na2), nb = std::sqrt(nb2);
  out.mutable_data()[0] = (na < 1e-12 || nb < 1e-12) ? 0.0 : dot / (na * nb);
  return out;
}

// ---------------------------------------------------------------------------
// Softmax cross entropy with label smoothing

Tensor SoftmaxCrossEntropy(const Tensor& logits, const std::vector<int>& targets,
                           double label_smoothing, int ignore_id) {
  Check2d("SoftmaxCrossEntropy", logits);
  const int64_t rows = logits.dim(0), vocab = logits.dim(1);
  if (static_cast<int64_t>(targets.size()) != rows) {
    throw std::invalid_argument("SoftmaxCrossEntropy: " + std::to_string(rows) + " logit rows vs " + std::to_string(targets.size()) + " targets");
  }
  int64_t valid = 0;
  for (int t : targets) {
    if (t == ignore_id) continue;
    if (t < 0 || t >= vocab) {
      throw std::invalid_argument("SoftmaxCrossEntropy: target " + std::to_string(t) + " out of vocab " + std::to_string(vocab));
    }
    ++valid;
  }
  if (valid == 0) throw std::invalid_argument("SoftmaxCrossEntropy: no non-ignored targets");
  const double eps = label_smoothing;
  auto pl = logits.shared_node();
  auto tg = targets;
  Tensor out = MakeOp({}, {pl}, [pl, tg, rows, vocab, eps, ignore_id, valid](TensorNode& node) {
    const double gscale = node.grad[0] / static_cast<double>(valid);
    auto& g = pl->grad_buffer();
    for (int64_t i = 0; i < rows; ++i) {
      if (tg[i] == ignore_id) continue;
      const double* x = pl->value.data() + i * vocab;
      double mx = x[0];
      for (int64_t j = 1; j < vocab; ++j) mx = std::max(mx, x[j]);
      double denom = 0.0;
      for (int64_t j = 0; j < vocab; ++j) denom += std::exp(x[j] - mx);
      double* gx = g.data() + i * vocab;
      const double uniform = eps / static_cast<double>(vocab);
      for (int64_t j = 0; j < vocab; ++j) {
        const double p = std::exp(x[j] - mx) / denom;
        double target_mass = uniform;
        if (j == tg[i]) target_mass += 1.0 - eps;
        gx[j] += gscale * (p - target_mass);
      }
    }
  });
  double loss = 0.0;
  for (int64_t i = 0; i < rows; ++i) {
    if (targets[i] == ignore_id) continue;
    const double* x = pl->value.data() + i * vocab;
    double mx = x[0];
    for (int64_t j = 1; j < vocab; ++j) mx = std::max(mx, x[j]);
    double denom = 0.0, mean_logit = 0.0;
    for (int64_t j = 0; j < vocab; ++j) {
      denom += std::exp(x[j] - mx);
      mean_logit += x[j];
    }
    mean_logit /= static_cast<double>(vocab);
    const double lse = mx + std::log(denom);
    const double nll = lse - x[targets[i]];
    const double smooth = lse - mean_logit;
    loss += (1.0 - eps) * nll + eps * smooth;
  }
  out.mutable_data()[0] = loss / static_cast<double>(valid);
  return out;
}

}  // namespace s2t
