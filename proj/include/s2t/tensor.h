// s2t/tensor.h

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

#ifndef S2T_TENSOR_H_
#define S2T_TENSOR_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "s2t/rng.h"

namespace s2t {

// Dense 64-bit float tensor with define-by-run reverse-mode autodiff.
// Every op below records its backward pass while autograd is enabled and
// at least one input requires gradients. Gradients accumulate across
// Backward() calls until ZeroGrad() is called explicitly.
//
// Everything is double precision. Model sizes here are small enough that
// the tight finite-difference checks are worth far more than speed.

struct TensorNode;

class Tensor {
 public:
  Tensor() = default;

  static Tensor Zeros(std::vector<int64_t> shape, bool requires_grad = false);
  static Tensor Full(std::vector<int64_t> shape, double value,
                     bool requires_grad = false);
  static Tensor FromData(std::vector<int64_t> shape, std::vector<double> data,
                         bool requires_grad = false);
  static Tensor Scalar(double value, bool requires_grad = false);
  static Tensor Randn(std::vector<int64_t> shape, Rng* rng,
                      double stddev = 1.0, bool requires_grad = false);
  static Tensor RandUniform(std::vector<int64_t> shape, Rng* rng, double lo,
                            double hi, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const std::vector<int64_t>& shape() const;
  int rank() const;
  int64_t dim(int i) const;
  int64_t numel() const;

  const std::vector<double>& data() const;
  std::vector<double>& mutable_data();

  bool requires_grad() const;
  void set_requires_grad(bool value);

  // Gradient buffer; allocated (zero-filled) on first access.
  const std::vector<double>& grad() const;
  std::vector<double>& mutable_grad();
  bool grad_allocated() const;
  void ZeroGrad();

  // Value of a scalar (rank-0 or single-element) tensor.
  double item() const;
  double at(std::initializer_list<int64_t> idx) const;

  // Reverse pass from a scalar. Throws std::invalid_argument otherwise.
  void Backward() const;

  TensorNode* node() const { return node_.get(); }
  std::shared_ptr<TensorNode> shared_node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}
  std::shared_ptr<TensorNode> node_;

  friend Tensor MakeTensor(std::shared_ptr<TensorNode> node);
};

struct TensorNode {
  std::vector<int64_t> shape;
  std::vector<double> value;
  std::vector<double> grad;  // lazily allocated, same size as value
  bool requires_grad = false;
  uint64_t id = 0;  // creation order; reverse order is a topological order

  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backward_fn;

  int64_t numel() const { return static_cast<int64_t>(value.size()); }
  std::vector<double>& grad_buffer();
};

// Disables autograd recording in the current thread while alive. Used for
// evaluation and decoding so no graph is built.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

bool autograd_enabled();

// ---- elementwise and scalar ops ----
Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);
Tensor Scale(const Tensor& a, double c);
Tensor AddScalar(const Tensor& a, double c);
Tensor Neg(const Tensor& a);
Tensor Relu(const Tensor& a);
Tensor Gelu(const Tensor& a);
Tensor Sqrt(const Tensor& a);
Tensor Detach(const Tensor& a);

// ---- linear algebra ----
Tensor MatMul(const Tensor& a, const Tensor& b);   // (m×k)·(k×n)
Tensor Transpose(const Tensor& a);                 // 2-d
// x:(t×in), w:(in×out), b:(out) -> t×out. Fused linear layer.
Tensor Affine(const Tensor& x, const Tensor& w, const Tensor& b);

// ---- shape ops ----
// Same data, new shape; product of dims must equal numel.
Tensor Reshape(const Tensor& a, std::vector<int64_t> shape);
Tensor SliceCols(const Tensor& a, int64_t start, int64_t len);
Tensor SliceRows(const Tensor& a, int64_t start, int64_t len);
Tensor ConcatCols(const std::vector<Tensor>& parts);
Tensor ConcatRows(const std::vector<Tensor>& parts);

// ---- reductions ----
Tensor Sum(const Tensor& a);
Tensor Mean(const Tensor& a);

// ---- row-wise softmax family (last axis of a 2-d tensor) ----
Tensor SoftmaxRows(const Tensor& a);
Tensor LogSoftmaxRows(const Tensor& a);
// Adds a large negative constant above the diagonal so row t only sees
// columns <= t after softmax.
Tensor CausalMask(const Tensor& scores);

// ---- fused layers ----
// Per-row normalization over the last axis, then affine with gain/shift.
// Zero-variance rows normalize to 0, so the output is the shift.
Tensor LayerNorm(const Tensor& x, const Tensor& gain, const Tensor& shift,
                 double epsilon = 1e-5);

// input:(c_in×t), weight:(c_out×c_in×k), bias:(c_out) -> (c_out×t').
// t' = floor((t + 2*padding - k) / stride) + 1.
Tensor Conv1d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              int64_t stride, int64_t padding);
int64_t Conv1dOutputLength(int64_t time, int64_t kernel, int64_t stride,
                           int64_t padding);

// table:(v×d), ids -> (len×d). Backward scatter-adds into the table.
Tensor EmbeddingRows(const Tensor& table, const std::vector<int>& ids);

// Squared euclidean distances between rows: a:(m×d), b:(n×d) -> (m×n).
Tensor PairwiseSqDist(const Tensor& a, const Tensor& b);

// Cosine similarity of two vectors (safe at zero norm); scalar output.
Tensor CosineSim(const Tensor& a, const Tensor& b);

// logits:(t×v), targets: one id per row. Mean over rows whose target is
// not ignore_id of (1-eps)*nll + eps*mean_class_nll. ignore_id < 0
// disables ignoring.
Tensor SoftmaxCrossEntropy(const Tensor& logits, const std::vector<int>& targets,
                           double label_smoothing = 0.0, int ignore_id = -1);

}  // namespace s2t

#endif  // S2T_TENSOR_H_
