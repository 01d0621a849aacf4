// s2t/nn.cc

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

#include "s2t/nn.h"

#include <cmath>
#include <stdexcept>

namespace s2t {

std::string OwnerName(Owner owner) {
  switch (owner) {
    case Owner::kEncoder: return "encoder";
    case Owner::kAdaptor: return "adaptor";
    case Owner::kDecoder: return "decoder";
  }
  throw std::invalid_argument("OwnerName: bad owner");
}

Owner OwnerFromName(const std::string& name) {
  if (name == "encoder") return Owner::kEncoder;
  if (name == "adaptor") return Owner::kAdaptor;
  if (name == "decoder") return Owner::kDecoder;
  throw std::invalid_argument("OwnerFromName: unknown owner '" + name + "'");
}

std::string RoleName(ParamRole role) {
  switch (role) {
    case ParamRole::kLayerNorm: return "layer_norm";
    case ParamRole::kSelfAttn: return "self_attn";
    case ParamRole::kEncoderAttn: return "encoder_attn";
    case ParamRole::kFfn: return "ffn";
    case ParamRole::kEmbedding: return "embedding";
    case ParamRole::kPositional: return "positional";
    case ParamRole::kConvFeature: return "conv_feature";
    case ParamRole::kAdaptor: return "adaptor";
    case ParamRole::kOther: return "other";
  }
  throw std::invalid_argument("RoleName: bad role");
}

ParamRole RoleFromName(const std::string& name) {
  if (name == "layer_norm") return ParamRole::kLayerNorm;
  if (name == "self_attn") return ParamRole::kSelfAttn;
  if (name == "encoder_attn") return ParamRole::kEncoderAttn;
  if (name == "ffn") return ParamRole::kFfn;
  if (name == "embedding") return ParamRole::kEmbedding;
  if (name == "positional") return ParamRole::kPositional;
  if (name == "conv_feature") return ParamRole::kConvFeature;
  if (name == "adaptor") return ParamRole::kAdaptor;
  if (name == "other") return ParamRole::kOther;
  throw std::invalid_argument("RoleFromName: unknown role '" + name + "'");
}

Tensor ParamStore::Register(const std::string& name, Tensor tensor,
                            Owner owner, ParamRole role) {
  if (index_.count(name)) {
    throw std::invalid_argument("ParamStore: duplicate parameter '" + name + "'");
  }
  tensor.set_requires_grad(true);
  index_[name] = params_.size();
  params_.push_back(ParamInfo{name, tensor, owner, role});
  return tensor;
}

const ParamInfo* ParamStore::Find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &params_[it->second];
}

Tensor ParamStore::Get(const std::string& name) const {
  const ParamInfo* info = Find(name);
  if (!info) throw std::invalid_argument("ParamStore: no parameter '" + name + "'");
  return info->tensor;
}

int64_t ParamStore::TotalParamCount() const {
  int64_t total = 0;
  for (const auto& p : params_) total += p.tensor.numel();
  return total;
}

void ParamStore::ZeroAllGrads() {
  for (auto& p : params_) p.tensor.ZeroGrad();
}

// ---------------------------------------------------------------------------

Linear::Linear(ParamStore* store, const std::string& prefix, Owner owner,
               ParamRole role, int64_t in_dim, int64_t out_dim, Rng* rng) {
  const double stddev = 1.0 / std::sqrt(static_cast<double>(in_dim));
  w = store->Register(prefix + ".w", Tensor::Randn({in_dim, out_dim}, rng, stddev),
                      owner, role);
  b = store->Register(prefix + ".b", Tensor::Zeros({out_dim}), owner, role);
}

Tensor Linear::Forward(const Tensor& x) const { return Affine(x, w, b); }

LayerNormLayer::LayerNormLayer(ParamStore* store, const std::string& prefix,
                               Owner owner, int64_t dim) {
  gain = store->Register(prefix + ".gain", Tensor::Full({dim}, 1.0), owner,
                         ParamRole::kLayerNorm);
  shift = store->Register(prefix + ".shift", Tensor::Zeros({dim}), owner,
                          ParamRole::kLayerNorm);
}

Tensor LayerNormLayer::Forward(const Tensor& x) const {
  return LayerNorm(x, gain, shift);
}

EmbeddingTable::EmbeddingTable(ParamStore* store, const std::string& prefix,
                               Owner owner, ParamRole role, int64_t vocab,
                               int64_t dim, Rng* rng, double stddev) {
  table = store->Register(prefix + ".table",
                          Tensor::Randn({vocab, dim}, rng, stddev), owner, role);
}

Tensor EmbeddingTable::Forward(const std::vector<int>& ids) const {
  return EmbeddingRows(table, ids);
}

MultiHeadAttention::MultiHeadAttention(ParamStore* store,
                                       const std::string& prefix, Owner owner,
                                       ParamRole role, int64_t dim_in,
                                       int64_t heads_in, Rng* rng)
    : dim(dim_in), heads(heads_in), head_dim(dim_in / heads_in) {
  if (dim % heads != 0) {
    throw std::invalid_argument("MultiHeadAttention: dim " + std::to_string(dim) +
                                " not divisible by heads " + std::to_string(heads));
  }
  wq = Linear(store, prefix + ".wq", owner, role, dim, dim, rng);
  wk = Linear(store, prefix + ".wk", owner, role, dim, dim, rng);
  wv = Linear(store, prefix + ".wv", owner, role, dim, dim, rng);
  wo = Linear(store, prefix + ".wo", owner, role, dim, dim, rng);
}

Tensor MultiHeadAttention::Forward(const Tensor& query, const Tensor& memory,
                                   bool causal) const {
  if (causal && query.dim(0) != memory.dim(0)) {
    throw std::invalid_argument("MultiHeadAttention: causal attention needs square scores");
  }
  Tensor q = wq.Forward(query);
  Tensor k = wk.Forward(memory);
  Tensor v = wv.Forward(memory);
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  std::vector<Tensor> ctx;
  ctx.reserve(heads);
  for (int64_t h = 0; h < heads; ++h) {
    Tensor qh = SliceCols(q, h * head_dim, head_dim);
    Tensor kh = SliceCols(k, h * head_dim, head_dim);
    Tensor vh = SliceCols(v, h * head_dim, head_dim);
    Tensor scores = Scale(MatMul(qh, Transpose(kh)), scale);
    if (causal) scores = CausalMask(scores);
    ctx.push_back(MatMul(SoftmaxRows(scores), vh));
  }
  return wo.Forward(ConcatCols(ctx));
}

FeedForward::FeedForward(ParamStore* store, const std::string& prefix,
                         Owner owner, int64_t dim, int64_t hidden, Rng* rng) {
  fc1 = Linear(store, prefix + ".fc1", owner, ParamRole::kFfn, dim, hidden, rng);
  fc2 = Linear(store, prefix + ".fc2", owner, ParamRole::kFfn, hidden, dim, rng);
}

Tensor FeedForward::Forward(const Tensor& x) const {
  return fc2.Forward(Gelu(fc1.Forward(x)));
}

TransformerEncoderLayer::TransformerEncoderLayer(ParamStore* store,
                                                 const std::string& prefix,
                                                 Owner owner, int64_t dim,
                                                 int64_t heads, int64_t hidden,
                                                 Rng* rng) {
  ln1 = LayerNormLayer(store, prefix + ".ln1", owner, dim);
  attn = MultiHeadAttention(store, prefix + ".self_attn", owner,
                            ParamRole::kSelfAttn, dim, heads, rng);
  ln2 = LayerNormLayer(store, prefix + ".ln2", owner, dim);
  ffn = FeedForward(store, prefix + ".ffn", owner, dim, hidden, rng);
}

Tensor TransformerEncoderLayer::Forward(const Tensor& x) const {
  Tensor h = ln1.Forward(x);
  Tensor y = Add(x, attn.Forward(h, h, /*causal=*/false));
  return Add(y, ffn.Forward(ln2.Forward(y)));
}

TransformerDecoderLayer::TransformerDecoderLayer(ParamStore* store,
                                                 const std::string& prefix,
                                                 Owner owner, int64_t dim,
                                                 int64_t heads, int64_t hidden,
                                                 Rng* rng) {
  ln1 = LayerNormLayer(store, prefix + ".ln1", owner, dim);
  self_attn = MultiHeadAttention(store, prefix + ".self_attn", owner,
                                 ParamRole::kSelfAttn, dim, heads, rng);
  ln2 = LayerNormLayer(store, prefix + ".ln2", owner, dim);
  memory_attn = MultiHeadAttention(store, prefix + ".memory_attn", owner,
                                   ParamRole::kEncoderAttn, dim, heads, rng);
  ln3 = LayerNormLayer(store, prefix + ".ln3", owner, dim);
  ffn = FeedForward(store, prefix + ".ffn", owner, dim, hidden, rng);
}

Tensor TransformerDecoderLayer::Forward(const Tensor& x,
                                        const Tensor& memory) const {
  Tensor h = ln1.Forward(x);
  Tensor y = Add(x, self_attn.Forward(h, h, /*causal=*/true));
  y = Add(y, memory_attn.Forward(ln2.Forward(y), memory, /*causal=*/false));
  return Add(y, ffn.Forward(ln3.Forward(y)));
}

Tensor TransformerDecoderLayer::Forward(const Tensor& x) const {
  Tensor h = ln1.Forward(x);
  Tensor y = Add(x, self_attn.Forward(h, h, /*causal=*/true));
  return Add(y, ffn.Forward(ln3.Forward(y)));
}

}  // namespace s2t
