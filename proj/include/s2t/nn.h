// s2t/nn.h

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

#ifndef S2T_NN_H_
#define S2T_NN_H_

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "s2t/rng.h"
#include "s2t/tensor.h"

namespace s2t {

// Every parameter is tagged with the component that owns it and a
// functional role. Training strategies freeze or update parameters by
// matching on these tags rather than on names.
enum class Owner { kEncoder, kAdaptor, kDecoder };

enum class ParamRole {
  kLayerNorm,
  kSelfAttn,
  kEncoderAttn,  // decoder attention over encoder memory
  kFfn,
  kEmbedding,
  kPositional,
  kConvFeature,
  kAdaptor,
  kOther,
};

std::string OwnerName(Owner owner);
Owner OwnerFromName(const std::string& name);
std::string RoleName(ParamRole role);
ParamRole RoleFromName(const std::string& name);

struct ParamInfo {
  std::string name;
  Tensor tensor;
  Owner owner = Owner::kEncoder;
  ParamRole role = ParamRole::kOther;
};

// Ordered registry of named parameters. Registration order is the
// serialization order, so checkpoints are stable for a fixed architecture.
class ParamStore {
 public:
  // Marks the tensor as requiring gradients and returns it. Throws on
  // duplicate names.
  Tensor Register(const std::string& name, Tensor tensor, Owner owner,
                  ParamRole role);

  const std::vector<ParamInfo>& params() const { return params_; }
  std::vector<ParamInfo>& mutable_params() { return params_; }

  const ParamInfo* Find(const std::string& name) const;
  Tensor Get(const std::string& name) const;  // throws if absent

  int64_t TotalParamCount() const;
  void ZeroAllGrads();

 private:
  std::vector<ParamInfo> params_;
  std::unordered_map<std::string, size_t> index_;
};

// ---------------------------------------------------------------------------
// Layers. Constructors register their parameters into the given store under
// `prefix` and keep handles for the forward pass.

class Linear {
 public:
  Linear() = default;
  Linear(ParamStore* store, const std::string& prefix, Owner owner,
         ParamRole role, int64_t in_dim, int64_t out_dim, Rng* rng);
  Tensor Forward(const Tensor& x) const;  // x: (t×in) -> (t×out)

  Tensor w, b;
};

class LayerNormLayer {
 public:
  LayerNormLayer() = default;
  LayerNormLayer(ParamStore* store, const std::string& prefix, Owner owner,
                 int64_t dim);
  Tensor Forward(const Tensor& x) const;

  Tensor gain, shift;
};

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(ParamStore* store, const std::string& prefix, Owner owner,
                 ParamRole role, int64_t vocab, int64_t dim, Rng* rng,
                 double stddev = 0.1);
  Tensor Forward(const std::vector<int>& ids) const;  // (len×dim)

  Tensor table;
};

// Scaled dot-product attention with `heads` parallel heads. The same block
// serves self-attention (memory == query input) and attention over encoder
// memory; the role tag records which one it is.
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(ParamStore* store, const std::string& prefix, Owner owner,
                     ParamRole role, int64_t dim, int64_t heads, Rng* rng);
  // query: (t_q×d), memory: (t_k×d). With causal=true position t only
  // attends to memory positions <= t (requires t_q == t_k).
  Tensor Forward(const Tensor& query, const Tensor& memory, bool causal) const;

  Linear wq, wk, wv, wo;
  int64_t dim = 0, heads = 0, head_dim = 0;
};

class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(ParamStore* store, const std::string& prefix, Owner owner,
              int64_t dim, int64_t hidden, Rng* rng);
  Tensor Forward(const Tensor& x) const;

  Linear fc1, fc2;
};

// Pre-norm transformer encoder layer:
//   x = x + attn(ln1(x)); x = x + ffn(ln2(x)).
class TransformerEncoderLayer {
 public:
  TransformerEncoderLayer() = default;
  TransformerEncoderLayer(ParamStore* store, const std::string& prefix,
                          Owner owner, int64_t dim, int64_t heads,
                          int64_t hidden, Rng* rng);
  Tensor Forward(const Tensor& x) const;

  LayerNormLayer ln1, ln2;
  MultiHeadAttention attn;
  FeedForward ffn;
};

// Pre-norm transformer decoder layer with causal self-attention and
// attention over encoder memory:
//   x = x + self_attn(ln1(x));  x = x + memory_attn(ln2(x), m);
//   x = x + ffn(ln3(x)).
class TransformerDecoderLayer {
 public:
  TransformerDecoderLayer() = default;
  TransformerDecoderLayer(ParamStore* store, const std::string& prefix,
                          Owner owner, int64_t dim, int64_t heads,
                          int64_t hidden, Rng* rng);
  Tensor Forward(const Tensor& x, const Tensor& memory) const;
  // Language-model form: the memory-attention sublayer is bypassed entirely.
  Tensor Forward(const Tensor& x) const;

  LayerNormLayer ln1, ln2, ln3;
  MultiHeadAttention self_attn, memory_attn;
  FeedForward ffn;
};

}  // namespace s2t

#endif  // S2T_NN_H_
