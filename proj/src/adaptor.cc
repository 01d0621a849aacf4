// s2t/adaptor.cc

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

#include "s2t/adaptor.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace s2t {

void AdaptorConfig::Validate() const {
  if (layer_count < 1) {
    throw std::invalid_argument("AdaptorConfig: layer_count must be >= 1, got " +
                                std::to_string(layer_count));
  }
  if (stride < 1) {
    throw std::invalid_argument("AdaptorConfig: stride must be >= 1, got " +
                                std::to_string(stride));
  }
  if (kernel < stride) {
    throw std::invalid_argument(
        "AdaptorConfig: kernel (" + std::to_string(kernel) +
        ") must be >= stride (" + std::to_string(stride) +
        ") or frames would be skipped entirely");
  }
  if (layer_drop < 0.0 || layer_drop >= 1.0) {
    throw std::invalid_argument("AdaptorConfig: layer_drop must lie in [0, 1), got " +
                                std::to_string(layer_drop));
  }
  if (in_dim < 1 || out_dim < 1) {
    throw std::invalid_argument("AdaptorConfig: dims must be >= 1");
  }
  if (activation != "gelu" && activation != "relu") {
    throw std::invalid_argument("AdaptorConfig: unknown activation '" +
                                activation + "' (expected gelu or relu)");
  }
}

int64_t AdaptorConfig::LayerOutputLength(int64_t t) const {
  return Conv1dOutputLength(t, kernel, stride, kernel / 2);
}

int64_t AdaptedLength(int64_t t, const AdaptorConfig& config,
                      const std::vector<bool>& dropped) {
  if (static_cast<int64_t>(dropped.size()) != config.layer_count) {
    throw std::invalid_argument(
        "AdaptedLength: got " + std::to_string(dropped.size()) +
        " drop flags for " + std::to_string(config.layer_count) + " layers");
  }
  for (int64_t i = 0; i < config.layer_count; ++i) {
    if (!dropped[static_cast<size_t>(i)]) t = config.LayerOutputLength(t);
  }
  return t;
}

int64_t AdaptedLength(int64_t t, const AdaptorConfig& config) {
  return AdaptedLength(
      t, config, std::vector<bool>(static_cast<size_t>(config.layer_count)));
}

namespace {

// Smallest input length whose fully applied output keeps at least one
// frame. With padding k/2 every length >= 1 survives, so this exists.
int64_t MinimumInputLength(const AdaptorConfig& config) {
  for (int64_t t = 1;; ++t) {
    if (AdaptedLength(t, config) >= 1) return t;
  }
}

}  // namespace

Adaptor::Adaptor(ParamStore* store, const AdaptorConfig& config, Rng* init_rng)
    : config_(config) {
  config_.Validate();
  if (config_.in_dim != config_.out_dim) {
    projection_ = Linear(store, "adaptor.proj", Owner::kAdaptor,
                         ParamRole::kAdaptor, config_.in_dim, config_.out_dim,
                         init_rng);
    has_projection_ = true;
  }
  const int64_t d = config_.out_dim;
  const double stddev = 1.0 / std::sqrt(static_cast<double>(d * config_.kernel));
  for (int64_t i = 0; i < config_.layer_count; ++i) {
    const std::string prefix = "adaptor.conv" + std::to_string(i);
    weights_.push_back(store->Register(
        prefix + ".w", Tensor::Randn({d, d, config_.kernel}, init_rng, stddev),
        Owner::kAdaptor, ParamRole::kAdaptor));
    biases_.push_back(store->Register(prefix + ".b", Tensor::Zeros({d}),
                                      Owner::kAdaptor, ParamRole::kAdaptor));
    if (config_.use_layer_norm) {
      norms_.emplace_back(store, prefix + ".ln", Owner::kAdaptor, d);
    }
  }
}

std::vector<bool> Adaptor::SampleDrops(bool train, Rng* rng) const {
  std::vector<bool> dropped(static_cast<size_t>(config_.layer_count), false);
  if (!train || config_.layer_drop <= 0.0) return dropped;
  if (rng == nullptr) {
    throw std::invalid_argument("Adaptor: training with layer_drop > 0 needs an rng");
  }
  for (auto&& flag : dropped) flag = rng->Bernoulli(config_.layer_drop);
  return dropped;
}

Tensor Adaptor::Apply(const Tensor& encoder_out,
                      const std::vector<bool>& dropped) const {
  if (encoder_out.rank() != 2 || encoder_out.dim(1) != config_.in_dim) {
    throw std::invalid_argument("Adaptor: expected (time x " +
                                std::to_string(config_.in_dim) + ") input");
  }
  const int64_t time = encoder_out.dim(0);
  if (time < 1) throw std::invalid_argument("Adaptor: empty input");
  if (static_cast<int64_t>(dropped.size()) != config_.layer_count) {
    throw std::invalid_argument(
        "Adaptor: got " + std::to_string(dropped.size()) + " drop flags for " +
        std::to_string(config_.layer_count) + " layers");
  }
  if (AdaptedLength(time, config_, dropped) < 1) {
    throw std::invalid_argument(
        "Adaptor: input of length " + std::to_string(time) +
        " shrinks to zero frames; need at least " +
        std::to_string(MinimumInputLength(config_)) + " frames");
  }
  Tensor h = encoder_out;
  if (has_projection_) h = projection_.Forward(h);
  for (int64_t i = 0; i < config_.layer_count; ++i) {
    if (dropped[static_cast<size_t>(i)]) continue;
    // Conv1d works on (channels x time); the pipeline carries (time x dim).
    Tensor c = Conv1d(Transpose(h), weights_[static_cast<size_t>(i)],
                      biases_[static_cast<size_t>(i)], config_.stride,
                      config_.kernel / 2);
    c = config_.activation == "relu" ? Relu(c) : Gelu(c);
    h = Transpose(c);
    if (config_.use_layer_norm) h = norms_[static_cast<size_t>(i)].Forward(h);
  }
  return h;
}

Tensor Adaptor::Apply(const Tensor& encoder_out, bool train, Rng* rng) const {
  return Apply(encoder_out, SampleDrops(train, rng));
}

std::vector<AdaptorGridRow> EnumerateAdaptorGrid() {
  auto row = [](int64_t stride, int64_t layers, double drop, bool norm,
                double bleu) {
    AdaptorGridRow r;
    r.config.stride = stride;
    r.config.layer_count = layers;
    r.config.layer_drop = drop;
    r.config.use_layer_norm = norm;
    r.reference_bleu = bleu;
    return r;
  };
  return {
      row(2, 3, 0.0, false, 19.76), row(2, 3, 0.3, false, 23.23),
      row(2, 3, 0.2, false, 22.38), row(2, 3, 0.2, true, 19.4),
      row(2, 4, 0.0, false, 21.73), row(2, 4, 0.3, false, 0.14),
      row(3, 3, 0.3, false, 21.27), row(3, 3, 0.0, false, 22.23),
  };
}

}  // namespace s2t
