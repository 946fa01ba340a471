#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ted/rng.hpp"
#include "ted/types.hpp"

namespace ted {

template <class S = Scalar>
struct HeadParams {
  MatrixX<S> wq, wk, wv;  // d x d_head each
};

// Optional position-wise feed-forward block (d -> 4d -> d, ReLU) with its own
// residual + layer norm.
template <class S = Scalar>
struct FfnParams {
  MatrixX<S> w1;   // d x 4d
  VectorX<S> b1;   // 4d
  MatrixX<S> w2;   // 4d x d
  VectorX<S> b2;   // d
  VectorX<S> ln_gain, ln_bias;
};

template <class S = Scalar>
struct LayerParams {
  std::vector<HeadParams<S>> heads;
  MatrixX<S> wo;  // d x d output projection after head concat
  VectorX<S> ln_gain, ln_bias;
  std::optional<FfnParams<S>> ffn;
};

template <class S = Scalar>
struct ClassifierParams {
  MatrixX<S> weight;  // L x d
  VectorX<S> bias;    // L
};

struct ModelTopology {
  int dim = 32;
  int layers = 2;
  int heads = 4;
  int labels = 0;
  bool feed_forward = false;
  // Project the head concat through W^O. Off reproduces a concat-only
  // multi-head block.
  bool output_projection = true;
};

template <class S = Scalar>
struct TedModel {
  ModelTopology topology;
  std::vector<LayerParams<S>> layers;
  ClassifierParams<S> classifier;

  int dim() const { return topology.dim; }
  int num_layers() const { return topology.layers; }
  int num_heads() const { return topology.heads; }
  int head_dim() const { return topology.dim / topology.heads; }
  int num_labels() const { return topology.labels; }
};

namespace detail {

template <class S>
void xavier_uniform(MatrixX<S>& w, SplitMix64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  for (Index c = 0; c < w.cols(); ++c) {
    for (Index r = 0; r < w.rows(); ++r) {
      w(r, c) = static_cast<S>(rng.next_uniform(-limit, limit));
    }
  }
}

}  // namespace detail

// Seeded init: Xavier-uniform projections, layer-norm gain 1 / bias 0,
// zero classifier bias.
template <class S = Scalar>
TedModel<S> init_model(const ModelTopology& topology, std::uint64_t seed) {
  if (topology.dim < 1 || topology.layers < 1 || topology.heads < 1 ||
      topology.labels < 1) {
    throw DataError("model topology counts must be positive");
  }
  if (topology.dim % topology.heads != 0) {
    throw DataError("model dim " + std::to_string(topology.dim) +
                    " is not divisible by " + std::to_string(topology.heads) +
                    " heads");
  }
  const int d = topology.dim;
  const int dh = topology.dim / topology.heads;
  SplitMix64 rng = seeded_stream(seed, "model-init");

  TedModel<S> model;
  model.topology = topology;
  model.layers.resize(topology.layers);
  for (LayerParams<S>& layer : model.layers) {
    layer.heads.resize(topology.heads);
    for (HeadParams<S>& head : layer.heads) {
      head.wq.resize(d, dh);
      head.wk.resize(d, dh);
      head.wv.resize(d, dh);
      detail::xavier_uniform(head.wq, rng);
      detail::xavier_uniform(head.wk, rng);
      detail::xavier_uniform(head.wv, rng);
    }
    if (topology.output_projection) {
      layer.wo.resize(d, d);
      detail::xavier_uniform(layer.wo, rng);
    }
    layer.ln_gain = VectorX<S>::Ones(d);
    layer.ln_bias = VectorX<S>::Zero(d);
    if (topology.feed_forward) {
      FfnParams<S> ffn;
      ffn.w1.resize(d, 4 * d);
      ffn.w2.resize(4 * d, d);
      detail::xavier_uniform(ffn.w1, rng);
      detail::xavier_uniform(ffn.w2, rng);
      ffn.b1 = VectorX<S>::Zero(4 * d);
      ffn.b2 = VectorX<S>::Zero(d);
      ffn.ln_gain = VectorX<S>::Ones(d);
      ffn.ln_bias = VectorX<S>::Zero(d);
      layer.ffn = std::move(ffn);
    }
  }
  model.classifier.weight.resize(topology.labels, d);
  detail::xavier_uniform(model.classifier.weight, rng);
  model.classifier.bias = VectorX<S>::Zero(topology.labels);
  return model;
}

// Same shapes, all parameters zero. Used for gradient accumulators.
template <class S = Scalar>
TedModel<S> zeros_like(const TedModel<S>& model) {
  TedModel<S> z;
  z.topology = model.topology;
  z.layers.resize(model.layers.size());
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const LayerParams<S>& src = model.layers[i];
    LayerParams<S>& dst = z.layers[i];
    dst.heads.resize(src.heads.size());
    for (std::size_t h = 0; h < src.heads.size(); ++h) {
      dst.heads[h].wq = MatrixX<S>::Zero(src.heads[h].wq.rows(), src.heads[h].wq.cols());
      dst.heads[h].wk = MatrixX<S>::Zero(src.heads[h].wk.rows(), src.heads[h].wk.cols());
      dst.heads[h].wv = MatrixX<S>::Zero(src.heads[h].wv.rows(), src.heads[h].wv.cols());
    }
    dst.wo = MatrixX<S>::Zero(src.wo.rows(), src.wo.cols());
    dst.ln_gain = VectorX<S>::Zero(src.ln_gain.size());
    dst.ln_bias = VectorX<S>::Zero(src.ln_bias.size());
    if (src.ffn) {
      FfnParams<S> ffn;
      ffn.w1 = MatrixX<S>::Zero(src.ffn->w1.rows(), src.ffn->w1.cols());
      ffn.b1 = VectorX<S>::Zero(src.ffn->b1.size());
      ffn.w2 = MatrixX<S>::Zero(src.ffn->w2.rows(), src.ffn->w2.cols());
      ffn.b2 = VectorX<S>::Zero(src.ffn->b2.size());
      ffn.ln_gain = VectorX<S>::Zero(src.ffn->ln_gain.size());
      ffn.ln_bias = VectorX<S>::Zero(src.ffn->ln_bias.size());
      dst.ffn = std::move(ffn);
    }
  }
  z.classifier.weight =
      MatrixX<S>::Zero(model.classifier.weight.rows(), model.classifier.weight.cols());
  z.classifier.bias = VectorX<S>::Zero(model.classifier.bias.size());
  return z;
}

// Raw view over one parameter tensor. Data is Eigen's column-major storage.
template <class S>
struct TensorRef {
  std::string name;
  S* data = nullptr;
  Index rows = 0, cols = 0;

  Index size() const { return rows * cols; }
  S& at(Index r, Index c) const { return data[c * rows + r]; }
};

// Every parameter tensor in a fixed, stable order. Adam state, gradient
// accumulation, checkpoints, and the gradient checker all rely on this order.
template <class S>
std::vector<TensorRef<S>> tensor_refs(TedModel<S>& model) {
  std::vector<TensorRef<S>> refs;
  auto add = [&refs](std::string name, auto& m) {
    refs.push_back({std::move(name), m.data(), m.rows(), m.cols()});
  };
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const std::string prefix = "layer" + std::to_string(l) + ".";
    LayerParams<S>& layer = model.layers[l];
    for (std::size_t h = 0; h < layer.heads.size(); ++h) {
      const std::string hp = prefix + "head" + std::to_string(h) + ".";
      add(hp + "wq", layer.heads[h].wq);
      add(hp + "wk", layer.heads[h].wk);
      add(hp + "wv", layer.heads[h].wv);
    }
    if (layer.wo.size() > 0) add(prefix + "wo", layer.wo);
    add(prefix + "ln_gain", layer.ln_gain);
    add(prefix + "ln_bias", layer.ln_bias);
    if (layer.ffn) {
      add(prefix + "ffn.w1", layer.ffn->w1);
      add(prefix + "ffn.b1", layer.ffn->b1);
      add(prefix + "ffn.w2", layer.ffn->w2);
      add(prefix + "ffn.b2", layer.ffn->b2);
      add(prefix + "ffn.ln_gain", layer.ffn->ln_gain);
      add(prefix + "ffn.ln_bias", layer.ffn->ln_bias);
    }
  }
  add("classifier.weight", model.classifier.weight);
  add("classifier.bias", model.classifier.bias);
  return refs;
}

template <class S>
Index num_parameters(TedModel<S>& model) {
  Index n = 0;
  for (const auto& ref : tensor_refs(model)) n += ref.size();
  return n;
}

}  // namespace ted
