#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "ted/model.hpp"
#include "ted/pooling.hpp"
#include "ted/priority.hpp"
#include "ted/rng.hpp"
#include "ted/types.hpp"

namespace ted {

inline constexpr double kLayerNormEpsilon = 1e-5;

// ---------------------------------------------------------------------------
// Row softmax

// Numerically stable exp-normalization with max subtraction. Entries may be
// -inf (masked out); they normalize to exactly zero.
template <class D>
RowVectorX<typename D::Scalar> softmax_row(const Eigen::MatrixBase<D>& scores) {
  using S = typename D::Scalar;
  RowVectorX<S> row = scores;
  if (row.size() == 0) throw DataError("softmax of an empty row");
  const S max = row.maxCoeff();
  if (!(max > -std::numeric_limits<S>::infinity())) {
    throw DataError("softmax row has no admissible entry");
  }
  // std::exp maps the -inf of masked entries to exactly +0; Eigen's packet
  // exp clamps its argument and would leave a denormal behind instead.
  RowVectorX<S> e(row.size());
  for (Index i = 0; i < row.size(); ++i) e[i] = std::exp(row[i] - max);
  return e / e.sum();
}

// Priority-weighted softmax: entry t gets factor_t * exp(score_t) mass,
// computed in log space as softmax(score + ln factor). Uniform factors cancel
// and reproduce softmax_row.
template <class D, class S>
RowVectorX<typename D::Scalar> priority_softmax_row(
    const Eigen::MatrixBase<D>& scores, const PriorityFactors<S>& factors) {
  if (factors.size() != scores.size()) {
    throw DataError("priority factor count does not match score row length");
  }
  if ((factors.values.array() <= S(0)).any()) {
    throw DataError("priority factors must be positive");
  }
  RowVectorX<S> shifted =
      scores.derived().array() + factors.values.transpose().array().log();
  return softmax_row(shifted);
}

// ---------------------------------------------------------------------------
// Layer norm

template <class S = Scalar>
struct LayerNormCache {
  MatrixX<S> normalized;  // per-row standardized input
  VectorX<S> inv_std;     // 1 / sqrt(var + eps) per row
};

// Per-row normalization followed by gain/bias, as taken after each residual.
template <class S>
MatrixX<S> layer_norm(const MatrixX<S>& x, const VectorX<S>& gain,
                      const VectorX<S>& bias, LayerNormCache<S>* cache = nullptr) {
  const Index d = x.cols();
  MatrixX<S> normalized(x.rows(), d);
  VectorX<S> inv_std(x.rows());
  for (Index r = 0; r < x.rows(); ++r) {
    const S mean = x.row(r).mean();
    const RowVectorX<S> centered = x.row(r).array() - mean;
    const S var = centered.squaredNorm() / static_cast<S>(d);
    inv_std[r] = S(1) / std::sqrt(var + static_cast<S>(kLayerNormEpsilon));
    normalized.row(r) = centered * inv_std[r];
  }
  MatrixX<S> out =
      (normalized.array().rowwise() * gain.transpose().array()).matrix();
  out.rowwise() += bias.transpose();
  if (cache) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return out;
}

// Gradient of layer_norm. Accumulates parameter gradients and returns dx.
template <class S>
MatrixX<S> layer_norm_backward(const MatrixX<S>& dout, const LayerNormCache<S>& cache,
                               const VectorX<S>& gain, VectorX<S>& dgain,
                               VectorX<S>& dbias) {
  const Index d = cache.normalized.cols();
  MatrixX<S> dx(dout.rows(), d);
  for (Index r = 0; r < dout.rows(); ++r) {
    dgain += (dout.row(r).array() * cache.normalized.row(r).array()).matrix().transpose();
    dbias += dout.row(r).transpose();
    const RowVectorX<S> dnorm = dout.row(r).array() * gain.transpose().array();
    const S mean_dnorm = dnorm.mean();
    const S mean_dnorm_norm =
        (dnorm.array() * cache.normalized.row(r).array()).mean();
    dx.row(r) = cache.inv_std[r] *
                (dnorm.array() - mean_dnorm -
                 cache.normalized.row(r).array() * mean_dnorm_norm);
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Attention masks

enum class AttentionMask { all, same_speaker_only, listener_only };

// Key columns a query may attend to. Targeting is relative to the current
// turn's speaker; the current turn's own column is always admissible. Empty
// result means "no restriction".
inline std::vector<char> allowed_columns(const std::vector<int>& speaker_ids,
                                         int current_pos, AttentionMask mode) {
  if (mode == AttentionMask::all) return {};
  const int current_speaker = speaker_ids.at(current_pos);
  std::vector<char> allowed(speaker_ids.size(), 0);
  bool any = false;
  for (std::size_t k = 0; k < speaker_ids.size(); ++k) {
    const bool same = speaker_ids[k] == current_speaker;
    const bool ok = (mode == AttentionMask::same_speaker_only) ? same : !same;
    allowed[k] = ok || static_cast<int>(k) == current_pos;
    any = any || allowed[k];
  }
  if (!any) throw DataError("attention mask excludes every column");
  return allowed;
}

// ---------------------------------------------------------------------------
// Dropout

// Inverted dropout with a dedicated stream; masks hold 0 or 1/(1-rate).
struct DropoutStream {
  double rate = 0.0;
  SplitMix64 rng{0};

  bool active() const { return rate > 0.0; }

  template <class S>
  MatrixX<S> mask(Index rows, Index cols) {
    MatrixX<S> m(rows, cols);
    const S keep = S(1) / static_cast<S>(1.0 - rate);
    for (Index c = 0; c < cols; ++c) {
      for (Index r = 0; r < rows; ++r) {
        m(r, c) = rng.next_unit() < rate ? S(0) : keep;
      }
    }
    return m;
  }
};

// ---------------------------------------------------------------------------
// Scaled dot-product scores

// score(t, k) = (x_t Wq) . (x_k Wk) / sqrt(d_head)
template <class S>
MatrixX<S> attention_scores(const MatrixX<S>& x, const HeadParams<S>& head) {
  const S scale = S(1) / std::sqrt(static_cast<S>(head.wq.cols()));
  return (x * head.wq) * (x * head.wk).transpose() * scale;
}

template <class S>
MatrixX<S> attention_scores(const TurnVectors<S>& turns, int layer, int head,
                            const TedModel<S>& model) {
  return attention_scores(turns.vectors, model.layers.at(layer).heads.at(head));
}

// Raw and row-stochastic score matrices for one head; at the dialogue layer
// `normalized` carries the priority-adjusted weights.
template <class S = Scalar>
struct AttentionScores {
  MatrixX<S> raw;
  MatrixX<S> normalized;
};

// ---------------------------------------------------------------------------
// Multi-head self-attention block

template <class S = Scalar>
struct MhsaCache {
  MatrixX<S> input;
  std::vector<MatrixX<S>> q, k, v;          // per head, m' x d_head
  std::vector<MatrixX<S>> attn;             // per head, normalized pre-dropout
  std::vector<MatrixX<S>> attn_drop_mask;   // empty rows/cols when inactive
  MatrixX<S> concat;
  MatrixX<S> out_drop_mask;
  LayerNormCache<S> ln;
};

// One attention block: per-head scaled dot-product attention with optional
// log-priority column bias and speaker mask, head concat, optional output
// projection, dropout (training only), residual, layer norm.
template <class S>
MatrixX<S> mhsa_forward(const MatrixX<S>& x, const LayerParams<S>& layer,
                        const ModelTopology& topo,
                        const VectorX<S>* log_priority,
                        const std::vector<char>& allowed,
                        DropoutStream* dropout, MhsaCache<S>* cache,
                        std::vector<AttentionScores<S>>* capture = nullptr) {
  const Index m = x.rows();
  const int num_heads = topo.heads;
  const int dh = topo.dim / topo.heads;
  const bool drop = dropout != nullptr && dropout->active();
  constexpr S kInf = std::numeric_limits<S>::infinity();

  if (cache) {
    cache->input = x;
    cache->q.assign(num_heads, {});
    cache->k.assign(num_heads, {});
    cache->v.assign(num_heads, {});
    cache->attn.assign(num_heads, {});
    cache->attn_drop_mask.assign(num_heads, {});
  }

  MatrixX<S> concat(m, topo.dim);
  for (int j = 0; j < num_heads; ++j) {
    const HeadParams<S>& head = layer.heads[j];
    MatrixX<S> q = x * head.wq;
    MatrixX<S> k = x * head.wk;
    MatrixX<S> v = x * head.wv;
    const S scale = S(1) / std::sqrt(static_cast<S>(dh));
    MatrixX<S> raw = q * k.transpose() * scale;

    MatrixX<S> logits = raw;
    if (log_priority != nullptr) {
      logits.rowwise() += log_priority->transpose();
    }
    if (!allowed.empty()) {
      for (Index c = 0; c < m; ++c) {
        if (!allowed[static_cast<std::size_t>(c)]) {
          logits.col(c).setConstant(-kInf);
        }
      }
    }
    MatrixX<S> p(m, m);
    for (Index r = 0; r < m; ++r) p.row(r) = softmax_row(logits.row(r));

    if (capture) capture->push_back({raw, p});

    MatrixX<S> p_used = p;
    MatrixX<S> mask;
    if (drop) {
      mask = dropout->template mask<S>(m, m);
      p_used = p.cwiseProduct(mask);
    }
    concat.middleCols(static_cast<Index>(j) * dh, dh).noalias() = p_used * v;

    if (cache) {
      cache->q[j] = std::move(q);
      cache->k[j] = std::move(k);
      cache->v[j] = std::move(v);
      cache->attn[j] = std::move(p);
      if (drop) cache->attn_drop_mask[j] = std::move(mask);
    }
  }

  MatrixX<S> y = topo.output_projection ? MatrixX<S>(concat * layer.wo) : concat;
  if (cache) cache->concat = std::move(concat);

  if (drop) {
    MatrixX<S> mask = dropout->template mask<S>(m, topo.dim);
    y = y.cwiseProduct(mask);
    if (cache) cache->out_drop_mask = std::move(mask);
  }
  const MatrixX<S> residual = x + y;
  return layer_norm(residual, layer.ln_gain, layer.ln_bias,
                    cache ? &cache->ln : nullptr);
}

// Gradient of mhsa_forward. Accumulates into `grads` and returns dx.
template <class S>
MatrixX<S> mhsa_backward(const MatrixX<S>& dout, const MhsaCache<S>& cache,
                         const LayerParams<S>& layer, const ModelTopology& topo,
                         LayerParams<S>& grads) {
  const Index m = cache.input.rows();
  const int num_heads = topo.heads;
  const int dh = topo.dim / topo.heads;

  MatrixX<S> dresidual =
      layer_norm_backward(dout, cache.ln, layer.ln_gain, grads.ln_gain, grads.ln_bias);
  MatrixX<S> dx = dresidual;

  MatrixX<S> dy = cache.out_drop_mask.size() > 0
                      ? MatrixX<S>(dresidual.cwiseProduct(cache.out_drop_mask))
                      : dresidual;

  MatrixX<S> dconcat;
  if (topo.output_projection) {
    grads.wo.noalias() += cache.concat.transpose() * dy;
    dconcat.noalias() = dy * layer.wo.transpose();
  } else {
    dconcat = dy;
  }

  const S scale = S(1) / std::sqrt(static_cast<S>(dh));
  for (int j = 0; j < num_heads; ++j) {
    const auto dhead = dconcat.middleCols(static_cast<Index>(j) * dh, dh);
    const MatrixX<S>& p = cache.attn[j];
    const bool drop = cache.attn_drop_mask[j].size() > 0;
    const MatrixX<S> p_used = drop ? MatrixX<S>(p.cwiseProduct(cache.attn_drop_mask[j])) : p;

    MatrixX<S> dp_used = dhead * cache.v[j].transpose();
    MatrixX<S> dv = p_used.transpose() * dhead;
    MatrixX<S> dp = drop ? MatrixX<S>(dp_used.cwiseProduct(cache.attn_drop_mask[j])) : dp_used;

    // Softmax rows: ds = p .* (dp - rowdot(dp, p)). Constant column biases
    // (priority, mask) contribute nothing extra.
    MatrixX<S> dscores(m, m);
    for (Index r = 0; r < m; ++r) {
      const S dot = dp.row(r).dot(p.row(r));
      dscores.row(r) = p.row(r).array() * (dp.row(r).array() - dot);
    }
    dscores *= scale;

    MatrixX<S> dq = dscores * cache.k[j];
    MatrixX<S> dk = dscores.transpose() * cache.q[j];

    grads.heads[j].wq.noalias() += cache.input.transpose() * dq;
    grads.heads[j].wk.noalias() += cache.input.transpose() * dk;
    grads.heads[j].wv.noalias() += cache.input.transpose() * dv;

    dx.noalias() += dq * layer.heads[j].wq.transpose();
    dx.noalias() += dk * layer.heads[j].wk.transpose();
    dx.noalias() += dv * layer.heads[j].wv.transpose();
  }
  return dx;
}

// Single-block convenience on turn vectors (evaluation semantics, no
// dropout). Priority factors are admitted only at the final layer.
template <class S>
TurnVectors<S> mhsa_layer(const TurnVectors<S>& turns, int layer,
                          const TedModel<S>& model,
                          const PriorityFactors<S>* factors = nullptr,
                          AttentionMask mask = AttentionMask::all,
                          std::vector<AttentionScores<S>>* capture = nullptr) {
  if (layer < 0 || layer >= model.num_layers()) {
    throw DataError("layer index out of range");
  }
  VectorX<S> log_priority;
  if (factors != nullptr) {
    if (layer != model.num_layers() - 1) {
      throw DataError("priority factors apply only at the final layer");
    }
    if ((factors->values.array() <= S(0)).any()) {
      throw DataError("priority factors must be positive");
    }
    log_priority = factors->values.array().log();
  }
  const std::vector<char> allowed =
      allowed_columns(turns.speaker_ids, turns.current_pos, mask);
  TurnVectors<S> out = turns;
  out.vectors = mhsa_forward(turns.vectors, model.layers[layer], model.topology,
                             factors ? &log_priority : nullptr, allowed,
                             nullptr, static_cast<MhsaCache<S>*>(nullptr), capture);
  return out;
}

// ---------------------------------------------------------------------------
// Positional encoding

// Standard sinusoid table over positions 0..rows-1.
template <class S = Scalar>
MatrixX<S> sinusoid_table(Index rows, Index cols) {
  MatrixX<S> pe(rows, cols);
  for (Index pos = 0; pos < rows; ++pos) {
    for (Index i = 0; i < cols; i += 2) {
      const double angle =
          static_cast<double>(pos) /
          std::pow(10000.0, static_cast<double>(i) / static_cast<double>(cols));
      pe(pos, i) = static_cast<S>(std::sin(angle));
      if (i + 1 < cols) pe(pos, i + 1) = static_cast<S>(std::cos(angle));
    }
  }
  return pe;
}

// Adds sinusoidal codes over included-turn positions. Off by default.
template <class S>
TurnVectors<S> positional_encoding(TurnVectors<S> turns) {
  turns.vectors += sinusoid_table<S>(turns.vectors.rows(), turns.vectors.cols());
  return turns;
}

// ---------------------------------------------------------------------------
// Feed-forward block

template <class S = Scalar>
struct FfnCache {
  MatrixX<S> input;
  MatrixX<S> hidden;  // post-ReLU
  MatrixX<S> drop_mask;
  LayerNormCache<S> ln;
};

// Position-wise d -> 4d -> d map with ReLU, residual, layer norm.
template <class S>
MatrixX<S> ffn_forward(const MatrixX<S>& x, const FfnParams<S>& ffn,
                       DropoutStream* dropout, FfnCache<S>* cache) {
  MatrixX<S> hidden = (x * ffn.w1).rowwise() + ffn.b1.transpose();
  hidden = hidden.cwiseMax(S(0));
  MatrixX<S> f = (hidden * ffn.w2).rowwise() + ffn.b2.transpose();
  const bool drop = dropout != nullptr && dropout->active();
  if (cache) {
    cache->input = x;
    cache->hidden = hidden;
  }
  if (drop) {
    MatrixX<S> mask = dropout->template mask<S>(f.rows(), f.cols());
    f = f.cwiseProduct(mask);
    if (cache) cache->drop_mask = std::move(mask);
  } else if (cache) {
    cache->drop_mask.resize(0, 0);
  }
  const MatrixX<S> residual = x + f;
  return layer_norm(residual, ffn.ln_gain, ffn.ln_bias, cache ? &cache->ln : nullptr);
}

template <class S>
MatrixX<S> ffn_backward(const MatrixX<S>& dout, const FfnCache<S>& cache,
                        const FfnParams<S>& ffn, FfnParams<S>& grads) {
  MatrixX<S> dresidual =
      layer_norm_backward(dout, cache.ln, ffn.ln_gain, grads.ln_gain, grads.ln_bias);
  MatrixX<S> dx = dresidual;
  MatrixX<S> df = cache.drop_mask.size() > 0
                      ? MatrixX<S>(dresidual.cwiseProduct(cache.drop_mask))
                      : dresidual;
  grads.w2.noalias() += cache.hidden.transpose() * df;
  grads.b2 += df.colwise().sum().transpose();
  MatrixX<S> dhidden = df * ffn.w2.transpose();
  dhidden = dhidden.cwiseProduct((cache.hidden.array() > S(0)).template cast<S>().matrix());
  grads.w1.noalias() += cache.input.transpose() * dhidden;
  grads.b1 += dhidden.colwise().sum().transpose();
  dx.noalias() += dhidden * ffn.w1.transpose();
  return dx;
}

// Single-block convenience on turn vectors (evaluation semantics).
template <class S>
TurnVectors<S> ffn_layer(const TurnVectors<S>& turns, const FfnParams<S>& params) {
  TurnVectors<S> out = turns;
  out.vectors = ffn_forward(turns.vectors, params, nullptr,
                            static_cast<FfnCache<S>*>(nullptr));
  return out;
}

// ---------------------------------------------------------------------------
// Classifier head

template <class S = Scalar>
struct Prediction {
  VectorX<S> logits;
  VectorX<S> probabilities;
  int label = 0;  // argmax, lowest index on ties
};

template <class S>
Prediction<S> classify(const VectorX<S>& current, const ClassifierParams<S>& params) {
  Prediction<S> pred;
  pred.logits = params.weight * current + params.bias;
  pred.probabilities = softmax_row(pred.logits.transpose()).transpose();
  pred.label = 0;
  for (Index l = 1; l < pred.logits.size(); ++l) {
    if (pred.logits[l] > pred.logits[pred.label]) pred.label = static_cast<int>(l);
  }
  return pred;
}

}  // namespace ted
