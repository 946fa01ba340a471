#pragma once

#include <optional>
#include <vector>

#include "ted/attention.hpp"
#include "ted/cust.hpp"
#include "ted/dialogue.hpp"
#include "ted/embedding.hpp"
#include "ted/model.hpp"
#include "ted/pooling.hpp"
#include "ted/priority.hpp"
#include "ted/types.hpp"

namespace ted {

// Everything the attention stack needs for one classification target: pooled
// turn vectors plus the precomputed log priority column bias (empty when
// priority weighting is off).
template <class S = Scalar>
struct Example {
  TurnVectors<S> turns;
  VectorX<S> log_priority;
  int gold = -1;  // label index, -1 when unlabeled
};

// Stack-level switches; model topology carries the structural ones.
struct StackConfig {
  bool use_positional_encoding = false;
  bool use_priority = true;
  AttentionMask mask = AttentionMask::all;
};

// How raw dialogues become examples.
struct EncodeConfig {
  ContextMode context = ContextMode::past;
  int max_turns = kUnlimitedTurns;
  bool speaker_tokens = false;
};

template <class S>
Example<S> build_example(const Dialogue& dialogue, int current_turn,
                         const EncodeConfig& enc, const Embedder<S>& embedder,
                         const PriorityConfig& priority, bool use_priority) {
  CustSequence seq = cust_encode(dialogue, current_turn, enc.context,
                                 enc.max_turns, enc.speaker_tokens);
  TokenEmbeddings<S> emb = embedder.embed(seq);
  Example<S> ex;
  ex.turns = pool_turns(emb, seq, dialogue.speaker_ids);
  if (use_priority) {
    PriorityFactors<S> factors =
        priority_factors<S>(ex.turns.speaker_ids, ex.turns.turn_indices,
                            ex.turns.current_pos, priority);
    ex.log_priority = factors.values.array().log();
  }
  if (dialogue.turns[static_cast<std::size_t>(current_turn)].label) {
    ex.gold = *dialogue.turns[static_cast<std::size_t>(current_turn)].label;
  }
  return ex;
}

// Per-example caches for one pass through the stack.
template <class S = Scalar>
struct StackCache {
  MatrixX<S> stack_input;  // turn vectors after optional positional encoding
  std::vector<MhsaCache<S>> mhsa;
  std::vector<FfnCache<S>> ffn;
  MatrixX<S> final_states;
};

// Attention matrices captured for inspection: trace[layer][head].
template <class S = Scalar>
using AttentionTrace = std::vector<std::vector<AttentionScores<S>>>;

// Runs the block stack on pooled turn vectors. The priority bias enters only
// at the final layer; the speaker mask applies at every layer. This is the
// single forward used by evaluation (no dropout, no cache) and by training.
template <class S>
MatrixX<S> stack_forward(const TedModel<S>& model, const Example<S>& ex,
                         const StackConfig& cfg, DropoutStream* dropout = nullptr,
                         StackCache<S>* cache = nullptr,
                         AttentionTrace<S>* trace = nullptr) {
  MatrixX<S> h = ex.turns.vectors;
  if (cfg.use_positional_encoding) {
    h += sinusoid_table<S>(h.rows(), h.cols());
  }
  if (cache) {
    cache->stack_input = h;
    cache->mhsa.resize(static_cast<std::size_t>(model.num_layers()));
    cache->ffn.resize(model.topology.feed_forward
                          ? static_cast<std::size_t>(model.num_layers())
                          : 0);
  }
  const std::vector<char> allowed =
      allowed_columns(ex.turns.speaker_ids, ex.turns.current_pos, cfg.mask);
  const bool priority = cfg.use_priority && ex.log_priority.size() > 0;
  if (trace) trace->assign(static_cast<std::size_t>(model.num_layers()), {});

  for (int l = 0; l < model.num_layers(); ++l) {
    const bool last = l == model.num_layers() - 1;
    const VectorX<S>* bias = (priority && last) ? &ex.log_priority : nullptr;
    h = mhsa_forward(h, model.layers[static_cast<std::size_t>(l)], model.topology,
                     bias, allowed, dropout,
                     cache ? &cache->mhsa[static_cast<std::size_t>(l)] : nullptr,
                     trace ? &(*trace)[static_cast<std::size_t>(l)] : nullptr);
    if (model.topology.feed_forward) {
      h = ffn_forward(h, *model.layers[static_cast<std::size_t>(l)].ffn, dropout,
                      cache ? &cache->ffn[static_cast<std::size_t>(l)] : nullptr);
    }
  }
  if (cache) cache->final_states = h;
  return h;
}

// Full classification of one example.
template <class S>
Prediction<S> predict(const TedModel<S>& model, const Example<S>& ex,
                      const StackConfig& cfg, AttentionTrace<S>* trace = nullptr) {
  const MatrixX<S> h = stack_forward(model, ex, cfg, nullptr,
                                     static_cast<StackCache<S>*>(nullptr), trace);
  const VectorX<S> current = h.row(ex.turns.current_pos).transpose();
  return classify(current, model.classifier);
}

// Dialogue-in, prediction-out convenience used by the CLI.
template <class S>
Prediction<S> forward(const Dialogue& dialogue, int current_turn,
                      const TedModel<S>& model, const EncodeConfig& enc,
                      const Embedder<S>& embedder, const PriorityConfig& priority,
                      const StackConfig& cfg, AttentionTrace<S>* trace = nullptr) {
  const Example<S> ex = build_example(dialogue, current_turn, enc, embedder,
                                      priority, cfg.use_priority);
  return predict(model, ex, cfg, trace);
}

}  // namespace ted
