#pragma once

#include <vector>

#include "ted/cust.hpp"
#include "ted/embedding.hpp"
#include "ted/types.hpp"

namespace ted {

// One mean vector per included turn. Row t pools the token vectors inside
// turn t's utterance span; marker tokens never contribute.
template <class S = Scalar>
struct TurnVectors {
  MatrixX<S> vectors;               // m' x d, row per included turn
  int current_pos = 0;              // row of the current turn
  std::vector<int> speaker_ids;     // per included turn
  std::vector<int> turn_indices;    // original dialogue turn indices

  Index num_turns() const { return vectors.rows(); }
  Index dim() const { return vectors.cols(); }
};

template <class S = Scalar>
TurnVectors<S> pool_turns(const TokenEmbeddings<S>& emb, const CustSequence& seq,
                          const std::vector<int>& dialogue_speaker_ids) {
  if (emb.num_tokens() != seq.num_tokens()) {
    throw DataError("embedding row count " + std::to_string(emb.num_tokens()) +
                    " does not match sequence token count " +
                    std::to_string(seq.num_tokens()));
  }
  TurnVectors<S> tv;
  tv.vectors.resize(seq.num_turns(), emb.dim());
  tv.current_pos = seq.current_pos;
  tv.turn_indices = seq.included_turns;
  tv.speaker_ids.reserve(seq.num_turns());
  for (int t = 0; t < seq.num_turns(); ++t) {
    const Span& span = seq.spans[t];
    if (span.hi <= span.lo) {
      throw DataError("empty utterance span for included turn " +
                      std::to_string(t));
    }
    tv.vectors.row(t) =
        emb.vectors.middleRows(span.lo, span.hi - span.lo).colwise().mean();
    tv.speaker_ids.push_back(dialogue_speaker_ids.at(seq.included_turns[t]));
  }
  return tv;
}

}  // namespace ted
