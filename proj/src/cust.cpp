#include "ted/cust.hpp"

#include <algorithm>
#include <set>

#include "ted/types.hpp"

namespace ted {

std::string speaker_marker(int speaker_id) {
  return "[SPK" + std::to_string(speaker_id) + "]";
}

bool is_marker_token(const std::string& token) {
  if (token == kTurnMarker || token == kSepMarker) return true;
  if (token.size() > 5 && token.rfind("[SPK", 0) == 0 && token.back() == ']') {
    return std::all_of(token.begin() + 4, token.end() - 1,
                       [](unsigned char c) { return std::isdigit(c); });
  }
  return false;
}

CustSequence cust_encode(const Dialogue& dialogue, int current_turn,
                         ContextMode context, int max_turns,
                         bool insert_speaker_tokens) {
  const int m = dialogue.num_turns();
  if (current_turn < 0 || current_turn >= m) {
    throw DataError("current turn " + std::to_string(current_turn) +
                    " out of range for dialogue \"" + dialogue.id + "\" with " +
                    std::to_string(m) + " turns");
  }
  if (max_turns < 1) throw DataError("max_turns must be >= 1");

  // Contiguous window [first, last]; shrink from the past side first, then
  // from the far future, keeping the current turn.
  int first = 0;
  int last = (context == ContextMode::past) ? current_turn : m - 1;
  while (last - first + 1 > max_turns) {
    if (first < current_turn) {
      ++first;
    } else {
      --last;
    }
  }

  CustSequence seq;
  for (int t = first; t <= last; ++t) {
    seq.included_turns.push_back(t);
    const bool current = (t == current_turn);
    if (current) {
      seq.current_pos = static_cast<int>(seq.included_turns.size()) - 1;
      seq.tokens.push_back(kSepMarker);
    }
    if (insert_speaker_tokens) {
      seq.tokens.push_back(speaker_marker(dialogue.speaker_ids.at(t)));
    }
    Span span;
    span.lo = seq.num_tokens();
    for (const std::string& tok : dialogue.turns[t].tokens) {
      seq.tokens.push_back(tok);
    }
    span.hi = seq.num_tokens();
    seq.spans.push_back(span);
    if (current) seq.tokens.push_back(kSepMarker);
    seq.tokens.push_back(kTurnMarker);
  }
  return seq;
}

std::map<std::string, int> vocabulary(const std::vector<CustSequence>& sequences) {
  std::map<std::string, int> vocab;
  vocab[kTurnMarker] = 0;
  vocab[kSepMarker] = 1;

  // Reserve speaker-marker ids below all words, ordered by speaker id.
  std::set<std::string> spk_markers;
  for (const CustSequence& seq : sequences) {
    for (const std::string& tok : seq.tokens) {
      if (tok != kTurnMarker && tok != kSepMarker && is_marker_token(tok)) {
        spk_markers.insert(tok);
      }
    }
  }
  std::vector<std::string> spk_sorted(spk_markers.begin(), spk_markers.end());
  std::sort(spk_sorted.begin(), spk_sorted.end(),
            [](const std::string& a, const std::string& b) {
              return std::stoi(a.substr(4)) < std::stoi(b.substr(4));
            });
  int next_id = 2;
  for (const std::string& tok : spk_sorted) vocab[tok] = next_id++;

  for (const CustSequence& seq : sequences) {
    for (const std::string& tok : seq.tokens) {
      if (!is_marker_token(tok) && !vocab.count(tok)) vocab[tok] = next_id++;
    }
  }
  return vocab;
}

}  // namespace ted
