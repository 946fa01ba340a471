#pragma once

#include <map>
#include <string>
#include <vector>

#include "ted/dialogue.hpp"

namespace ted {

// CUST: concat utterances with special tokens. [TURN] closes every turn,
// [SEP] wraps the current turn, optional [SPKk] prefixes each utterance.
inline constexpr const char* kTurnMarker = "[TURN]";
inline constexpr const char* kSepMarker = "[SEP]";

std::string speaker_marker(int speaker_id);  // "[SPK0]", "[SPK1]", ...
bool is_marker_token(const std::string& token);

enum class ContextMode { past, past_and_future };

// Pass as max_turns for no windowing.
inline constexpr int kUnlimitedTurns = 1 << 30;

// Half-open token index range.
struct Span {
  int lo = 0;
  int hi = 0;
};

// Multi-turn token stream for one (dialogue, current turn) pair. Spans cover
// each included turn's utterance tokens only; markers and [SPKk] never fall
// inside a span.
struct CustSequence {
  std::vector<std::string> tokens;
  std::vector<Span> spans;          // one per included turn, in order
  std::vector<int> included_turns;  // original turn indices, ascending
  int current_pos = 0;              // index of the current turn in included_turns

  int num_tokens() const { return static_cast<int>(tokens.size()); }
  int num_turns() const { return static_cast<int>(included_turns.size()); }
};

// Renders context turns as `u_t [TURN]` and the current turn as
// `[SEP] u_c [SEP] [TURN]`. When the window exceeds max_turns, oldest past
// turns are dropped first, then the most distant future turns; the current
// turn is never dropped.
CustSequence cust_encode(const Dialogue& dialogue, int current_turn,
                         ContextMode context, int max_turns,
                         bool insert_speaker_tokens);

// Deterministic token -> id mapping. [TURN] and [SEP] take ids 0 and 1,
// [SPKk] markers the next ids in k order, then words in first-appearance
// order across the sequences.
std::map<std::string, int> vocabulary(const std::vector<CustSequence>& sequences);

}  // namespace ted
