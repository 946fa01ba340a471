#pragma once

#include <cstdint>
#include <vector>

#include "ted/dialogue.hpp"

namespace ted {

// Controls for the synthetic dialogue task. Each turn carries filler tokens
// from a speaker-specific vocabulary plus one cue token; with probability
// cue_strength the gold label copies the most recent same-speaker cue from a
// past turn instead of the turn's own cue, which makes same-speaker history
// the information-bearing signal.
struct SynthConfig {
  int dialogues = 200;  // train split; dev/test sized separately
  int dev_dialogues = 50;
  int test_dialogues = 100;
  double turns_mean = 8.0;
  double turns_std = 3.0;
  int speakers = 2;
  int labels = 4;
  double cue_strength = 0.9;
  int vocab_size = 50;  // filler word types per speaker
  std::uint64_t seed = 1111;

  void validate() const;
};

struct SynthData {
  std::vector<Dialogue> train, dev, test;
  LabelSet labels;
};

// Fully seed-determined splits with disjoint dialogue ids.
SynthData generate(const SynthConfig& cfg);

}  // namespace ted
