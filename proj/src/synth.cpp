#include "ted/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ted/rng.hpp"
#include "ted/types.hpp"

namespace ted {

void SynthConfig::validate() const {
  if (dialogues < 1 || dev_dialogues < 1 || test_dialogues < 1) {
    throw UsageError("synth split sizes must be positive");
  }
  if (turns_mean <= 0 || turns_std < 0) {
    throw UsageError("synth.turns_mean must be positive and synth.turns_std nonnegative");
  }
  if (speakers < 1) throw UsageError("synth.speakers must be >= 1");
  if (labels < 2) throw UsageError("synth.labels must be >= 2");
  if (cue_strength < 0.0 || cue_strength > 1.0) {
    throw UsageError("synth.cue_strength must be in [0,1]");
  }
  if (vocab_size < 1) throw UsageError("synth.vocab_size must be >= 1");
}

namespace {

Dialogue make_dialogue(const SynthConfig& cfg, const std::string& id,
                       SplitMix64& rng) {
  Dialogue d;
  d.id = id;
  const int turns = std::max(
      2, static_cast<int>(std::llround(rng.next_gaussian() * cfg.turns_std +
                                       cfg.turns_mean)));
  // Most recent cue label per speaker, -1 before the first appearance.
  std::vector<int> last_cue(static_cast<std::size_t>(cfg.speakers), -1);
  for (int t = 0; t < turns; ++t) {
    const int spk = t % cfg.speakers;  // strict turn taking
    Turn turn;
    turn.speaker = "S" + std::to_string(spk);

    const int fillers = 2 + static_cast<int>(rng.next_below(3));
    for (int i = 0; i < fillers; ++i) {
      const auto w = rng.next_below(static_cast<std::uint64_t>(cfg.vocab_size));
      turn.tokens.push_back("w" + std::to_string(spk) + "_" + std::to_string(w));
    }
    const int own_cue =
        static_cast<int>(rng.next_below(static_cast<std::uint64_t>(cfg.labels)));
    turn.tokens.push_back("cue" + std::to_string(own_cue));

    const bool use_past = rng.next_unit() < cfg.cue_strength;
    const int past_cue = last_cue[static_cast<std::size_t>(spk)];
    turn.label = (use_past && past_cue >= 0) ? past_cue : own_cue;
    last_cue[static_cast<std::size_t>(spk)] = own_cue;

    d.turns.push_back(std::move(turn));
    d.speaker_ids.push_back(spk);
  }
  return d;
}

std::vector<Dialogue> make_split(const SynthConfig& cfg, const char* split,
                                 int count, std::uint64_t seed) {
  SplitMix64 rng = seeded_stream(seed, std::string("synth-") + split);
  std::vector<Dialogue> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out.push_back(make_dialogue(
        cfg, std::string("synth-") + split + "-" + std::to_string(i), rng));
  }
  return out;
}

}  // namespace

SynthData generate(const SynthConfig& cfg) {
  cfg.validate();
  SynthData data;
  data.labels.names.reserve(static_cast<std::size_t>(cfg.labels));
  for (int l = 0; l < cfg.labels; ++l) {
    data.labels.names.push_back("label" + std::to_string(l));
  }
  data.train = make_split(cfg, "train", cfg.dialogues, cfg.seed);
  data.dev = make_split(cfg, "dev", cfg.dev_dialogues, cfg.seed);
  data.test = make_split(cfg, "test", cfg.test_dialogues, cfg.seed);
  return data;
}

}  // namespace ted
