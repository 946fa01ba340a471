#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ted {

// Ordered emotion label inventory. `neutral_index` flags the label excluded
// by the neutral-free micro-F1 convention.
struct LabelSet {
  std::vector<std::string> names;
  std::optional<int> neutral_index;

  int size() const { return static_cast<int>(names.size()); }

  // Index of `name`, or -1 when absent.
  int index_of(const std::string& name) const {
    for (int i = 0; i < size(); ++i) {
      if (names[i] == name) return i;
    }
    return -1;
  }
};

// One utterance by one speaker. `label` is absent for inference-only turns.
struct Turn {
  std::string speaker;
  std::vector<std::string> tokens;
  std::optional<int> label;
};

struct Dialogue {
  std::string id;
  std::vector<Turn> turns;
  // Dense per-dialogue speaker ids, 0-based in first-appearance order.
  std::vector<int> speaker_ids;

  int num_turns() const { return static_cast<int>(turns.size()); }
};

// Reassigns speaker_ids densely in first-appearance order, scoped to this
// dialogue only. Idempotent.
Dialogue remap_speaker_ids(Dialogue dialogue);

// Labels file: one label name per line; an optional `!neutral <name>` line
// flags the neutral label. Blank lines and `#` comments are skipped.
LabelSet load_labels(const std::filesystem::path& path);
void save_labels(const LabelSet& labels, const std::filesystem::path& path);

// JSONL: one dialogue object per line,
//   {"id": str, "turns": [{"speaker": str, "text": str,
//                          "tokens": [str] (optional), "label": str|null}]}
// A "tokens" array wins over whitespace-splitting "text". Speaker ids are
// remapped on load. Unknown label strings and empty turns are errors that
// name the offending line.
std::vector<Dialogue> load_dialogues(const std::filesystem::path& path,
                                     const LabelSet& labels);
void save_dialogues(const std::vector<Dialogue>& dialogues,
                    const LabelSet& labels, const std::filesystem::path& path);

}  // namespace ted
