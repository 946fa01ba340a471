#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ted/attention.hpp"
#include "ted/dialogue.hpp"
#include "ted/embedding.hpp"
#include "ted/model.hpp"
#include "ted/pipeline.hpp"
#include "ted/priority.hpp"
#include "ted/synth.hpp"
#include "ted/train.hpp"

namespace ted {

// Flat `key = value` configuration with a closed key set. Values are kept as
// the exact strings given, so the printed resolved config re-fed as a file
// reproduces the identical run.
class RunConfig {
 public:
  RunConfig();

  // Throws UsageError on unknown keys or values outside a key's domain.
  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  bool is_default(const std::string& key) const;

  // `key = value` lines; '#' comments and blank lines are skipped.
  void load_file(const std::filesystem::path& path);
  // Accepts a single "key=value" (as from a --set flag).
  void set_pair(const std::string& pair);

  // All keys in sorted order, one "key = value" per line.
  std::string resolved() const;

  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::uint64_t get_seed(const std::string& key) const;

  // Assembled module configs.
  EncodeConfig encode_config() const;
  ModelTopology topology(int labels) const;
  bool priority_enabled() const;
  // Requires a numeric priority.sigma; run resolve_sigma first when the
  // decay needs one.
  PriorityConfig priority_config() const;
  StackConfig stack_config() const;
  TrainConfig train_config() const;
  SynthConfig synth_config() const;
  Embedder<> embedder() const;

  // Turns priority.sigma presets ("iemocap", ...) or "auto" (population std
  // of turns per dialogue over `train_data`) into a number, storing it back
  // so the resolved config and checkpoints carry the value.
  void resolve_sigma(const std::vector<Dialogue>* train_data);

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> defaults_;
};

// Population standard deviation of turns per dialogue.
double turns_per_dialogue_std(const std::vector<Dialogue>& dialogues);

}  // namespace ted
