#include "ted/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ted {
namespace {

std::string trim(const std::string& s) {
  std::size_t lo = 0, hi = s.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
  while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
  return s.substr(lo, hi - lo);
}

bool one_of(const std::string& v, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (v == a) return true;
  }
  return false;
}

bool parses_as_double(const std::string& v) {
  std::size_t pos = 0;
  try {
    (void)std::stod(v, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == v.size();
}

bool parses_as_int(const std::string& v) {
  std::size_t pos = 0;
  try {
    (void)std::stoll(v, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == v.size();
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RunConfig::RunConfig() {
  auto def = [this](const char* key, const char* value) {
    defaults_[key] = value;
    values_[key] = value;
  };
  def("data.train", "");
  def("data.dev", "");
  def("data.test", "");
  def("data.labels", "");
  def("out.dir", "out");
  def("checkpoint.path", "");

  def("context.mode", "past");
  def("context.max_turns", "0");  // 0 = unlimited
  def("context.speaker_tokens", "false");

  def("embed.mode", "hash");
  def("embed.source", "");
  def("embed.seed", "1111");

  def("model.dim", "32");
  def("model.layers", "2");
  def("model.heads", "4");

  def("attn.output_projection", "true");
  def("attn.positional_encoding", "false");
  def("attn.feed_forward", "false");
  def("attn.mask", "all");

  def("priority.enabled", "true");
  def("priority.target", "same_speaker");
  def("priority.decay", "normdist");
  def("priority.gamma", "2");
  def("priority.sigma", "auto");

  def("train.lr", "0.001");
  def("train.lr_decay", "0.8");
  def("train.patience", "5");
  def("train.batch_size", "4");
  def("train.max_epochs", "50");
  def("train.dropout", "0.1");
  def("train.seed", "1111");
  def("train.metric", "weighted_f1");

  def("synth.dialogues", "200");
  def("synth.dev_dialogues", "50");
  def("synth.test_dialogues", "100");
  def("synth.turns_mean", "8");
  def("synth.turns_std", "3");
  def("synth.speakers", "2");
  def("synth.labels", "4");
  def("synth.cue_strength", "0.9");
  def("synth.vocab_size", "50");
  def("synth.seed", "1111");
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown config key: " + key);

  auto expect = [&](bool ok, const char* what) {
    if (!ok) {
      throw UsageError("config key " + key + " expects " + what + ", got \"" +
                       value + "\"");
    }
  };
  if (key == "context.mode") {
    expect(one_of(value, {"past", "past_and_future"}), "past|past_and_future");
  } else if (key == "embed.mode") {
    expect(one_of(value, {"hash", "file"}), "hash|file");
  } else if (key == "attn.mask") {
    expect(one_of(value, {"all", "same_speaker_only", "listener_only"}),
           "all|same_speaker_only|listener_only");
  } else if (key == "priority.target") {
    expect(one_of(value, {"all", "same_speaker", "listener"}),
           "all|same_speaker|listener");
  } else if (key == "priority.decay") {
    expect(one_of(value, {"constant", "normdist"}), "constant|normdist");
  } else if (key == "train.metric") {
    expect(one_of(value, {"weighted_f1", "micro_f1"}), "weighted_f1|micro_f1");
  } else if (key == "priority.sigma") {
    expect(value == "auto" || sigma_preset(value).has_value() ||
               parses_as_double(value),
           "a number, a corpus preset, or auto");
  } else if (one_of(key, {"context.speaker_tokens", "attn.output_projection",
                          "attn.positional_encoding", "attn.feed_forward",
                          "priority.enabled"})) {
    expect(one_of(value, {"true", "false"}), "true|false");
  } else if (one_of(key, {"train.lr", "train.lr_decay", "train.dropout",
                          "priority.gamma", "synth.turns_mean",
                          "synth.turns_std", "synth.cue_strength"})) {
    expect(parses_as_double(value), "a number");
  } else if (one_of(key, {"context.max_turns", "model.dim", "model.layers",
                          "model.heads", "train.patience", "train.batch_size",
                          "train.max_epochs", "synth.dialogues",
                          "synth.dev_dialogues", "synth.test_dialogues",
                          "synth.speakers", "synth.labels",
                          "synth.vocab_size"})) {
    expect(parses_as_int(value), "an integer");
  } else if (one_of(key, {"train.seed", "embed.seed", "synth.seed"})) {
    expect(parses_as_int(value) && std::stoll(value) >= 0,
           "a nonnegative integer");
  }
  it->second = value;
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown config key: " + key);
  return it->second;
}

bool RunConfig::is_default(const std::string& key) const {
  return get(key) == defaults_.at(key);
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path.string() + ":" + std::to_string(lineno) +
                       ": expected `key = value`");
    }
    set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
}

void RunConfig::set_pair(const std::string& pair) {
  const std::size_t eq = pair.find('=');
  if (eq == std::string::npos) {
    throw UsageError("expected key=value, got \"" + pair + "\"");
  }
  set(trim(pair.substr(0, eq)), trim(pair.substr(eq + 1)));
}

std::string RunConfig::resolved() const {
  std::ostringstream out;
  for (const auto& [key, value] : values_) out << key << " = " << value << "\n";
  return out.str();
}

int RunConfig::get_int(const std::string& key) const {
  return static_cast<int>(std::stoll(get(key)));
}

double RunConfig::get_double(const std::string& key) const {
  return std::stod(get(key));
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true") return true;
  if (v == "false") return false;
  throw UsageError("config key " + key + " expects true|false, got \"" + v + "\"");
}

std::uint64_t RunConfig::get_seed(const std::string& key) const {
  return static_cast<std::uint64_t>(std::stoull(get(key)));
}

EncodeConfig RunConfig::encode_config() const {
  EncodeConfig enc;
  enc.context = get("context.mode") == "past" ? ContextMode::past
                                              : ContextMode::past_and_future;
  const int max_turns = get_int("context.max_turns");
  if (max_turns < 0) throw UsageError("context.max_turns must be >= 0");
  enc.max_turns = max_turns == 0 ? kUnlimitedTurns : max_turns;
  enc.speaker_tokens = get_bool("context.speaker_tokens");
  return enc;
}

ModelTopology RunConfig::topology(int labels) const {
  ModelTopology t;
  t.dim = get_int("model.dim");
  t.layers = get_int("model.layers");
  t.heads = get_int("model.heads");
  t.labels = labels;
  t.feed_forward = get_bool("attn.feed_forward");
  t.output_projection = get_bool("attn.output_projection");
  return t;
}

bool RunConfig::priority_enabled() const { return get_bool("priority.enabled"); }

PriorityConfig RunConfig::priority_config() const {
  PriorityConfig p;
  const std::string& target = get("priority.target");
  p.target = target == "all"           ? PriorityTarget::all
             : target == "same_speaker" ? PriorityTarget::same_speaker
                                        : PriorityTarget::listener;
  p.decay = get("priority.decay") == "constant" ? PriorityDecay::constant
                                                : PriorityDecay::normdist;
  p.gamma = get_double("priority.gamma");
  const std::string& sigma = get("priority.sigma");
  if (p.decay == PriorityDecay::normdist && !parses_as_double(sigma)) {
    throw UsageError("priority.sigma is \"" + sigma +
                     "\"; resolve it to a number first");
  }
  p.sigma = parses_as_double(sigma) ? std::stod(sigma) : 0.0;
  return p;
}

StackConfig RunConfig::stack_config() const {
  StackConfig s;
  s.use_positional_encoding = get_bool("attn.positional_encoding");
  s.use_priority = priority_enabled();
  const std::string& mask = get("attn.mask");
  s.mask = mask == "all"                ? AttentionMask::all
           : mask == "same_speaker_only" ? AttentionMask::same_speaker_only
                                         : AttentionMask::listener_only;
  return s;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.lr = get_double("train.lr");
  t.lr_decay = get_double("train.lr_decay");
  t.patience = get_int("train.patience");
  t.batch_size = get_int("train.batch_size");
  t.max_epochs = get_int("train.max_epochs");
  t.dropout = get_double("train.dropout");
  t.seed = get_seed("train.seed");
  t.metric = get("train.metric") == "micro_f1" ? Metric::micro_f1
                                               : Metric::weighted_f1;
  t.validate();
  return t;
}

SynthConfig RunConfig::synth_config() const {
  SynthConfig s;
  s.dialogues = get_int("synth.dialogues");
  s.dev_dialogues = get_int("synth.dev_dialogues");
  s.test_dialogues = get_int("synth.test_dialogues");
  s.turns_mean = get_double("synth.turns_mean");
  s.turns_std = get_double("synth.turns_std");
  s.speakers = get_int("synth.speakers");
  s.labels = get_int("synth.labels");
  s.cue_strength = get_double("synth.cue_strength");
  s.vocab_size = get_int("synth.vocab_size");
  s.seed = get_seed("synth.seed");
  s.validate();
  return s;
}

Embedder<> RunConfig::embedder() const {
  Embedder<> e;
  e.mode = get("embed.mode") == "hash" ? EmbeddingMode::hash : EmbeddingMode::file;
  e.dim = get_int("model.dim");
  e.seed = get_seed("embed.seed");
  const std::string& source = get("embed.source");
  if (!source.empty()) e.source = source;
  if (e.mode == EmbeddingMode::file && !e.source) {
    throw UsageError("embed.mode = file requires embed.source");
  }
  return e;
}

void RunConfig::resolve_sigma(const std::vector<Dialogue>* train_data) {
  const std::string sigma = get("priority.sigma");
  if (parses_as_double(sigma)) return;
  if (const auto preset = sigma_preset(sigma)) {
    set("priority.sigma", format_double(*preset));
    return;
  }
  if (sigma == "auto") {
    if (train_data == nullptr || train_data->empty()) {
      throw UsageError(
          "priority.sigma = auto needs training data; pass a preset or number");
    }
    set("priority.sigma", format_double(turns_per_dialogue_std(*train_data)));
    return;
  }
  throw UsageError("unrecognized priority.sigma value: " + sigma);
}

double turns_per_dialogue_std(const std::vector<Dialogue>& dialogues) {
  if (dialogues.empty()) throw DataError("no dialogues");
  double mean = 0.0;
  for (const Dialogue& d : dialogues) mean += d.num_turns();
  mean /= static_cast<double>(dialogues.size());
  double var = 0.0;
  for (const Dialogue& d : dialogues) {
    const double diff = d.num_turns() - mean;
    var += diff * diff;
  }
  var /= static_cast<double>(dialogues.size());
  return std::sqrt(var);
}

}  // namespace ted
