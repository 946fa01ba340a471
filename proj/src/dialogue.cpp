#include "ted/dialogue.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>
#include <unordered_map>

#include "ted/types.hpp"

namespace ted {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_whitespace(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

[[noreturn]] void line_error(const std::filesystem::path& path, int line,
                             const std::string& what) {
  throw DataError(path.string() + ":" + std::to_string(line) + ": " + what);
}

Turn parse_turn(const json& j, const LabelSet& labels,
                const std::filesystem::path& path, int line) {
  if (!j.is_object()) line_error(path, line, "turn is not a JSON object");
  Turn turn;
  turn.speaker = j.value("speaker", std::string{});
  if (j.contains("tokens") && !j["tokens"].is_null()) {
    for (const auto& t : j["tokens"]) turn.tokens.push_back(t.get<std::string>());
  } else if (j.contains("text")) {
    turn.tokens = split_whitespace(j["text"].get<std::string>());
  }
  if (turn.tokens.empty()) line_error(path, line, "turn has no tokens");
  if (j.contains("label") && !j["label"].is_null()) {
    const auto name = j["label"].get<std::string>();
    const int idx = labels.index_of(name);
    if (idx < 0) line_error(path, line, "unknown label \"" + name + "\"");
    turn.label = idx;
  }
  return turn;
}

}  // namespace

Dialogue remap_speaker_ids(Dialogue dialogue) {
  std::unordered_map<std::string, int> ids;
  dialogue.speaker_ids.clear();
  dialogue.speaker_ids.reserve(dialogue.turns.size());
  for (const Turn& turn : dialogue.turns) {
    auto [it, inserted] = ids.emplace(turn.speaker, static_cast<int>(ids.size()));
    dialogue.speaker_ids.push_back(it->second);
    (void)inserted;
  }
  return dialogue;
}

LabelSet load_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open labels file: " + path.string());
  LabelSet labels;
  std::optional<std::string> neutral_name;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("!neutral ", 0) == 0) {
      if (neutral_name) throw DataError("duplicate !neutral line in " + path.string());
      neutral_name = trim(line.substr(9));
      continue;
    }
    if (labels.index_of(line) >= 0) {
      throw DataError("duplicate label \"" + line + "\" in " + path.string());
    }
    labels.names.push_back(line);
  }
  if (labels.names.empty()) throw DataError("labels file is empty: " + path.string());
  if (neutral_name) {
    const int idx = labels.index_of(*neutral_name);
    if (idx < 0) {
      throw DataError("!neutral names unknown label \"" + *neutral_name + "\"");
    }
    labels.neutral_index = idx;
  }
  return labels;
}

void save_labels(const LabelSet& labels, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write labels file: " + path.string());
  for (const auto& name : labels.names) out << name << "\n";
  if (labels.neutral_index) {
    out << "!neutral " << labels.names[*labels.neutral_index] << "\n";
  }
}

std::vector<Dialogue> load_dialogues(const std::filesystem::path& path,
                                     const LabelSet& labels) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dialogue file: " + path.string());
  std::vector<Dialogue> dialogues;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) line_error(path, line_no, "malformed JSON");
    if (!j.is_object()) line_error(path, line_no, "line is not a JSON object");
    Dialogue d;
    d.id = j.value("id", std::string{});
    if (!j.contains("turns") || !j["turns"].is_array() || j["turns"].empty()) {
      line_error(path, line_no, "dialogue has no turns");
    }
    for (const auto& jt : j["turns"]) {
      d.turns.push_back(parse_turn(jt, labels, path, line_no));
    }
    dialogues.push_back(remap_speaker_ids(std::move(d)));
  }
  return dialogues;
}

void save_dialogues(const std::vector<Dialogue>& dialogues,
                    const LabelSet& labels, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dialogue file: " + path.string());
  for (const Dialogue& d : dialogues) {
    json jd;
    jd["id"] = d.id;
    jd["turns"] = json::array();
    for (const Turn& turn : d.turns) {
      json jt;
      jt["speaker"] = turn.speaker;
      jt["tokens"] = turn.tokens;
      jt["label"] = turn.label ? json(labels.names.at(*turn.label)) : json(nullptr);
      jd["turns"].push_back(std::move(jt));
    }
    out << jd.dump() << "\n";
  }
}

}  // namespace ted
