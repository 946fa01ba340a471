#include <doctest.h>

#include <string>
#include <vector>

#include "ted/dialogue.hpp"
#include "ted/types.hpp"
#include "test_util.hpp"

using ted::DataError;
using ted::Dialogue;
using ted::LabelSet;
using ted::Turn;
using testutil::TempDir;
using testutil::write_file;

namespace {

Turn make_turn(std::string speaker, std::vector<std::string> tokens,
               std::optional<int> label = std::nullopt) {
  return Turn{std::move(speaker), std::move(tokens), label};
}

}  // namespace

TEST_SUITE("dialogue") {

TEST_CASE("label set lookup") {
  LabelSet labels{{"joy", "anger", "neutral"}, 2};
  CHECK(labels.size() == 3);
  CHECK(labels.index_of("joy") == 0);
  CHECK(labels.index_of("neutral") == 2);
  CHECK(labels.index_of("fear") == -1);
}

TEST_CASE("remap_speaker_ids uses first-appearance order") {
  Dialogue d;
  d.turns = {make_turn("Ross", {"hi"}), make_turn("Rachel", {"hey"}),
             make_turn("Ross", {"so"}), make_turn("Joey", {"yo"}),
             make_turn("Rachel", {"ok"})};
  d = remap_speaker_ids(std::move(d));
  CHECK(d.speaker_ids == std::vector<int>{0, 1, 0, 2, 1});

  // Idempotent, and scoped per dialogue.
  d = remap_speaker_ids(std::move(d));
  CHECK(d.speaker_ids == std::vector<int>{0, 1, 0, 2, 1});

  Dialogue other;
  other.turns = {make_turn("Joey", {"yo"})};
  other = remap_speaker_ids(std::move(other));
  CHECK(other.speaker_ids == std::vector<int>{0});
}

TEST_CASE("labels round-trip through the text format") {
  TempDir dir;
  LabelSet labels{{"joy", "sadness", "neutral", "anger"}, 2};
  save_labels(labels, dir.file("labels.txt"));
  const LabelSet loaded = ted::load_labels(dir.file("labels.txt"));
  CHECK(loaded.names == labels.names);
  REQUIRE(loaded.neutral_index.has_value());
  CHECK(*loaded.neutral_index == 2);
}

TEST_CASE("labels file accepts comments and blank lines") {
  TempDir dir;
  write_file(dir.file("labels.txt"),
             "# emotion inventory\n\njoy\nanger\n\n!neutral anger\n");
  const LabelSet labels = ted::load_labels(dir.file("labels.txt"));
  CHECK(labels.names == std::vector<std::string>{"joy", "anger"});
  CHECK(labels.neutral_index == 1);
}

TEST_CASE("labels file errors") {
  TempDir dir;
  write_file(dir.file("dup.txt"), "joy\njoy\n");
  CHECK_THROWS_AS(ted::load_labels(dir.file("dup.txt")), DataError);

  write_file(dir.file("empty.txt"), "# nothing\n");
  CHECK_THROWS_AS(ted::load_labels(dir.file("empty.txt")), DataError);

  write_file(dir.file("badneutral.txt"), "joy\n!neutral calm\n");
  CHECK_THROWS_AS(ted::load_labels(dir.file("badneutral.txt")), DataError);

  CHECK_THROWS_AS(ted::load_labels(dir.file("missing.txt")), DataError);
}

TEST_CASE("dialogues load from JSONL with text or tokens") {
  TempDir dir;
  const LabelSet labels{{"joy", "anger"}, std::nullopt};
  write_file(
      dir.file("d.jsonl"),
      R"({"id": "d0", "turns": [{"speaker": "A", "text": "hello there", "label": "joy"}, )"
      R"({"speaker": "B", "tokens": ["two", "words"], "label": null}]})"
      "\n\n"
      R"({"id": "d1", "turns": [{"speaker": "B", "text": "fine", "label": "anger"}]})"
      "\n");
  const auto ds = ted::load_dialogues(dir.file("d.jsonl"), labels);
  REQUIRE(ds.size() == 2);
  CHECK(ds[0].id == "d0");
  REQUIRE(ds[0].num_turns() == 2);
  CHECK(ds[0].turns[0].tokens == std::vector<std::string>{"hello", "there"});
  CHECK(ds[0].turns[0].label == 0);
  CHECK(ds[0].turns[1].tokens == std::vector<std::string>{"two", "words"});
  CHECK_FALSE(ds[0].turns[1].label.has_value());
  CHECK(ds[0].speaker_ids == std::vector<int>{0, 1});
  CHECK(ds[1].speaker_ids == std::vector<int>{0});  // remap is per dialogue
  CHECK(ds[1].turns[0].label == 1);
}

TEST_CASE("tokens array wins over text") {
  TempDir dir;
  const LabelSet labels{{"joy"}, std::nullopt};
  write_file(dir.file("d.jsonl"),
             R"({"id": "d", "turns": [{"speaker": "A", "text": "ignored words here", )"
             R"("tokens": ["kept"], "label": "joy"}]})"
             "\n");
  const auto ds = ted::load_dialogues(dir.file("d.jsonl"), labels);
  CHECK(ds[0].turns[0].tokens == std::vector<std::string>{"kept"});
}

TEST_CASE("dialogue file errors name the line") {
  TempDir dir;
  const LabelSet labels{{"joy"}, std::nullopt};

  write_file(dir.file("badjson.jsonl"), "{\"id\": \"d\"\n");
  CHECK_THROWS_WITH_AS(ted::load_dialogues(dir.file("badjson.jsonl"), labels),
                       doctest::Contains(":1:"), DataError);

  write_file(dir.file("badlabel.jsonl"),
             R"({"id": "a", "turns": [{"speaker": "A", "text": "x", "label": "joy"}]})"
             "\n"
             R"({"id": "b", "turns": [{"speaker": "A", "text": "x", "label": "zzz"}]})"
             "\n");
  CHECK_THROWS_WITH_AS(ted::load_dialogues(dir.file("badlabel.jsonl"), labels),
                       doctest::Contains(":2:"), DataError);

  write_file(dir.file("emptyturn.jsonl"),
             R"({"id": "a", "turns": [{"speaker": "A", "text": "   "}]})"
             "\n");
  CHECK_THROWS_AS(ted::load_dialogues(dir.file("emptyturn.jsonl"), labels),
                  DataError);

  write_file(dir.file("noturns.jsonl"), R"({"id": "a", "turns": []})"
                                        "\n");
  CHECK_THROWS_AS(ted::load_dialogues(dir.file("noturns.jsonl"), labels),
                  DataError);
}

TEST_CASE("dialogues round-trip byte-identically") {
  TempDir dir;
  const LabelSet labels{{"joy", "anger", "neutral"}, 2};
  std::vector<Dialogue> ds(1);
  ds[0].id = "rt";
  ds[0].turns = {make_turn("A", {"a", "b"}, 0), make_turn("B", {"c"}, std::nullopt),
                 make_turn("A", {"d"}, 2)};
  ds[0] = remap_speaker_ids(std::move(ds[0]));

  save_dialogues(ds, labels, dir.file("one.jsonl"));
  const auto loaded = ted::load_dialogues(dir.file("one.jsonl"), labels);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].turns[1].speaker == "B");
  CHECK_FALSE(loaded[0].turns[1].label.has_value());
  CHECK(loaded[0].turns[2].label == 2);

  save_dialogues(loaded, labels, dir.file("two.jsonl"));
  CHECK(testutil::read_file(dir.file("one.jsonl")) ==
        testutil::read_file(dir.file("two.jsonl")));
}

}  // TEST_SUITE
