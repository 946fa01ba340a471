#include <doctest.h>

#include <string>
#include <vector>

#include "ted/config.hpp"
#include "ted/types.hpp"
#include "test_util.hpp"

using ted::RunConfig;
using ted::UsageError;
using testutil::TempDir;
using testutil::write_file;

TEST_SUITE("config") {

TEST_CASE("defaults assemble valid module configs") {
  RunConfig cfg;
  CHECK(cfg.get("model.dim") == "32");
  CHECK(cfg.is_default("model.dim"));

  const auto enc = cfg.encode_config();
  CHECK(enc.context == ted::ContextMode::past);
  CHECK(enc.max_turns == ted::kUnlimitedTurns);
  CHECK_FALSE(enc.speaker_tokens);

  const auto topo = cfg.topology(6);
  CHECK(topo.dim == 32);
  CHECK(topo.layers == 2);
  CHECK(topo.heads == 4);
  CHECK(topo.labels == 6);
  CHECK(topo.output_projection);
  CHECK_FALSE(topo.feed_forward);

  const auto train = cfg.train_config();
  CHECK(train.lr == 0.001);
  CHECK(train.lr_decay == 0.8);
  CHECK(train.patience == 5);
  CHECK(train.batch_size == 4);
  CHECK(train.dropout == 0.1);
  CHECK(train.seed == 1111);
  CHECK(train.metric == ted::Metric::weighted_f1);

  CHECK(cfg.priority_enabled());
  const auto stack = cfg.stack_config();
  CHECK(stack.use_priority);
  CHECK_FALSE(stack.use_positional_encoding);
  CHECK(stack.mask == ted::AttentionMask::all);

  const auto synth = cfg.synth_config();
  CHECK(synth.dialogues == 200);
  CHECK(synth.cue_strength == 0.9);
}

TEST_CASE("set validates keys and values") {
  RunConfig cfg;
  CHECK_THROWS_AS(cfg.set("model.width", "8"), UsageError);
  CHECK_THROWS_AS(cfg.set("model.dim", "eight"), UsageError);
  CHECK_THROWS_AS(cfg.set("context.mode", "future"), UsageError);
  CHECK_THROWS_AS(cfg.set("priority.enabled", "yes"), UsageError);
  CHECK_THROWS_AS(cfg.set("attn.mask", "none"), UsageError);
  CHECK_THROWS_AS(cfg.set("train.metric", "accuracy"), UsageError);
  CHECK_THROWS_AS(cfg.set("train.lr", "fast"), UsageError);
  CHECK_THROWS_AS(cfg.set("train.seed", "-3"), UsageError);
  CHECK_THROWS_AS(cfg.set("priority.sigma", "wide"), UsageError);
  CHECK_THROWS_AS(cfg.get("nope"), UsageError);

  CHECK_NOTHROW(cfg.set("priority.sigma", "iemocap"));
  CHECK_NOTHROW(cfg.set("priority.sigma", "3.5"));
  CHECK_NOTHROW(cfg.set("priority.sigma", "auto"));
  CHECK_NOTHROW(cfg.set("train.lr", "2e-6"));
  CHECK(cfg.get("train.lr") == "2e-6");  // stored verbatim
}

TEST_CASE("set_pair splits on the first equals sign") {
  RunConfig cfg;
  cfg.set_pair("model.dim=16");
  CHECK(cfg.get("model.dim") == "16");
  cfg.set_pair(" train.metric = micro_f1 ");
  CHECK(cfg.get("train.metric") == "micro_f1");
  CHECK_THROWS_AS(cfg.set_pair("model.dim"), UsageError);
}

TEST_CASE("config files parse key = value lines with comments") {
  TempDir dir;
  write_file(dir.file("run.cfg"),
             "# experiment\n"
             "model.dim = 16\n"
             "\n"
             "  train.lr = 0.01  \n"
             "priority.target=listener\n");
  RunConfig cfg;
  cfg.load_file(dir.file("run.cfg"));
  CHECK(cfg.get("model.dim") == "16");
  CHECK(cfg.get("train.lr") == "0.01");
  CHECK(cfg.get("priority.target") == "listener");
}

TEST_CASE("config file errors name the file and line") {
  TempDir dir;
  write_file(dir.file("bad.cfg"), "model.dim = 16\njust words\n");
  RunConfig cfg;
  CHECK_THROWS_WITH_AS(cfg.load_file(dir.file("bad.cfg")),
                       doctest::Contains(":2:"), UsageError);
  CHECK_THROWS_AS(cfg.load_file(dir.file("absent.cfg")), UsageError);
}

TEST_CASE("resolved output round-trips through load_file") {
  TempDir dir;
  RunConfig cfg;
  cfg.set("model.dim", "16");
  cfg.set("train.lr", "2e-6");
  cfg.set("priority.sigma", "5.79");

  write_file(dir.file("resolved.cfg"), cfg.resolved());
  RunConfig reloaded;
  reloaded.load_file(dir.file("resolved.cfg"));
  CHECK(reloaded.resolved() == cfg.resolved());
  CHECK(reloaded.get("train.lr") == "2e-6");
}

TEST_CASE("priority config needs a numeric sigma for normdist") {
  RunConfig cfg;
  CHECK(cfg.get("priority.sigma") == "auto");
  CHECK_THROWS_AS(cfg.priority_config(), UsageError);

  cfg.set("priority.decay", "constant");
  CHECK_NOTHROW(cfg.priority_config());  // constant decay never reads sigma

  cfg.set("priority.decay", "normdist");
  cfg.set("priority.sigma", "4.25");
  const auto p = cfg.priority_config();
  CHECK(p.sigma == 4.25);
  CHECK(p.gamma == 2.0);
  CHECK(p.target == ted::PriorityTarget::same_speaker);
  CHECK(p.decay == ted::PriorityDecay::normdist);
}

TEST_CASE("resolve_sigma handles numbers, presets, and auto") {
  RunConfig numeric;
  numeric.set("priority.sigma", "7.5");
  numeric.resolve_sigma(nullptr);  // already numeric: no data needed
  CHECK(numeric.get("priority.sigma") == "7.5");

  RunConfig preset;
  preset.set("priority.sigma", "meld");
  preset.resolve_sigma(nullptr);
  CHECK(preset.get_double("priority.sigma") == 5.79);

  RunConfig open;
  CHECK_THROWS_AS(open.resolve_sigma(nullptr), UsageError);

  // auto = population std of turns per dialogue: counts {2, 4} -> std 1.
  std::vector<ted::Dialogue> data(2);
  for (int turns : {2, 4}) {
    ted::Dialogue d;
    for (int t = 0; t < turns; ++t) {
      d.turns.push_back({"A", {"w"}, std::nullopt});
      d.speaker_ids.push_back(0);
    }
    data[turns == 2 ? 0 : 1] = d;
  }
  CHECK(ted::turns_per_dialogue_std(data) == 1.0);
  RunConfig autod;
  autod.resolve_sigma(&data);
  CHECK(autod.get_double("priority.sigma") == 1.0);
  CHECK(autod.priority_config().sigma == 1.0);
}

TEST_CASE("embedder assembly enforces the file-mode source") {
  RunConfig cfg;
  const auto hash = cfg.embedder();
  CHECK(hash.mode == ted::EmbeddingMode::hash);
  CHECK(hash.dim == 32);
  CHECK(hash.seed == 1111);

  cfg.set("embed.mode", "file");
  CHECK_THROWS_AS(cfg.embedder(), UsageError);
  cfg.set("embed.source", "vectors.txt");
  const auto file = cfg.embedder();
  CHECK(file.mode == ted::EmbeddingMode::file);
  REQUIRE(file.source.has_value());
  CHECK(file.source->string() == "vectors.txt");
}

TEST_CASE("context.max_turns zero means unlimited") {
  RunConfig cfg;
  cfg.set("context.max_turns", "4");
  CHECK(cfg.encode_config().max_turns == 4);
  cfg.set("context.max_turns", "0");
  CHECK(cfg.encode_config().max_turns == ted::kUnlimitedTurns);
  cfg.set("context.max_turns", "-1");
  CHECK_THROWS_AS(cfg.encode_config(), UsageError);
}

TEST_CASE("assembled train config is validated") {
  RunConfig cfg;
  cfg.set("train.lr_decay", "1.5");
  CHECK_THROWS_AS(cfg.train_config(), UsageError);
}

}  // TEST_SUITE
