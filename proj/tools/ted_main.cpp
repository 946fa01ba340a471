#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ted/checkpoint.hpp"
#include "ted/config.hpp"
#include "ted/cust.hpp"
#include "ted/dialogue.hpp"
#include "ted/evaluate.hpp"
#include "ted/metrics.hpp"
#include "ted/pipeline.hpp"
#include "ted/synth.hpp"
#include "ted/train.hpp"
#include "ted/types.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::vector<std::string> config_files;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_files,
                  "Config file with `key = value` lines; may repeat")
      ->check(CLI::ExistingFile);
  cmd->add_option("--set", opts.sets, "Override one config key, key=value; may repeat");
  cmd->add_option("--seed", opts.seed, "Shortcut for train.seed");
  cmd->add_option("--out", opts.out, "Shortcut for out.dir");
}

// Later sources win: base (e.g. a checkpoint snapshot), then files, then
// --set pairs, then shortcut flags.
ted::RunConfig build_config(const CommonOpts& opts,
                            const std::vector<std::string>& base_lines = {}) {
  ted::RunConfig cfg;
  for (const std::string& line : base_lines) cfg.set_pair(line);
  for (const std::string& file : opts.config_files) cfg.load_file(file);
  for (const std::string& pair : opts.sets) cfg.set_pair(pair);
  if (opts.seed) cfg.set("train.seed", std::to_string(*opts.seed));
  if (opts.out) cfg.set("out.dir", *opts.out);
  return cfg;
}

// The whole block is itself a loadable config file ('#' lines are comments).
void print_config(const ted::RunConfig& cfg, std::uint64_t seed) {
  std::cerr << "# resolved config\n" << cfg.resolved() << "# seed " << seed << "\n";
}

std::string require_key(const ted::RunConfig& cfg, const std::string& key) {
  const std::string& value = cfg.get(key);
  if (value.empty()) throw ted::UsageError("missing required config key: " + key);
  return value;
}

ted::LabelSet load_labels_if_set(const ted::RunConfig& cfg) {
  const std::string& path = cfg.get("data.labels");
  return path.empty() ? ted::LabelSet{} : ted::load_labels(path);
}

// Resolves priority.sigma in place when the run actually needs a number,
// loading the training split only for sigma = auto.
void maybe_resolve_sigma(ted::RunConfig& cfg, const ted::LabelSet& labels) {
  if (!cfg.priority_enabled() || cfg.get("priority.decay") != "normdist") return;
  if (cfg.get("priority.sigma") == "auto") {
    const std::string train_path = require_key(cfg, "data.train");
    const std::vector<ted::Dialogue> train_data =
        ted::load_dialogues(train_path, labels);
    cfg.resolve_sigma(&train_data);
  } else {
    cfg.resolve_sigma(nullptr);
  }
}

void check_topology(const ted::ModelTopology& ckpt, const ted::ModelTopology& cfg) {
  const auto mismatch = [](const char* what, int a, int b) {
    throw ted::DataError(std::string("checkpoint/config mismatch on ") + what +
                         ": " + std::to_string(a) + " vs " + std::to_string(b));
  };
  if (ckpt.dim != cfg.dim) mismatch("model.dim", ckpt.dim, cfg.dim);
  if (ckpt.layers != cfg.layers) mismatch("model.layers", ckpt.layers, cfg.layers);
  if (ckpt.heads != cfg.heads) mismatch("model.heads", ckpt.heads, cfg.heads);
  if (ckpt.labels != cfg.labels) mismatch("label count", ckpt.labels, cfg.labels);
  if (ckpt.feed_forward != cfg.feed_forward) {
    mismatch("attn.feed_forward", ckpt.feed_forward, cfg.feed_forward);
  }
  if (ckpt.output_projection != cfg.output_projection) {
    mismatch("attn.output_projection", ckpt.output_projection, cfg.output_projection);
  }
}

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// encode

struct EncodeOpts {
  CommonOpts common;
  std::string data;
  int dialogue_index = -1;
  int turn = -1;
};

json sequence_json(const ted::CustSequence& seq) {
  json spans = json::array();
  for (const ted::Span& s : seq.spans) spans.push_back({s.lo, s.hi});
  return json{{"tokens", seq.tokens},
              {"spans", spans},
              {"included_turns", seq.included_turns},
              {"current_pos", seq.current_pos}};
}

int run_encode(const EncodeOpts& opts) {
  ted::RunConfig cfg = build_config(opts.common);
  print_config(cfg, cfg.get_seed("train.seed"));
  const ted::LabelSet labels = load_labels_if_set(cfg);
  const std::vector<ted::Dialogue> dialogues = ted::load_dialogues(opts.data, labels);
  const ted::EncodeConfig enc = cfg.encode_config();

  const auto emit = [&](const ted::Dialogue& d, int turn) {
    const ted::CustSequence seq =
        ted::cust_encode(d, turn, enc.context, enc.max_turns, enc.speaker_tokens);
    std::cout << sequence_json(seq).dump() << "\n";
  };

  if (opts.dialogue_index >= 0 || opts.turn >= 0) {
    const int di = std::max(opts.dialogue_index, 0);
    if (di >= static_cast<int>(dialogues.size())) {
      throw ted::DataError("dialogue index " + std::to_string(di) +
                           " out of range (" + std::to_string(dialogues.size()) +
                           " dialogues)");
    }
    const ted::Dialogue& d = dialogues[static_cast<std::size_t>(di)];
    if (opts.turn >= 0) {
      emit(d, opts.turn);
    } else {
      for (int t = 0; t < d.num_turns(); ++t) emit(d, t);
    }
  } else {
    for (const ted::Dialogue& d : dialogues) {
      for (int t = 0; t < d.num_turns(); ++t) emit(d, t);
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// synth

int run_synth(const CommonOpts& common) {
  ted::RunConfig cfg = build_config(common);
  print_config(cfg, cfg.get_seed("synth.seed"));
  const ted::SynthData data = ted::generate(cfg.synth_config());
  const fs::path out = cfg.get("out.dir");
  fs::create_directories(out);
  ted::save_labels(data.labels, out / "labels.txt");
  ted::save_dialogues(data.train, data.labels, out / "train.jsonl");
  ted::save_dialogues(data.dev, data.labels, out / "dev.jsonl");
  ted::save_dialogues(data.test, data.labels, out / "test.jsonl");
  std::cout << "wrote " << data.train.size() << " train, " << data.dev.size()
            << " dev, " << data.test.size() << " test dialogues to "
            << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainOpts {
  CommonOpts common;
  std::string seeds;  // comma-separated convenience list
};

double train_once(ted::RunConfig cfg, const std::string& artifact_suffix) {
  const ted::LabelSet labels = ted::load_labels(require_key(cfg, "data.labels"));
  const std::vector<ted::Dialogue> train_data =
      ted::load_dialogues(require_key(cfg, "data.train"), labels);
  const std::vector<ted::Dialogue> dev_data =
      ted::load_dialogues(require_key(cfg, "data.dev"), labels);
  if (cfg.priority_enabled() && cfg.get("priority.decay") == "normdist") {
    if (cfg.get("priority.sigma") == "auto") {
      cfg.resolve_sigma(&train_data);
    } else {
      cfg.resolve_sigma(nullptr);
    }
  }

  const ted::TrainConfig tcfg = cfg.train_config();
  print_config(cfg, tcfg.seed);

  const ted::Embedder<> embedder = cfg.embedder();
  const ted::EncodeConfig enc = cfg.encode_config();
  const ted::StackConfig stack = cfg.stack_config();
  const ted::PriorityConfig priority =
      cfg.priority_enabled() ? cfg.priority_config() : ted::PriorityConfig{};

  const auto train_examples = ted::build_examples(
      train_data, enc, embedder, priority, cfg.priority_enabled());
  const auto dev_examples = ted::build_examples(dev_data, enc, embedder,
                                                priority, cfg.priority_enabled());

  ted::TedModel<> model = ted::init_model(cfg.topology(labels.size()), tcfg.seed);
  ted::TrainResult<> result =
      ted::train(train_examples, dev_examples, std::move(model), tcfg, stack, labels);

  const fs::path out = cfg.get("out.dir");
  fs::create_directories(out);
  fs::path ckpt_path = cfg.get("checkpoint.path");
  if (ckpt_path.empty()) ckpt_path = out / ("model" + artifact_suffix + ".ckpt");
  cfg.set("checkpoint.path", ckpt_path.string());
  ted::save_checkpoint(result.model, cfg.resolved(), tcfg.seed,
                       result.history.best_metric, ckpt_path);
  ted::write_history(result.history, out / ("history" + artifact_suffix + ".txt"));

  std::cout << "seed " << tcfg.seed << " epochs "
            << result.history.epochs.size() << " best_epoch "
            << result.history.best_epoch << " best_dev_metric "
            << g17(result.history.best_metric) << " checkpoint "
            << ckpt_path.string() << "\n";
  return result.history.best_metric;
}

int run_train(const TrainOpts& opts) {
  if (opts.seeds.empty()) {
    train_once(build_config(opts.common), "");
    return 0;
  }
  std::vector<std::uint64_t> seeds;
  std::string token;
  std::istringstream list(opts.seeds);
  while (std::getline(list, token, ',')) {
    if (token.empty()) continue;
    seeds.push_back(std::stoull(token));
  }
  if (seeds.empty()) throw ted::UsageError("--seeds given but empty");
  double sum = 0.0;
  for (const std::uint64_t seed : seeds) {
    ted::RunConfig cfg = build_config(opts.common);
    cfg.set("train.seed", std::to_string(seed));
    if (!cfg.get("checkpoint.path").empty()) {
      throw ted::UsageError("checkpoint.path cannot be combined with --seeds; "
                            "per-seed files go to out.dir");
    }
    sum += train_once(std::move(cfg), "_seed" + std::to_string(seed));
  }
  std::cout << "mean_best_dev_metric "
            << g17(sum / static_cast<double>(seeds.size())) << " over "
            << seeds.size() << " seeds\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOpts {
  CommonOpts common;
  std::string checkpoint;
  std::string split = "test";
  std::string json_path;
};

void print_report(const ted::EvalResult& res, const ted::LabelSet& labels,
                  std::size_t examples) {
  std::cout << "examples " << examples << "\n";
  std::cout << "accuracy " << g17(res.accuracy) << "\n";
  std::cout << "weighted_f1 " << g17(res.weighted_f1) << "\n";
  std::cout << "micro_f1 " << g17(res.micro_f1) << "\n";
  std::cout << "macro_f1 " << g17(res.macro_f1) << "\n";
  for (int l = 0; l < labels.size(); ++l) {
    const ted::ClassStats& s = res.per_class[static_cast<std::size_t>(l)];
    std::cout << "class " << labels.names[static_cast<std::size_t>(l)]
              << " precision " << g17(s.precision) << " recall " << g17(s.recall)
              << " f1 " << g17(s.f1) << " support " << s.support << "\n";
  }
  std::cout << "confusion rows=gold cols=pred\n";
  for (ted::Index r = 0; r < res.confusion.rows(); ++r) {
    for (ted::Index c = 0; c < res.confusion.cols(); ++c) {
      std::cout << (c ? " " : "") << res.confusion(r, c);
    }
    std::cout << "\n";
  }
}

json report_json(const ted::EvalResult& res, const ted::LabelSet& labels,
                 std::size_t examples) {
  json per_class = json::array();
  for (int l = 0; l < labels.size(); ++l) {
    const ted::ClassStats& s = res.per_class[static_cast<std::size_t>(l)];
    per_class.push_back({{"label", labels.names[static_cast<std::size_t>(l)]},
                         {"precision", s.precision},
                         {"recall", s.recall},
                         {"f1", s.f1},
                         {"support", s.support}});
  }
  json confusion = json::array();
  for (ted::Index r = 0; r < res.confusion.rows(); ++r) {
    json row = json::array();
    for (ted::Index c = 0; c < res.confusion.cols(); ++c) {
      row.push_back(res.confusion(r, c));
    }
    confusion.push_back(row);
  }
  return json{{"examples", examples},       {"accuracy", res.accuracy},
              {"weighted_f1", res.weighted_f1}, {"micro_f1", res.micro_f1},
              {"macro_f1", res.macro_f1},   {"per_class", per_class},
              {"confusion", confusion}};
}

int run_eval(const EvalOpts& opts) {
  ted::RunConfig flag_cfg = build_config(opts.common);
  fs::path ckpt_path =
      opts.checkpoint.empty() ? flag_cfg.get("checkpoint.path") : opts.checkpoint;
  if (ckpt_path.empty()) {
    throw ted::UsageError("missing required config key: checkpoint.path");
  }
  const ted::Checkpoint ckpt = ted::load_checkpoint(ckpt_path);

  ted::RunConfig cfg = build_config(opts.common, ckpt.config_lines);
  cfg.set("checkpoint.path", ckpt_path.string());
  const ted::LabelSet labels = ted::load_labels(require_key(cfg, "data.labels"));
  maybe_resolve_sigma(cfg, labels);
  print_config(cfg, ckpt.seed);

  check_topology(ckpt.model.topology, cfg.topology(labels.size()));

  const std::string data_key = "data." + opts.split;
  const std::vector<ted::Dialogue> data =
      ted::load_dialogues(require_key(cfg, data_key), labels);
  const ted::PriorityConfig priority =
      cfg.priority_enabled() ? cfg.priority_config() : ted::PriorityConfig{};
  const auto examples =
      ted::build_examples(data, cfg.encode_config(), cfg.embedder(), priority,
                          cfg.priority_enabled());
  if (examples.empty()) throw ted::DataError("no labeled turns in " + data_key);

  const std::vector<int> preds = ted::predict_all(
      ckpt.model, examples, cfg.stack_config(), ted::thread_budget());
  const std::vector<int> golds = ted::gold_labels(examples);
  const ted::EvalResult res = ted::evaluate_predictions(preds, golds, labels);

  std::cout << "split " << opts.split << "\n";
  print_report(res, labels, examples.size());
  std::cout << "checkpoint_dev_metric " << g17(ckpt.dev_metric) << "\n";
  const double selected =
      ted::metric_value(cfg.train_config().metric, preds, golds, labels);
  std::cout << "selected_metric " << cfg.get("train.metric") << " "
            << g17(selected) << "\n";

  if (!opts.json_path.empty()) {
    std::ofstream out(opts.json_path);
    if (!out) throw ted::DataError("cannot write " + opts.json_path);
    out << report_json(res, labels, examples.size()).dump(2) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// gradcheck

struct GradOpts {
  CommonOpts common;
  double h = 1e-5;
  double tol = 1e-4;
  int dim = 16;
  int turns = 4;
  int labels = 4;
};

int run_gradcheck(const GradOpts& opts) {
  ted::RunConfig cfg = build_config(opts.common);
  const std::uint64_t seed = cfg.get_seed("train.seed");
  print_config(cfg, seed);
  if (opts.dim < 1 || opts.turns < 1 || opts.labels < 2) {
    throw ted::UsageError("gradcheck dims must be positive (labels >= 2)");
  }

  ted::ModelTopology topo = cfg.topology(opts.labels);
  topo.dim = opts.dim;
  ted::TedModel<> model = ted::init_model(topo, seed);

  ted::Example<> ex;
  ted::SplitMix64 rng = ted::seeded_stream(seed, "gradcheck");
  ex.turns.vectors.resize(opts.turns, opts.dim);
  for (ted::Index c = 0; c < ex.turns.vectors.cols(); ++c) {
    for (ted::Index r = 0; r < ex.turns.vectors.rows(); ++r) {
      ex.turns.vectors(r, c) = rng.next_gaussian();
    }
  }
  for (int t = 0; t < opts.turns; ++t) {
    ex.turns.speaker_ids.push_back(t % 2);
    ex.turns.turn_indices.push_back(t);
  }
  ex.turns.current_pos = opts.turns - 1;
  ex.gold = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(opts.labels)));

  ted::StackConfig stack = cfg.stack_config();
  bool all_pass = true;
  for (const bool priority : {false, true}) {
    if (priority) {
      ted::PriorityConfig pcfg;  // same_speaker, normdist, gamma 2
      pcfg.sigma = 5.0;
      ex.log_priority = ted::priority_factors<>(ex.turns.speaker_ids,
                                                ex.turns.turn_indices,
                                                ex.turns.current_pos, pcfg)
                            .values.array()
                            .log();
    } else {
      ex.log_priority.resize(0);
    }
    stack.use_priority = priority;
    const ted::GradCheckReport report = ted::grad_check(model, ex, stack, opts.h);
    std::cout << "priority " << (priority ? "on" : "off") << "\n";
    for (const ted::GradCheckEntry& e : report.tensors) {
      std::printf("  %-24s max_rel_error %.3e\n", e.tensor.c_str(), e.max_rel_error);
    }
    const bool pass = report.passed(opts.tol);
    all_pass = all_pass && pass;
    std::printf("  overall %.3e tol %.1e -> %s\n", report.max_rel_error, opts.tol,
                pass ? "PASS" : "FAIL");
  }
  if (!all_pass) throw ted::NumericError("gradient check failed");
  return 0;
}

// ---------------------------------------------------------------------------
// dump-attn

struct DumpOpts {
  CommonOpts common;
  std::string checkpoint;
  std::string data;
  int dialogue_index = 0;
  int turn = -1;
};

int run_dump_attn(const DumpOpts& opts) {
  ted::RunConfig flag_cfg = build_config(opts.common);
  fs::path ckpt_path =
      opts.checkpoint.empty() ? flag_cfg.get("checkpoint.path") : opts.checkpoint;
  if (ckpt_path.empty()) {
    throw ted::UsageError("missing required config key: checkpoint.path");
  }
  const ted::Checkpoint ckpt = ted::load_checkpoint(ckpt_path);
  ted::RunConfig cfg = build_config(opts.common, ckpt.config_lines);
  const ted::LabelSet labels = load_labels_if_set(cfg);
  maybe_resolve_sigma(cfg, labels);
  print_config(cfg, ckpt.seed);

  const std::vector<ted::Dialogue> dialogues = ted::load_dialogues(opts.data, labels);
  if (opts.dialogue_index < 0 ||
      opts.dialogue_index >= static_cast<int>(dialogues.size())) {
    throw ted::DataError("dialogue index out of range");
  }
  const ted::Dialogue& d = dialogues[static_cast<std::size_t>(opts.dialogue_index)];
  const int turn = opts.turn < 0 ? d.num_turns() - 1 : opts.turn;

  const ted::PriorityConfig priority =
      cfg.priority_enabled() ? cfg.priority_config() : ted::PriorityConfig{};
  ted::AttentionTrace<> trace;
  const ted::Prediction<> pred =
      ted::forward(d, turn, ckpt.model, cfg.encode_config(), cfg.embedder(),
                   priority, cfg.stack_config(), &trace);

  const fs::path out = cfg.get("out.dir");
  fs::create_directories(out);
  int files = 0;
  for (std::size_t l = 0; l < trace.size(); ++l) {
    for (std::size_t j = 0; j < trace[l].size(); ++j) {
      const fs::path path = out / ("layer" + std::to_string(l) + "_head" +
                                   std::to_string(j) + ".csv");
      std::ofstream csv(path);
      if (!csv) throw ted::DataError("cannot write " + path.string());
      const ted::Matrix& m = trace[l][j].normalized;
      char buf[32];
      for (ted::Index r = 0; r < m.rows(); ++r) {
        for (ted::Index c = 0; c < m.cols(); ++c) {
          std::snprintf(buf, sizeof buf, "%.9g", m(r, c));
          csv << (c ? "," : "") << buf;
        }
        csv << "\n";
      }
      ++files;
    }
  }
  std::cout << "dialogue " << d.id << " turn " << turn << " predicted ";
  if (labels.size() > 0 && pred.label < labels.size()) {
    std::cout << labels.names[static_cast<std::size_t>(pred.label)];
  } else {
    std::cout << pred.label;
  }
  std::cout << "\nwrote " << files << " attention files to " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TED: turn-emphasis dialogue attention for emotion recognition"};
  app.require_subcommand(1);

  EncodeOpts encode_opts;
  CLI::App* encode = app.add_subcommand(
      "encode", "Render dialogues as multi-turn marker sequences (JSONL)");
  add_common(encode, encode_opts.common);
  encode->add_option("--data", encode_opts.data, "Dialogue JSONL file")
      ->required()
      ->check(CLI::ExistingFile);
  encode->add_option("--dialogue-index", encode_opts.dialogue_index,
                     "Restrict to one dialogue (0-based)");
  encode->add_option("--turn", encode_opts.turn, "Restrict to one current turn");

  CommonOpts synth_opts;
  CLI::App* synth = app.add_subcommand(
      "synth", "Generate synthetic dialogue splits plus a labels file");
  add_common(synth, synth_opts);

  TrainOpts train_opts;
  CLI::App* train = app.add_subcommand("train", "Train a model and save a checkpoint");
  add_common(train, train_opts.common);
  train->add_option("--seeds", train_opts.seeds,
                    "Comma-separated train.seed list; runs one trial per seed");

  EvalOpts eval_opts;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a data split");
  add_common(eval, eval_opts.common);
  eval->add_option("--checkpoint", eval_opts.checkpoint, "Checkpoint file")
      ->check(CLI::ExistingFile);
  eval->add_option("--split", eval_opts.split, "Data split: train|dev|test")
      ->check(CLI::IsMember({"train", "dev", "test"}));
  eval->add_option("--json", eval_opts.json_path, "Also write the report as JSON");

  GradOpts grad_opts;
  CLI::App* gradcheck = app.add_subcommand(
      "gradcheck", "Verify analytic gradients against central differences "
                   "(priority off and on, sigma fixed at 5)");
  add_common(gradcheck, grad_opts.common);
  gradcheck->add_option("--step", grad_opts.h, "Finite-difference step");
  gradcheck->add_option("--tol", grad_opts.tol, "Max relative error allowed");
  gradcheck->add_option("--dim", grad_opts.dim, "Toy model width");
  gradcheck->add_option("--turns", grad_opts.turns, "Toy example turn count");
  gradcheck->add_option("--labels-count", grad_opts.labels, "Toy label count");

  DumpOpts dump_opts;
  CLI::App* dump = app.add_subcommand(
      "dump-attn", "Write per-layer, per-head attention matrices as CSV");
  add_common(dump, dump_opts.common);
  dump->add_option("--checkpoint", dump_opts.checkpoint, "Checkpoint file")
      ->check(CLI::ExistingFile);
  dump->add_option("--data", dump_opts.data, "Dialogue JSONL file")
      ->required()
      ->check(CLI::ExistingFile);
  dump->add_option("--dialogue-index", dump_opts.dialogue_index,
                   "Dialogue to inspect (0-based)");
  dump->add_option("--turn", dump_opts.turn, "Current turn (default: last)");

  try {
    app.parse(argc, argv);
    if (*encode) return run_encode(encode_opts);
    if (*synth) return run_synth(synth_opts);
    if (*train) return run_train(train_opts);
    if (*eval) return run_eval(eval_opts);
    if (*gradcheck) return run_gradcheck(grad_opts);
    if (*dump) return run_dump_attn(dump_opts);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ted::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const ted::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const ted::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
