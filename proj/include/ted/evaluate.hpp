#pragma once

#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "ted/metrics.hpp"
#include "ted/pipeline.hpp"

namespace ted {

// One example per labeled turn of every dialogue.
template <class S>
std::vector<Example<S>> build_examples(const std::vector<Dialogue>& dialogues,
                                       const EncodeConfig& enc,
                                       const Embedder<S>& embedder,
                                       const PriorityConfig& priority,
                                       bool use_priority) {
  std::vector<Example<S>> examples;
  for (const Dialogue& d : dialogues) {
    for (int t = 0; t < d.num_turns(); ++t) {
      if (!d.turns[static_cast<std::size_t>(t)].label) continue;
      examples.push_back(
          build_example(d, t, enc, embedder, priority, use_priority));
    }
  }
  return examples;
}

// Worker count: TED_THREADS if set (>= 1), else the hardware concurrency.
inline int thread_budget() {
  if (const char* env = std::getenv("TED_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw UsageError(std::string("TED_THREADS must be a positive integer, got \"") +
                     env + "\"");
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Predicted label per example. Results are written by index, so the output
// is identical for any worker count.
template <class S>
std::vector<int> predict_all(const TedModel<S>& model,
                             const std::vector<Example<S>>& examples,
                             const StackConfig& cfg, int threads) {
  std::vector<int> preds(examples.size());
  if (threads < 1) threads = 1;
  const auto n = examples.size();
  const auto workers = static_cast<std::size_t>(threads) < n
                           ? static_cast<std::size_t>(threads)
                           : (n == 0 ? 1 : n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      preds[i] = predict(model, examples[i], cfg).label;
    }
    return preds;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) {
          preds[i] = predict(model, examples[i], cfg).label;
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return preds;
}

template <class S>
std::vector<int> gold_labels(const std::vector<Example<S>>& examples) {
  std::vector<int> golds(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) golds[i] = examples[i].gold;
  return golds;
}

// Full metric report for one split.
template <class S>
EvalResult evaluate_split(const TedModel<S>& model,
                          const std::vector<Example<S>>& examples,
                          const StackConfig& cfg, const LabelSet& labels,
                          int threads) {
  const std::vector<int> preds = predict_all(model, examples, cfg, threads);
  return evaluate_predictions(preds, gold_labels(examples), labels);
}

}  // namespace ted
