#include "ted/metrics.hpp"

#include <string>

namespace ted {
namespace {

void check_pairs(const std::vector<int>& preds, const std::vector<int>& golds,
                 const LabelSet& labels) {
  if (preds.size() != golds.size()) {
    throw DataError("prediction/gold length mismatch: " +
                    std::to_string(preds.size()) + " vs " +
                    std::to_string(golds.size()));
  }
  if (preds.empty()) throw DataError("no examples to evaluate");
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] < 0 || preds[i] >= labels.size() || golds[i] < 0 ||
        golds[i] >= labels.size()) {
      throw DataError("label index out of range at example " + std::to_string(i));
    }
  }
}

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

std::vector<ClassStats> class_stats(const ConfusionMatrix& c) {
  const Index k = c.rows();
  std::vector<ClassStats> stats(static_cast<std::size_t>(k));
  for (Index l = 0; l < k; ++l) {
    const auto tp = static_cast<double>(c(l, l));
    const auto gold_total = static_cast<double>(c.row(l).sum());
    const auto pred_total = static_cast<double>(c.col(l).sum());
    ClassStats& s = stats[static_cast<std::size_t>(l)];
    s.support = c.row(l).sum();
    s.precision = safe_div(tp, pred_total);
    s.recall = safe_div(tp, gold_total);
    s.f1 = safe_div(2.0 * s.precision * s.recall, s.precision + s.recall);
  }
  return stats;
}

}  // namespace

ConfusionMatrix confusion_matrix(const std::vector<int>& preds,
                                 const std::vector<int>& golds,
                                 const LabelSet& labels) {
  check_pairs(preds, golds, labels);
  ConfusionMatrix c = ConfusionMatrix::Zero(labels.size(), labels.size());
  for (std::size_t i = 0; i < preds.size(); ++i) c(golds[i], preds[i]) += 1;
  return c;
}

double weighted_f1(const std::vector<int>& preds, const std::vector<int>& golds,
                   const LabelSet& labels) {
  const ConfusionMatrix c = confusion_matrix(preds, golds, labels);
  const std::vector<ClassStats> stats = class_stats(c);
  const auto total = static_cast<double>(golds.size());
  double sum = 0.0;
  for (const ClassStats& s : stats) {
    sum += static_cast<double>(s.support) / total * s.f1;
  }
  return sum;
}

double micro_f1(const std::vector<int>& preds, const std::vector<int>& golds,
                const LabelSet& labels, bool exclude_neutral) {
  check_pairs(preds, golds, labels);
  if (!exclude_neutral) {
    std::int64_t correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) correct += preds[i] == golds[i];
    return static_cast<double>(correct) / static_cast<double>(preds.size());
  }
  if (!labels.neutral_index) {
    throw DataError("neutral exclusion requested but the label set has no neutral");
  }
  const int neutral = *labels.neutral_index;
  std::int64_t tp = 0, kept = 0, predicted = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (golds[i] == neutral) continue;
    ++kept;
    if (preds[i] != neutral) ++predicted;
    if (preds[i] == golds[i]) ++tp;
  }
  if (kept == 0) throw DataError("every gold label is neutral; nothing to evaluate");
  const double precision = safe_div(static_cast<double>(tp), static_cast<double>(predicted));
  const double recall = static_cast<double>(tp) / static_cast<double>(kept);
  return safe_div(2.0 * precision * recall, precision + recall);
}

double macro_f1(const std::vector<int>& preds, const std::vector<int>& golds,
                const LabelSet& labels) {
  const ConfusionMatrix c = confusion_matrix(preds, golds, labels);
  const std::vector<ClassStats> stats = class_stats(c);
  double sum = 0.0;
  for (const ClassStats& s : stats) sum += s.f1;
  return sum / static_cast<double>(stats.size());
}

EvalResult evaluate_predictions(const std::vector<int>& preds,
                                const std::vector<int>& golds,
                                const LabelSet& labels) {
  EvalResult r;
  r.confusion = confusion_matrix(preds, golds, labels);
  r.per_class = class_stats(r.confusion);
  const auto total = static_cast<double>(golds.size());
  double weighted = 0.0, macro = 0.0;
  std::int64_t correct = 0;
  for (Index l = 0; l < r.confusion.rows(); ++l) {
    const ClassStats& s = r.per_class[static_cast<std::size_t>(l)];
    weighted += static_cast<double>(s.support) / total * s.f1;
    macro += s.f1;
    correct += r.confusion(l, l);
  }
  r.weighted_f1 = weighted;
  r.macro_f1 = macro / static_cast<double>(r.per_class.size());
  r.accuracy = static_cast<double>(correct) / total;
  r.micro_f1 = micro_f1(preds, golds, labels, labels.neutral_index.has_value());
  return r;
}

double metric_value(Metric metric, const std::vector<int>& preds,
                    const std::vector<int>& golds, const LabelSet& labels) {
  if (metric == Metric::weighted_f1) return weighted_f1(preds, golds, labels);
  return micro_f1(preds, golds, labels, labels.neutral_index.has_value());
}

}  // namespace ted
