#pragma once

#include <cstdint>
#include <vector>

#include "ted/dialogue.hpp"
#include "ted/types.hpp"

namespace ted {

enum class Metric { weighted_f1, micro_f1 };

struct ClassStats {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
};

using ConfusionMatrix = MatrixX<std::int64_t>;  // rows gold, cols predicted

struct EvalResult {
  double weighted_f1 = 0.0;
  double micro_f1 = 0.0;  // neutral-excluded when the label set has a neutral
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  std::vector<ClassStats> per_class;
  ConfusionMatrix confusion;
};

ConfusionMatrix confusion_matrix(const std::vector<int>& preds,
                                 const std::vector<int>& golds,
                                 const LabelSet& labels);

// Support-weighted mean of per-class F1; zero-support classes carry zero
// weight and any zero-denominator F1 is 0.
double weighted_f1(const std::vector<int>& preds, const std::vector<int>& golds,
                   const LabelSet& labels);

// Micro-aggregated F1. With exclude_neutral, gold-neutral examples are
// dropped first and neutral stays out of the aggregated classes, so a
// neutral prediction on a kept example counts against recall only. Without
// exclusion this equals accuracy.
double micro_f1(const std::vector<int>& preds, const std::vector<int>& golds,
                const LabelSet& labels, bool exclude_neutral);

// Unweighted mean of per-class F1 over all classes.
double macro_f1(const std::vector<int>& preds, const std::vector<int>& golds,
                const LabelSet& labels);

// All of the above in one pass; micro_f1 excludes neutral iff the label set
// declares one.
EvalResult evaluate_predictions(const std::vector<int>& preds,
                                const std::vector<int>& golds,
                                const LabelSet& labels);

double metric_value(Metric metric, const std::vector<int>& preds,
                    const std::vector<int>& golds, const LabelSet& labels);

}  // namespace ted
