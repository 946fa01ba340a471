#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ted/backprop.hpp"
#include "ted/metrics.hpp"
#include "ted/model.hpp"
#include "ted/pipeline.hpp"
#include "ted/rng.hpp"

namespace ted {

struct TrainConfig {
  double lr = 1e-3;  // toy default; no pretrained encoder to fine-tune here
  double lr_decay = 0.8;
  int patience = 5;
  int batch_size = 4;
  int max_epochs = 50;
  double dropout = 0.1;
  std::uint64_t seed = 1111;
  Metric metric = Metric::weighted_f1;

  void validate() const {
    if (lr <= 0) throw UsageError("train.lr must be positive");
    if (lr_decay <= 0 || lr_decay >= 1) throw UsageError("train.lr_decay must be in (0,1)");
    if (patience < 1) throw UsageError("train.patience must be >= 1");
    if (batch_size < 1) throw UsageError("train.batch_size must be >= 1");
    if (max_epochs < 1) throw UsageError("train.max_epochs must be >= 1");
    if (dropout < 0 || dropout >= 1) throw UsageError("train.dropout must be in [0,1)");
  }
};

// Plateau learning-rate schedule with early stopping. Improvement means a
// strictly higher dev metric than the best so far; every non-improving epoch
// multiplies lr by `decay`, and `patience` consecutive non-improving epochs
// end training.
struct PlateauSchedule {
  double lr;
  double decay;
  int patience;

  double best = -std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  int since_best = 0;
  int epochs_seen = 0;

  PlateauSchedule(double lr0, double decay0, int patience0)
      : lr(lr0), decay(decay0), patience(patience0) {}

  bool improved_last() const { return since_best == 0 && best_epoch >= 0; }

  // Feed one epoch's dev metric; returns true when training should stop.
  bool observe(double metric) {
    const int epoch = epochs_seen++;
    if (metric > best) {
      best = metric;
      best_epoch = epoch;
      since_best = 0;
      return false;
    }
    ++since_best;
    lr *= decay;
    return since_best >= patience;
  }
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_metric = 0.0;
  double lr = 0.0;  // rate in effect during this epoch's updates
  bool best = false;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  double best_metric = 0.0;
  bool early_stopped = false;
};

// Adam with bias correction over the model's flattened tensors.
template <class S = Scalar>
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  std::vector<VectorX<S>> m, v;

  void init(const std::vector<TensorRef<S>>& params) {
    m.clear();
    v.clear();
    for (const TensorRef<S>& p : params) {
      m.push_back(VectorX<S>::Zero(p.size()));
      v.push_back(VectorX<S>::Zero(p.size()));
    }
    step = 0;
  }

  void update(const std::vector<TensorRef<S>>& params,
              const std::vector<TensorRef<S>>& grads, double lr) {
    ++step;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < params.size(); ++i) {
      S* theta = params[i].data;
      const S* g = grads[i].data;
      VectorX<S>& mi = m[i];
      VectorX<S>& vi = v[i];
      for (Index k = 0; k < params[i].size(); ++k) {
        mi[k] = S(beta1) * mi[k] + S(1.0 - beta1) * g[k];
        vi[k] = S(beta2) * vi[k] + S(1.0 - beta2) * g[k] * g[k];
        const double mhat = static_cast<double>(mi[k]) / c1;
        const double vhat = static_cast<double>(vi[k]) / c2;
        theta[k] -= static_cast<S>(lr * mhat / (std::sqrt(vhat) + epsilon));
      }
    }
  }
};

template <class S = Scalar>
struct TrainResult {
  TedModel<S> model;  // parameters of the best dev epoch
  TrainHistory history;
};

namespace detail {

template <class S>
void zero_tensors(const std::vector<TensorRef<S>>& refs) {
  for (const TensorRef<S>& r : refs) {
    for (Index k = 0; k < r.size(); ++k) r.data[k] = S(0);
  }
}

template <class S>
void scale_tensors(const std::vector<TensorRef<S>>& refs, S factor) {
  for (const TensorRef<S>& r : refs) {
    for (Index k = 0; k < r.size(); ++k) r.data[k] *= factor;
  }
}

template <class S>
std::vector<int> predictions(const TedModel<S>& model,
                             const std::vector<Example<S>>& examples,
                             const StackConfig& cfg) {
  std::vector<int> preds(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    preds[i] = predict(model, examples[i], cfg).label;
  }
  return preds;
}

template <class S>
std::vector<int> golds(const std::vector<Example<S>>& examples) {
  std::vector<int> g(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) g[i] = examples[i].gold;
  return g;
}

}  // namespace detail

// Mini-batch Adam with seeded shuffling, plateau decay, early stopping, and
// best-epoch snapshotting. Gradients are averaged within each batch.
template <class S>
TrainResult<S> train(const std::vector<Example<S>>& train_set,
                     const std::vector<Example<S>>& dev_set, TedModel<S> model,
                     const TrainConfig& cfg, const StackConfig& stack,
                     const LabelSet& labels) {
  cfg.validate();
  if (train_set.empty()) throw DataError("empty training set");
  if (dev_set.empty()) throw DataError("empty dev set");

  std::vector<TensorRef<S>> params = tensor_refs(model);
  TedModel<S> grad_model = zeros_like(model);
  std::vector<TensorRef<S>> grads = tensor_refs(grad_model);

  AdamState<S> adam;
  adam.init(params);
  PlateauSchedule schedule(cfg.lr, cfg.lr_decay, cfg.patience);
  SplitMix64 shuffle_rng = seeded_stream(cfg.seed, "shuffle");
  DropoutStream dropout{cfg.dropout, seeded_stream(cfg.seed, "dropout")};

  std::vector<int> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  const std::vector<int> dev_golds = detail::golds(dev_set);

  TrainResult<S> result;
  result.model = model;
  LossCache<S> cache;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    deterministic_shuffle(order, shuffle_rng);
    double loss_sum = 0.0;
    const double lr_in_effect = schedule.lr;

    for (std::size_t start = 0, batch = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size), ++batch) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      detail::zero_tensors(grads);
      for (std::size_t i = start; i < end; ++i) {
        const Example<S>& ex = train_set[static_cast<std::size_t>(order[i])];
        const S loss = loss_forward(model, ex, stack, &dropout, cache);
        if (!std::isfinite(static_cast<double>(loss))) {
          throw NumericError("non-finite loss at epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(batch));
        }
        loss_sum += static_cast<double>(loss);
        loss_backward(model, ex, cache, grad_model);
      }
      detail::scale_tensors(grads, S(1) / static_cast<S>(end - start));
      adam.update(params, grads, schedule.lr);
    }

    const std::vector<int> dev_preds = detail::predictions(model, dev_set, stack);
    const double dev_metric = metric_value(cfg.metric, dev_preds, dev_golds, labels);

    const bool stop = schedule.observe(dev_metric);
    const bool improved = schedule.improved_last();
    result.history.epochs.push_back({epoch,
                                     loss_sum / static_cast<double>(train_set.size()),
                                     dev_metric, lr_in_effect, improved});
    if (improved) result.model = model;
    if (stop) {
      result.history.early_stopped = true;
      break;
    }
  }
  result.history.best_epoch = schedule.best_epoch;
  result.history.best_metric = schedule.best;
  return result;
}

// ---------------------------------------------------------------------------
// Gradient verification

struct GradCheckEntry {
  std::string tensor;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> tensors;
  double max_rel_error = 0.0;

  bool passed(double tol) const { return max_rel_error < tol; }
};

// Central-difference check of every parameter tensor against the analytic
// gradient, dropout off. Relative error uses |a| + |n| floored at 1e-6 so
// near-zero entries are compared absolutely.
template <class S>
GradCheckReport grad_check(TedModel<S>& model, const Example<S>& ex,
                           const StackConfig& cfg, double h) {
  if (h <= 0) throw UsageError("gradcheck step must be positive");
  TedModel<S> grad_model = zeros_like(model);
  LossCache<S> cache;
  loss_forward(model, ex, cfg, nullptr, cache);
  loss_backward(model, ex, cache, grad_model);

  std::vector<TensorRef<S>> params = tensor_refs(model);
  std::vector<TensorRef<S>> analytic = tensor_refs(grad_model);

  GradCheckReport report;
  for (std::size_t i = 0; i < params.size(); ++i) {
    GradCheckEntry entry{params[i].name, 0.0};
    for (Index k = 0; k < params[i].size(); ++k) {
      S& theta = params[i].data[k];
      const S saved = theta;
      theta = saved + static_cast<S>(h);
      const double up = static_cast<double>(loss_forward(model, ex, cfg, nullptr, cache));
      theta = saved - static_cast<S>(h);
      const double down = static_cast<double>(loss_forward(model, ex, cfg, nullptr, cache));
      theta = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = static_cast<double>(analytic[i].data[k]);
      const double rel =
          std::abs(a - numeric) / std::max(1e-6, std::abs(a) + std::abs(numeric));
      entry.max_rel_error = std::max(entry.max_rel_error, rel);
    }
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.tensors.push_back(std::move(entry));
  }
  return report;
}

}  // namespace ted
