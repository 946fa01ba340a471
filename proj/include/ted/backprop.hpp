#pragma once

#include <cmath>

#include "ted/pipeline.hpp"

namespace ted {

// -ln p_gold from logits, via log-sum-exp.
template <class S>
S cross_entropy_logits(const VectorX<S>& logits, int gold) {
  if (gold < 0 || gold >= logits.size()) {
    throw DataError("gold label out of range");
  }
  const S max = logits.maxCoeff();
  const S lse = std::log((logits.array() - max).exp().sum()) + max;
  return lse - logits[gold];
}

template <class S>
S cross_entropy(const Prediction<S>& pred, int gold) {
  return cross_entropy_logits(pred.logits, gold);
}

// Forward state needed to run the backward pass for one example.
template <class S = Scalar>
struct LossCache {
  StackCache<S> stack;
  VectorX<S> probs;
};

// Loss of one example. With a DropoutStream this is the training-time
// forward; without, it matches predict() exactly.
template <class S>
S loss_forward(const TedModel<S>& model, const Example<S>& ex,
               const StackConfig& cfg, DropoutStream* dropout,
               LossCache<S>& cache) {
  if (ex.gold < 0 || ex.gold >= model.num_labels()) {
    throw DataError("example has no usable gold label");
  }
  stack_forward(model, ex, cfg, dropout, &cache.stack);
  const VectorX<S> current =
      cache.stack.final_states.row(ex.turns.current_pos).transpose();
  const VectorX<S> logits =
      model.classifier.weight * current + model.classifier.bias;
  cache.probs = softmax_row(logits.transpose()).transpose();
  return cross_entropy_logits(logits, ex.gold);
}

// Accumulates d(loss)/d(theta) into `grads` (same shapes as `model`, not
// cleared here). The priority bias and masks are constants of the graph, so
// softmax rows backpropagate with the plain softmax Jacobian.
template <class S>
void loss_backward(const TedModel<S>& model, const Example<S>& ex,
                   const LossCache<S>& cache, TedModel<S>& grads) {
  const VectorX<S> current =
      cache.stack.final_states.row(ex.turns.current_pos).transpose();
  VectorX<S> dlogits = cache.probs;
  dlogits[ex.gold] -= S(1);

  grads.classifier.weight.noalias() += dlogits * current.transpose();
  grads.classifier.bias += dlogits;

  MatrixX<S> dh = MatrixX<S>::Zero(cache.stack.final_states.rows(),
                                   cache.stack.final_states.cols());
  dh.row(ex.turns.current_pos) =
      (model.classifier.weight.transpose() * dlogits).transpose();

  for (int l = model.num_layers() - 1; l >= 0; --l) {
    const auto li = static_cast<std::size_t>(l);
    if (model.topology.feed_forward) {
      dh = ffn_backward(dh, cache.stack.ffn[li], *model.layers[li].ffn,
                        *grads.layers[li].ffn);
    }
    dh = mhsa_backward(dh, cache.stack.mhsa[li], model.layers[li],
                       model.topology, grads.layers[li]);
  }
}

}  // namespace ted
