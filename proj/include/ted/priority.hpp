#pragma once

#include <cmath>
#include <optional>
#include <string_view>
#include <vector>

#include "ted/types.hpp"

namespace ted {

enum class PriorityTarget { all, same_speaker, listener };
enum class PriorityDecay { constant, normdist };

// Dialogue-feature attention settings: which turns get emphasized and how the
// emphasis decays with distance from the current turn.
struct PriorityConfig {
  PriorityTarget target = PriorityTarget::same_speaker;
  PriorityDecay decay = PriorityDecay::normdist;
  double gamma = 2.0;
  double sigma = 0.0;  // must be resolved to a positive value for normdist
};

// Std of turns per dialogue in the common ERC corpora, shipped as presets for
// priority.sigma.
inline std::optional<double> sigma_preset(std::string_view name) {
  if (name == "iemocap") return 16.8;
  if (name == "meld") return 5.79;
  if (name == "emorynlp") return 5.34;
  if (name == "dailydialog") return 3.99;
  return std::nullopt;
}

// Priority profile of a turn relative to the current one: the constant gamma,
// or 1 + gamma * exp(-(t - t_c)^2 / (2 sigma^2)), which peaks at 1 + gamma on
// the current turn and falls toward 1 with distance.
template <class S = Scalar>
S turn_priority(int turn, int current_turn, const PriorityConfig& cfg) {
  if (cfg.gamma <= 0) throw DataError("priority gamma must be positive");
  if (cfg.decay == PriorityDecay::constant) return static_cast<S>(cfg.gamma);
  if (cfg.sigma <= 0) throw DataError("priority sigma must be positive");
  const double d = static_cast<double>(turn - current_turn);
  return static_cast<S>(1.0 + cfg.gamma * std::exp(-(d * d) / (2.0 * cfg.sigma * cfg.sigma)));
}

// Per-turn attention factors. Entries are 1 except on targeted turns, which
// carry the priority profile.
template <class S = Scalar>
struct PriorityFactors {
  VectorX<S> values;

  Index size() const { return values.size(); }
};

// Factors over the included turns. Distances use the original dialogue turn
// indices so that context windowing does not distort the decay; the current
// turn always targets itself under same_speaker and never under listener.
template <class S = Scalar>
PriorityFactors<S> priority_factors(const std::vector<int>& speaker_ids,
                                    const std::vector<int>& turn_indices,
                                    int current_pos, const PriorityConfig& cfg) {
  const int n = static_cast<int>(speaker_ids.size());
  if (turn_indices.size() != speaker_ids.size()) {
    throw DataError("speaker_ids and turn_indices length mismatch");
  }
  if (current_pos < 0 || current_pos >= n) {
    throw DataError("current position out of range");
  }
  const int current_speaker = speaker_ids[current_pos];
  const int current_turn = turn_indices[current_pos];
  PriorityFactors<S> out;
  out.values.resize(n);
  for (int t = 0; t < n; ++t) {
    bool targeted = true;
    if (cfg.target == PriorityTarget::same_speaker) {
      targeted = speaker_ids[t] == current_speaker;
    } else if (cfg.target == PriorityTarget::listener) {
      targeted = speaker_ids[t] != current_speaker;
    }
    out.values[t] = targeted
                        ? turn_priority<S>(turn_indices[t], current_turn, cfg)
                        : S(1);
  }
  return out;
}

// Convenience overload: positions double as turn indices.
template <class S = Scalar>
PriorityFactors<S> priority_factors(const std::vector<int>& speaker_ids,
                                    int current_pos, const PriorityConfig& cfg) {
  std::vector<int> indices(speaker_ids.size());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = static_cast<int>(i);
  return priority_factors<S>(speaker_ids, indices, current_pos, cfg);
}

}  // namespace ted
