#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ted/model.hpp"
#include "ted/train.hpp"

namespace ted {

// Versioned text container: seed, best dev metric, the resolved config
// snapshot, topology, then every parameter tensor in the canonical order.
// Doubles are written as %.17g, so save/load round-trips exactly and
// identical runs produce byte-identical files.
struct Checkpoint {
  std::uint64_t seed = 0;
  double dev_metric = 0.0;
  std::vector<std::string> config_lines;
  TedModel<> model;
};

void save_checkpoint(const TedModel<>& model, const std::string& resolved_config,
                     std::uint64_t seed, double dev_metric,
                     const std::filesystem::path& path);

Checkpoint load_checkpoint(const std::filesystem::path& path);

// One line per epoch plus summary, all doubles %.17g.
std::string format_history(const TrainHistory& history);
void write_history(const TrainHistory& history, const std::filesystem::path& path);

}  // namespace ted
