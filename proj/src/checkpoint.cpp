#include "ted/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ted {
namespace {

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void fail(const std::filesystem::path& path, const std::string& what) {
  throw DataError("checkpoint " + path.string() + ": " + what);
}

}  // namespace

void save_checkpoint(const TedModel<>& model, const std::string& resolved_config,
                     std::uint64_t seed, double dev_metric,
                     const std::filesystem::path& path) {
  std::ostringstream out;
  out << "ted-checkpoint v1\n";
  out << "seed " << seed << "\n";
  out << "dev_metric " << g17(dev_metric) << "\n";

  std::vector<std::string> config_lines;
  {
    std::istringstream lines(resolved_config);
    std::string line;
    while (std::getline(lines, line)) config_lines.push_back(line);
  }
  out << "config " << config_lines.size() << "\n";
  for (const std::string& line : config_lines) out << line << "\n";

  const ModelTopology& t = model.topology;
  out << "topology dim " << t.dim << " layers " << t.layers << " heads "
      << t.heads << " labels " << t.labels << " feed_forward " << t.feed_forward
      << " output_projection " << t.output_projection << "\n";

  // tensor_refs needs mutable access; parameters are only read.
  auto refs = tensor_refs(const_cast<TedModel<>&>(model));
  out << "tensors " << refs.size() << "\n";
  for (const auto& ref : refs) {
    out << "tensor " << ref.name << " " << ref.rows << " " << ref.cols << "\n";
    for (Index k = 0; k < ref.size(); ++k) {
      out << (k ? " " : "") << g17(static_cast<double>(ref.data[k]));
    }
    out << "\n";
  }
  out << "end\n";

  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot write checkpoint: " + path.string());
  file << out.str();
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint: " + path.string());

  std::string line, word;
  if (!std::getline(in, line) || line != "ted-checkpoint v1") {
    fail(path, "unsupported format (expected `ted-checkpoint v1`)");
  }

  Checkpoint ckpt;
  if (!(in >> word >> ckpt.seed) || word != "seed") fail(path, "missing seed");
  if (!(in >> word >> ckpt.dev_metric) || word != "dev_metric") {
    fail(path, "missing dev_metric");
  }

  std::size_t config_count = 0;
  if (!(in >> word >> config_count) || word != "config") fail(path, "missing config");
  std::getline(in, line);  // finish the count line
  for (std::size_t i = 0; i < config_count; ++i) {
    if (!std::getline(in, line)) fail(path, "truncated config snapshot");
    ckpt.config_lines.push_back(line);
  }

  ModelTopology topo;
  std::string k1, k2, k3, k4, k5, k6;
  if (!(in >> word >> k1 >> topo.dim >> k2 >> topo.layers >> k3 >> topo.heads >>
        k4 >> topo.labels >> k5 >> topo.feed_forward >> k6 >>
        topo.output_projection) ||
      word != "topology" || k1 != "dim" || k2 != "layers" || k3 != "heads" ||
      k4 != "labels" || k5 != "feed_forward" || k6 != "output_projection") {
    fail(path, "bad topology line");
  }

  ckpt.model = init_model(topo, 0);
  auto refs = tensor_refs(ckpt.model);

  std::size_t tensor_count = 0;
  if (!(in >> word >> tensor_count) || word != "tensors") {
    fail(path, "missing tensor count");
  }
  if (tensor_count != refs.size()) {
    fail(path, "expected " + std::to_string(refs.size()) + " tensors, found " +
                   std::to_string(tensor_count));
  }
  for (auto& ref : refs) {
    std::string name;
    Index rows = 0, cols = 0;
    if (!(in >> word >> name >> rows >> cols) || word != "tensor") {
      fail(path, "bad tensor header near " + ref.name);
    }
    if (name != ref.name || rows != ref.rows || cols != ref.cols) {
      fail(path, "tensor mismatch: expected " + ref.name + " " +
                     std::to_string(ref.rows) + "x" + std::to_string(ref.cols) +
                     ", found " + name + " " + std::to_string(rows) + "x" +
                     std::to_string(cols));
    }
    for (Index k = 0; k < ref.size(); ++k) {
      // strtod instead of stream extraction: the stream rejects "nan"/"inf"
      // tokens outright, and those deserve the non-finite diagnostic below.
      std::string token;
      if (!(in >> token)) fail(path, "truncated values in tensor " + ref.name);
      char* endp = nullptr;
      const double v = std::strtod(token.c_str(), &endp);
      if (endp == token.c_str() || *endp != '\0') {
        fail(path, "bad value in tensor " + ref.name);
      }
      if (!std::isfinite(v)) fail(path, "non-finite value in tensor " + ref.name);
      ref.data[k] = v;
    }
  }
  if (!(in >> word) || word != "end") fail(path, "missing end marker");
  return ckpt;
}

std::string format_history(const TrainHistory& history) {
  std::ostringstream out;
  out << "epoch train_loss dev_metric lr best\n";
  for (const EpochRecord& e : history.epochs) {
    out << e.epoch << " " << g17(e.train_loss) << " " << g17(e.dev_metric)
        << " " << g17(e.lr) << " " << (e.best ? 1 : 0) << "\n";
  }
  out << "best_epoch " << history.best_epoch << "\n";
  out << "best_metric " << g17(history.best_metric) << "\n";
  out << "early_stopped " << (history.early_stopped ? 1 : 0) << "\n";
  return out.str();
}

void write_history(const TrainHistory& history, const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot write history: " + path.string());
  file << format_history(history);
}

}  // namespace ted
