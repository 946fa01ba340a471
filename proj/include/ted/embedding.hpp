#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "ted/cust.hpp"
#include "ted/rng.hpp"
#include "ted/types.hpp"

namespace ted {

// One vector per token of a CustSequence, row-major: vectors.row(i) belongs
// to seq.tokens[i].
template <class S = Scalar>
struct TokenEmbeddings {
  MatrixX<S> vectors;

  Index num_tokens() const { return vectors.rows(); }
  Index dim() const { return vectors.cols(); }
};

enum class EmbeddingMode { hash, file };

// Deterministic unit-norm vector for a token string. The direction depends
// only on (token, seed, dim).
template <class S = Scalar>
VectorX<S> hash_token_vector(std::string_view token, int dim,
                             std::uint64_t seed) {
  SplitMix64 rng(fnv1a64(token) ^ SplitMix64(seed).next());
  VectorX<S> v(dim);
  for (int i = 0; i < dim; ++i) v[i] = static_cast<S>(rng.next_gaussian());
  const S norm = v.norm();
  if (norm < S(1e-12)) {
    v.setZero();
    v[0] = S(1);
    return v;
  }
  return v / norm;
}

// Text embedding file: header `dim=<d> tokens=<n>`, then n rows of d floats.
template <class S = Scalar>
TokenEmbeddings<S> load_embedding_file(const std::filesystem::path& path,
                                       int expected_tokens, int expected_dim) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file: " + path.string());
  std::string header;
  std::getline(in, header);
  int dim = -1, tokens = -1;
  if (std::sscanf(header.c_str(), "dim=%d tokens=%d", &dim, &tokens) != 2) {
    throw DataError("bad embedding file header: \"" + header + "\"");
  }
  if (dim != expected_dim) {
    throw DataError("embedding file dim " + std::to_string(dim) +
                    " does not match requested dim " +
                    std::to_string(expected_dim));
  }
  if (tokens != expected_tokens) {
    throw DataError("embedding file has " + std::to_string(tokens) +
                    " rows but the sequence has " +
                    std::to_string(expected_tokens) + " tokens");
  }
  TokenEmbeddings<S> emb;
  emb.vectors.resize(tokens, dim);
  for (int r = 0; r < tokens; ++r) {
    for (int c = 0; c < dim; ++c) {
      double value;
      if (!(in >> value)) {
        throw DataError("embedding file truncated at row " + std::to_string(r));
      }
      if (!std::isfinite(value)) {
        throw DataError("non-finite value in embedding file at row " +
                        std::to_string(r));
      }
      emb.vectors(r, c) = static_cast<S>(value);
    }
  }
  return emb;
}

template <class S = Scalar>
void save_embedding_file(const TokenEmbeddings<S>& emb,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write embedding file: " + path.string());
  out << "dim=" << emb.dim() << " tokens=" << emb.num_tokens() << "\n";
  char buf[64];
  for (Index r = 0; r < emb.num_tokens(); ++r) {
    for (Index c = 0; c < emb.dim(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(emb.vectors(r, c)));
      out << (c ? " " : "") << buf;
    }
    out << "\n";
  }
}

// Stand-in for a pretrained encoder: one vector per sequence token. Hash mode
// is context-free and fully determined by (token, seed, dim); file mode reads
// vectors positionally.
template <class S = Scalar>
TokenEmbeddings<S> embed(const CustSequence& seq, EmbeddingMode mode, int dim,
                         std::uint64_t seed,
                         const std::optional<std::filesystem::path>& source = {}) {
  if (dim < 1) throw DataError("embedding dim must be >= 1");
  if (mode == EmbeddingMode::file) {
    if (!source) throw DataError("file embedding mode requires a source path");
    return load_embedding_file<S>(*source, seq.num_tokens(), dim);
  }
  TokenEmbeddings<S> emb;
  emb.vectors.resize(seq.num_tokens(), dim);
  for (int i = 0; i < seq.num_tokens(); ++i) {
    emb.vectors.row(i) = hash_token_vector<S>(seq.tokens[i], dim, seed).transpose();
  }
  return emb;
}

// Embedding settings bound into one reusable object.
template <class S = Scalar>
struct Embedder {
  EmbeddingMode mode = EmbeddingMode::hash;
  int dim = 32;
  std::uint64_t seed = 1111;
  std::optional<std::filesystem::path> source;

  TokenEmbeddings<S> embed(const CustSequence& seq) const {
    return ted::embed<S>(seq, mode, dim, seed, source);
  }
};

}  // namespace ted
