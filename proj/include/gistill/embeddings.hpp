#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gistill/error.hpp"
#include "gistill/mat.hpp"
#include "gistill/rng.hpp"
#include "gistill/vocab.hpp"

namespace gistill {

// vocab_size x dim lookup table. Row 0 (padding) is all zeros; rows for
// tokens missing from the pre-trained file are seeded uniform [-0.1, 0.1].
struct EmbeddingTable {
  Mat<float> matrix;
  int dim = 0;

  bool all_finite() const { return matrix.all_finite(); }
};

inline EmbeddingTable random_embeddings(const Vocabulary& vocab, int dim,
                                        std::uint64_t seed) {
  EmbeddingTable t;
  t.dim = dim;
  t.matrix = Mat<float>(vocab.size(), dim);
  for (int id = 1; id < vocab.size(); ++id) {
    Rng rng(derive_seed(seed, "oov-embedding", vocab.token(id)));
    for (int c = 0; c < dim; ++c)
      t.matrix.at(id, c) = static_cast<float>(rng.uniform(-0.1, 0.1));
  }
  return t;
}

// Textual format: one token per line followed by `dim` floats. Missing
// tokens fall back to the seeded initializer; the OOV stream is derived per
// token, so rows do not depend on vocabulary order.
inline EmbeddingTable load_embeddings(const std::string& path,
                                      const Vocabulary& vocab, int dim,
                                      std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::MissingPath, path);
  EmbeddingTable t = random_embeddings(vocab, dim, seed);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string token;
    ss >> token;
    std::vector<float> values;
    double v;
    while (ss >> v) values.push_back(static_cast<float>(v));
    if (static_cast<int>(values.size()) != dim)
      raise(ErrorKind::DimensionMismatch,
            path + ":" + std::to_string(lineno) + ": expected " +
                std::to_string(dim) + " floats, got " +
                std::to_string(values.size()));
    if (!vocab.contains(token)) continue;
    const int id = vocab.id(token);
    if (id == kPadId) continue;
    for (int c = 0; c < dim; ++c) t.matrix.at(id, c) = values[c];
  }
  return t;
}

}  // namespace gistill
