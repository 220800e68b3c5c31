#pragma once

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "gistill/error.hpp"
#include "gistill/trace.hpp"
#include "gistill/vocab.hpp"

namespace gistill {

// Scripted teacher: emits max(1, |salient|) identical attention rows, each a
// softmax over positions with logit `sharpness` on the salient set and 0
// elsewhere. sharpness 0 gives uniform rows; large sharpness approaches a
// distribution concentrated on the salient positions.
inline AttentionTrace oracle_teacher_trace(const TokenizedDocument& doc,
                                           const std::set<int>& salient_positions,
                                           double sharpness) {
  const int n = doc.n_tokens();
  if (n < 1) raise(ErrorKind::EmptyInput, "oracle teacher: empty document");
  if (!(sharpness >= 0.0) || !std::isfinite(sharpness))
    raise(ErrorKind::OutOfRange, "oracle teacher: sharpness must be finite and >= 0");
  for (int pos : salient_positions)
    if (pos < 0 || pos >= n)
      raise(ErrorKind::OutOfRange, "oracle teacher: salient position outside document");

  std::vector<double> row(n, 0.0);
  double denom = 0;
  for (int i = 0; i < n; ++i) {
    const double logit = salient_positions.count(i) ? sharpness : 0.0;
    row[i] = std::exp(logit - sharpness);  // stable: logits <= sharpness
    denom += row[i];
  }

  const int t_steps = std::max<int>(1, static_cast<int>(salient_positions.size()));
  AttentionTrace trace;
  trace.doc_id = doc.doc_id;
  trace.matrix = Mat<float>(t_steps, n);
  for (int t = 0; t < t_steps; ++t)
    for (int i = 0; i < n; ++i)
      trace.matrix.at(t, i) = static_cast<float>(row[i] / denom);
  return trace;
}

// Salient positions are the article positions whose token also occurs in the
// summary. This is how the oracle reads a summarization record.
inline std::set<int> salient_positions_from_summary(
    const TokenizedDocument& article, const TokenizedDocument& summary) {
  std::set<std::string> summary_tokens(summary.tokens.begin(),
                                       summary.tokens.end());
  std::set<int> positions;
  for (int i = 0; i < article.n_tokens(); ++i)
    if (summary_tokens.count(article.tokens[i])) positions.insert(i);
  return positions;
}

}  // namespace gistill
