#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gistill/error.hpp"
#include "gistill/trace.hpp"

namespace gistill {

// Teacher-side importance distribution over the N source positions.
struct SoftTarget {
  std::string doc_id;
  std::vector<double> q;

  int n() const { return static_cast<int>(q.size()); }
};

constexpr double kSimplexTolerance = 1e-6;

inline bool is_simplex(const std::vector<double>& q,
                       double tol = kSimplexTolerance) {
  double sum = 0;
  for (double v : q) {
    if (!(v >= 0.0) || !std::isfinite(v)) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= tol;
}

enum class TargetMean { Arithmetic, Geometric };

// Reduces a T x N attention trace to one distribution over positions: the
// column-wise mean of the decoder attention rows, q_n = (sum_t a[t][n]) / T.
//
// The geometric variant averages in log space and renormalizes; columns
// containing an exact zero collapse to zero mass. `valid_cols` restricts the
// reduction to the first n real (non-padding) positions, renormalizing over
// them; -1 uses every column. Accumulation is in 64-bit.
inline SoftTarget soft_target_from_trace(const AttentionTrace& trace,
                                         TargetMean mean = TargetMean::Arithmetic,
                                         int valid_cols = -1) {
  const int t_steps = trace.matrix.rows;
  const int n_all = trace.matrix.cols;
  if (t_steps == 0) raise(ErrorKind::EmptyTrace, "trace has no decoding steps");
  const int n = valid_cols < 0 ? n_all : valid_cols;
  if (n < 1 || n > n_all)
    raise(ErrorKind::OutOfRange, "valid_cols outside trace width");

  SoftTarget target;
  target.doc_id = trace.doc_id;
  target.q.assign(n, 0.0);

  if (mean == TargetMean::Arithmetic) {
    for (int c = 0; c < n; ++c) {
      double acc = 0;
      for (int r = 0; r < t_steps; ++r) acc += trace.matrix.at(r, c);
      target.q[c] = acc / t_steps;
    }
  } else {
    for (int c = 0; c < n; ++c) {
      double log_acc = 0;
      bool zero = false;
      for (int r = 0; r < t_steps; ++r) {
        const double v = trace.matrix.at(r, c);
        if (v <= 0.0) {
          zero = true;
          break;
        }
        log_acc += std::log(v);
      }
      target.q[c] = zero ? 0.0 : std::exp(log_acc / t_steps);
    }
  }

  // The plain arithmetic mean over full rows already sums to 1 up to the
  // trace's own accumulation error and must not be renormalized, or it stops
  // being the column mean. Column restriction and the geometric variant do
  // not preserve the sum, so those paths renormalize.
  if (mean == TargetMean::Geometric || n != n_all) {
    double total = 0;
    for (double v : target.q) total += v;
    if (!(total > 0.0) || !std::isfinite(total))
      raise(ErrorKind::NumericalFailure, "soft target has no mass");
    for (double& v : target.q) v /= total;
  }
  return target;
}

// Element-wise arithmetic mean of ensemble member targets. All members must
// describe the same document with equal length.
inline SoftTarget combine_ensemble(const std::vector<SoftTarget>& members) {
  if (members.empty())
    raise(ErrorKind::EmptyInput, "combine_ensemble: no members");
  const int n = members.front().n();
  const std::string& doc_id = members.front().doc_id;
  for (const auto& m : members) {
    if (m.doc_id != doc_id)
      raise(ErrorKind::InvalidArgument,
            "combine_ensemble: members describe different documents");
    if (m.n() != n)
      raise(ErrorKind::LengthMismatch, "combine_ensemble: member lengths differ");
  }
  SoftTarget out;
  out.doc_id = doc_id;
  out.q.assign(n, 0.0);
  for (const auto& m : members)
    for (int i = 0; i < n; ++i) out.q[i] += m.q[i];
  for (double& v : out.q) v /= members.size();
  return out;
}

}  // namespace gistill
