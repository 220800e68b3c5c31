#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "gistill/error.hpp"
#include "gistill/mat.hpp"
#include "gistill/rng.hpp"

namespace gistill {

// Define-by-run reverse-mode tape over Mat<S>. Nodes are appended in forward
// order; backward() walks them in reverse. Values stay alive for the life of
// the tape, so backward lambdas only capture indices and small aux data.
//
// Instantiate with S=float for training and S=double for gradient checks.
template <typename S>
class Tape {
 public:
  using BackFn = std::function<void(Tape&, int)>;

  int input(Mat<S> value) { return push(std::move(value), {}, nullptr); }
  int constant(Mat<S> value) { return push(std::move(value), {}, nullptr); }

  int scalar(S v) {
    Mat<S> m(1, 1);
    m.a[0] = v;
    return constant(std::move(m));
  }

  const Mat<S>& value(int id) const { return nodes_[id].value; }

  bool has_grad(int id) const { return nodes_[id].has_grad; }

  const Mat<S>& grad(int id) const {
    if (!nodes_[id].has_grad)
      raise(ErrorKind::InvalidArgument, "grad: node has no gradient");
    return nodes_[id].grad;
  }

  int size() const { return static_cast<int>(nodes_.size()); }

  // ---- arithmetic -------------------------------------------------------

  int matmul(int x, int y) {
    Mat<S> v = gistill::matmul(value(x), value(y));
    return push(std::move(v), {x, y}, [](Tape& t, int self) {
      const auto& g = t.nodes_[self].grad;
      int x = t.nodes_[self].parents[0], y = t.nodes_[self].parents[1];
      t.accumulate(x, matmul_nt(g, t.value(y)));
      t.accumulate(y, matmul_tn(t.value(x), g));
    });
  }

  // C = X * Y^T
  int matmul_nt(int x, int y) {
    Mat<S> v = gistill::matmul_nt(value(x), value(y));
    return push(std::move(v), {x, y}, [](Tape& t, int self) {
      const auto& g = t.nodes_[self].grad;
      int x = t.nodes_[self].parents[0], y = t.nodes_[self].parents[1];
      t.accumulate(x, gistill::matmul(g, t.value(y)));
      t.accumulate(y, matmul_tn(g, t.value(x)));
    });
  }

  int add(int x, int y) {
    const auto& vx = value(x);
    const auto& vy = value(y);
    if (!vx.same_shape(vy)) raise(ErrorKind::ShapeMismatch, "add: shape differs");
    Mat<S> v = vx;
    add_inplace(v, vy);
    return push(std::move(v), {x, y}, [](Tape& t, int self) {
      const auto& g = t.nodes_[self].grad;
      t.accumulate(t.nodes_[self].parents[0], g);
      t.accumulate(t.nodes_[self].parents[1], g);
    });
  }

  int sub(int x, int y) {
    const auto& vx = value(x);
    const auto& vy = value(y);
    if (!vx.same_shape(vy)) raise(ErrorKind::ShapeMismatch, "sub: shape differs");
    Mat<S> v = vx;
    for (std::size_t i = 0; i < v.a.size(); ++i) v.a[i] -= vy.a[i];
    return push(std::move(v), {x, y}, [](Tape& t, int self) {
      const auto& g = t.nodes_[self].grad;
      t.accumulate(t.nodes_[self].parents[0], g);
      Mat<S> neg = g;
      for (auto& e : neg.a) e = -e;
      t.accumulate(t.nodes_[self].parents[1], neg);
    });
  }

  int mul(int x, int y) {
    const auto& vx = value(x);
    const auto& vy = value(y);
    if (!vx.same_shape(vy)) raise(ErrorKind::ShapeMismatch, "mul: shape differs");
    Mat<S> v = vx;
    for (std::size_t i = 0; i < v.a.size(); ++i) v.a[i] *= vy.a[i];
    return push(std::move(v), {x, y}, [](Tape& t, int self) {
      const auto& g = t.nodes_[self].grad;
      int x = t.nodes_[self].parents[0], y = t.nodes_[self].parents[1];
      Mat<S> gx = g, gy = g;
      for (std::size_t i = 0; i < g.a.size(); ++i) {
        gx.a[i] *= t.value(y).a[i];
        gy.a[i] *= t.value(x).a[i];
      }
      t.accumulate(x, std::move(gx));
      t.accumulate(y, std::move(gy));
    });
  }

  // y = alpha * x + beta, elementwise with scalar coefficients.
  int affine(int x, S alpha, S beta) {
    Mat<S> v = value(x);
    for (auto& e : v.a) e = alpha * e + beta;
    return push(std::move(v), {x}, [alpha](Tape& t, int self) {
      Mat<S> g = t.nodes_[self].grad;
      for (auto& e : g.a) e *= alpha;
      t.accumulate(t.nodes_[self].parents[0], std::move(g));
    });
  }

  // X + broadcast of a 1xC row (bias).
  int add_rowvec(int x, int b) {
    const auto& vx = value(x);
    const auto& vb = value(b);
    if (vb.rows != 1 || vb.cols != vx.cols)
      raise(ErrorKind::ShapeMismatch, "add_rowvec: bias must be 1 x cols");
    Mat<S> v = vx;
    for (int r = 0; r < v.rows; ++r)
      for (int c = 0; c < v.cols; ++c) v.at(r, c) += vb.at(0, c);
    return push(std::move(v), {x, b}, [](Tape& t, int self) {
      const auto& g = t.nodes_[self].grad;
      t.accumulate(t.nodes_[self].parents[0], g);
      Mat<S> gb(1, g.cols);
      for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) gb.at(0, c) += g.at(r, c);
      t.accumulate(t.nodes_[self].parents[1], std::move(gb));
    });
  }

  // Row r of X scaled by v[r] (v is Rx1).
  int mul_colvec(int x, int v) {
    const auto& vx = value(x);
    const auto& vv = value(v);
    if (vv.cols != 1 || vv.rows != vx.rows)
      raise(ErrorKind::ShapeMismatch, "mul_colvec: scale must be rows x 1");
    Mat<S> out = vx;
    for (int r = 0; r < out.rows; ++r)
      for (int c = 0; c < out.cols; ++c) out.at(r, c) *= vv.at(r, 0);
    return push(std::move(out), {x, v}, [](Tape& t, int self) {
      const auto& g = t.nodes_[self].grad;
      int x = t.nodes_[self].parents[0], v = t.nodes_[self].parents[1];
      const auto& vx = t.value(x);
      const auto& vv = t.value(v);
      Mat<S> gx = g;
      Mat<S> gv(vv.rows, 1);
      for (int r = 0; r < g.rows; ++r) {
        S acc = 0;
        for (int c = 0; c < g.cols; ++c) {
          acc += g.at(r, c) * vx.at(r, c);
          gx.at(r, c) *= vv.at(r, 0);
        }
        gv.at(r, 0) = acc;
      }
      t.accumulate(x, std::move(gx));
      t.accumulate(v, std::move(gv));
    });
  }

  // ---- nonlinearities ----------------------------------------------------

  int sigmoid(int x) {
    Mat<S> v = value(x);
    for (auto& e : v.a) e = S(1) / (S(1) + std::exp(-e));
    return push(std::move(v), {x}, [](Tape& t, int self) {
      const auto& y = t.nodes_[self].value;
      Mat<S> g = t.nodes_[self].grad;
      for (std::size_t i = 0; i < g.a.size(); ++i)
        g.a[i] *= y.a[i] * (S(1) - y.a[i]);
      t.accumulate(t.nodes_[self].parents[0], std::move(g));
    });
  }

  int tanh_op(int x) {
    Mat<S> v = value(x);
    for (auto& e : v.a) e = std::tanh(e);
    return push(std::move(v), {x}, [](Tape& t, int self) {
      const auto& y = t.nodes_[self].value;
      Mat<S> g = t.nodes_[self].grad;
      for (std::size_t i = 0; i < g.a.size(); ++i)
        g.a[i] *= S(1) - y.a[i] * y.a[i];
      t.accumulate(t.nodes_[self].parents[0], std::move(g));
    });
  }

  // Exact GELU: 0.5 x (1 + erf(x / sqrt(2))).
  int gelu(int x) {
    Mat<S> v = value(x);
    for (auto& e : v.a)
      e = S(0.5) * e * (S(1) + std::erf(e * S(0.7071067811865476)));
    return push(std::move(v), {x}, [](Tape& t, int self) {
      int x = t.nodes_[self].parents[0];
      const auto& vx = t.value(x);
      Mat<S> g = t.nodes_[self].grad;
      constexpr double inv_sqrt2 = 0.7071067811865476;
      constexpr double inv_sqrt2pi = 0.3989422804014327;
      for (std::size_t i = 0; i < g.a.size(); ++i) {
        const double xi = static_cast<double>(vx.a[i]);
        const double cdf = 0.5 * (1.0 + std::erf(xi * inv_sqrt2));
        const double pdf = inv_sqrt2pi * std::exp(-0.5 * xi * xi);
        g.a[i] *= static_cast<S>(cdf + xi * pdf);
      }
      t.accumulate(x, std::move(g));
    });
  }

  // ---- normalization -----------------------------------------------------

  // Per-row layer norm with learnable gamma/beta (both 1xC).
  int layer_norm(int x, int gamma, int beta, S eps = S(1e-5)) {
    const auto& vx = value(x);
    const auto& vg = value(gamma);
    const auto& vb = value(beta);
    if (vg.rows != 1 || vg.cols != vx.cols || vb.rows != 1 || vb.cols != vx.cols)
      raise(ErrorKind::ShapeMismatch, "layer_norm: gamma/beta must be 1 x cols");
    const int C = vx.cols;
    Mat<S> xhat(vx.rows, C);
    Mat<S> inv_std(vx.rows, 1);
    Mat<S> out(vx.rows, C);
    for (int r = 0; r < vx.rows; ++r) {
      S mean = 0;
      for (int c = 0; c < C; ++c) mean += vx.at(r, c);
      mean /= S(C);
      S var = 0;
      for (int c = 0; c < C; ++c) {
        const S d = vx.at(r, c) - mean;
        var += d * d;
      }
      var /= S(C);
      const S inv = S(1) / std::sqrt(var + eps);
      inv_std.at(r, 0) = inv;
      for (int c = 0; c < C; ++c) {
        const S xh = (vx.at(r, c) - mean) * inv;
        xhat.at(r, c) = xh;
        out.at(r, c) = vg.at(0, c) * xh + vb.at(0, c);
      }
    }
    return push(std::move(out), {x, gamma, beta},
                [xhat = std::move(xhat), inv_std = std::move(inv_std)](
                    Tape& t, int self) {
                  const auto& g = t.nodes_[self].grad;
                  int x = t.nodes_[self].parents[0];
                  int gamma = t.nodes_[self].parents[1];
                  int beta = t.nodes_[self].parents[2];
                  const auto& vg = t.value(gamma);
                  const int C = g.cols;
                  Mat<S> gx(g.rows, C);
                  Mat<S> ggamma(1, C);
                  Mat<S> gbeta(1, C);
                  for (int r = 0; r < g.rows; ++r) {
                    S sum_dxhat = 0, sum_dxhat_xhat = 0;
                    for (int c = 0; c < C; ++c) {
                      const S dxhat = g.at(r, c) * vg.at(0, c);
                      sum_dxhat += dxhat;
                      sum_dxhat_xhat += dxhat * xhat.at(r, c);
                      ggamma.at(0, c) += g.at(r, c) * xhat.at(r, c);
                      gbeta.at(0, c) += g.at(r, c);
                    }
                    const S inv = inv_std.at(r, 0);
                    for (int c = 0; c < C; ++c) {
                      const S dxhat = g.at(r, c) * vg.at(0, c);
                      gx.at(r, c) = inv * (dxhat - sum_dxhat / S(C) -
                                           xhat.at(r, c) * sum_dxhat_xhat / S(C));
                    }
                  }
                  t.accumulate(x, std::move(gx));
                  t.accumulate(gamma, std::move(ggamma));
                  t.accumulate(beta, std::move(gbeta));
                });
  }

  // ---- softmax family ----------------------------------------------------

  // Row-wise softmax restricted to positions where mask != 0. Masked entries
  // get exactly 0. Every row must have at least one unmasked entry.
  int softmax_rows_masked(int x, Mat<S> mask) {
    const auto& vx = value(x);
    if (!vx.same_shape(mask))
      raise(ErrorKind::ShapeMismatch, "softmax_rows_masked: mask shape differs");
    Mat<S> out(vx.rows, vx.cols);
    for (int r = 0; r < vx.rows; ++r) {
      S mx = S(0);
      bool any = false;
      for (int c = 0; c < vx.cols; ++c)
        if (mask.at(r, c) != S(0)) {
          mx = any ? std::max(mx, vx.at(r, c)) : vx.at(r, c);
          any = true;
        }
      if (!any) raise(ErrorKind::EmptyInput, "softmax row fully masked");
      S denom = 0;
      for (int c = 0; c < vx.cols; ++c)
        if (mask.at(r, c) != S(0)) {
          const S e = std::exp(vx.at(r, c) - mx);
          out.at(r, c) = e;
          denom += e;
        }
      for (int c = 0; c < vx.cols; ++c)
        if (mask.at(r, c) != S(0)) out.at(r, c) /= denom;
    }
    return push(std::move(out), {x}, [](Tape& t, int self) {
      const auto& y = t.nodes_[self].value;
      const auto& g = t.nodes_[self].grad;
      Mat<S> gx(g.rows, g.cols);
      for (int r = 0; r < g.rows; ++r) {
        S dot = 0;
        for (int c = 0; c < g.cols; ++c) dot += g.at(r, c) * y.at(r, c);
        for (int c = 0; c < g.cols; ++c)
          gx.at(r, c) = y.at(r, c) * (g.at(r, c) - dot);
      }
      t.accumulate(t.nodes_[self].parents[0], std::move(gx));
    });
  }

  // Row-wise log-softmax over unmasked positions. Masked outputs are 0 (not
  // -inf) so that zero-weighted loss terms stay finite; callers must weight
  // masked positions with exactly zero.
  int log_softmax_rows_masked(int x, Mat<S> mask) {
    const auto& vx = value(x);
    if (!vx.same_shape(mask))
      raise(ErrorKind::ShapeMismatch, "log_softmax_rows_masked: mask shape differs");
    Mat<S> out(vx.rows, vx.cols);
    for (int r = 0; r < vx.rows; ++r) {
      S mx = S(0);
      bool any = false;
      for (int c = 0; c < vx.cols; ++c)
        if (mask.at(r, c) != S(0)) {
          mx = any ? std::max(mx, vx.at(r, c)) : vx.at(r, c);
          any = true;
        }
      if (!any) raise(ErrorKind::EmptyInput, "log_softmax row fully masked");
      S denom = 0;
      for (int c = 0; c < vx.cols; ++c)
        if (mask.at(r, c) != S(0)) denom += std::exp(vx.at(r, c) - mx);
      const S log_denom = std::log(denom) + mx;
      for (int c = 0; c < vx.cols; ++c)
        out.at(r, c) = mask.at(r, c) != S(0) ? vx.at(r, c) - log_denom : S(0);
    }
    return push(std::move(out), {x},
                [mask = std::move(mask)](Tape& t, int self) {
                  const auto& logp = t.nodes_[self].value;
                  const auto& g = t.nodes_[self].grad;
                  Mat<S> gx(g.rows, g.cols);
                  for (int r = 0; r < g.rows; ++r) {
                    S gsum = 0;
                    for (int c = 0; c < g.cols; ++c)
                      if (mask.at(r, c) != S(0)) gsum += g.at(r, c);
                    for (int c = 0; c < g.cols; ++c)
                      gx.at(r, c) = mask.at(r, c) != S(0)
                                        ? g.at(r, c) - std::exp(logp.at(r, c)) * gsum
                                        : S(0);
                  }
                  t.accumulate(t.nodes_[self].parents[0], std::move(gx));
                });
  }

  // ---- shape ops ---------------------------------------------------------

  int slice_cols(int x, int c0, int n) {
    const auto& vx = value(x);
    if (c0 < 0 || n <= 0 || c0 + n > vx.cols)
      raise(ErrorKind::ShapeMismatch, "slice_cols: range out of bounds");
    Mat<S> out(vx.rows, n);
    for (int r = 0; r < vx.rows; ++r)
      for (int c = 0; c < n; ++c) out.at(r, c) = vx.at(r, c0 + c);
    return push(std::move(out), {x}, [c0, n](Tape& t, int self) {
      const auto& g = t.nodes_[self].grad;
      int x = t.nodes_[self].parents[0];
      Mat<S> gx(t.value(x).rows, t.value(x).cols);
      for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < n; ++c) gx.at(r, c0 + c) = g.at(r, c);
      t.accumulate(x, std::move(gx));
    });
  }

  int concat_cols(const std::vector<int>& xs) {
    if (xs.empty()) raise(ErrorKind::EmptyInput, "concat_cols: no inputs");
    const int rows = value(xs[0]).rows;
    int total = 0;
    for (int id : xs) {
      if (value(id).rows != rows)
        raise(ErrorKind::ShapeMismatch, "concat_cols: row counts differ");
      total += value(id).cols;
    }
    Mat<S> out(rows, total);
    int off = 0;
    for (int id : xs) {
      const auto& v = value(id);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < v.cols; ++c) out.at(r, off + c) = v.at(r, c);
      off += v.cols;
    }
    return push(std::move(out), xs, [](Tape& t, int self) {
      const auto& g = t.nodes_[self].grad;
      int off = 0;
      for (int id : t.nodes_[self].parents) {
        const auto& v = t.value(id);
        Mat<S> gp(v.rows, v.cols);
        for (int r = 0; r < v.rows; ++r)
          for (int c = 0; c < v.cols; ++c) gp.at(r, c) = g.at(r, off + c);
        t.accumulate(id, std::move(gp));
        off += v.cols;
      }
    });
  }

  int reshape(int x, int rows, int cols) {
    const auto& vx = value(x);
    if (rows * cols != vx.rows * vx.cols)
      raise(ErrorKind::ShapeMismatch, "reshape: element count differs");
    Mat<S> out;
    out.rows = rows;
    out.cols = cols;
    out.a = vx.a;
    return push(std::move(out), {x}, [](Tape& t, int self) {
      int x = t.nodes_[self].parents[0];
      Mat<S> g;
      g.rows = t.value(x).rows;
      g.cols = t.value(x).cols;
      g.a = t.nodes_[self].grad.a;
      t.accumulate(x, std::move(g));
    });
  }

  int sum_all(int x) {
    const auto& vx = value(x);
    S acc = 0;
    for (S v : vx.a) acc += v;
    Mat<S> out(1, 1);
    out.a[0] = acc;
    return push(std::move(out), {x}, [](Tape& t, int self) {
      const S g = t.nodes_[self].grad.a[0];
      int x = t.nodes_[self].parents[0];
      Mat<S> gx(t.value(x).rows, t.value(x).cols, g);
      t.accumulate(x, std::move(gx));
    });
  }

  // Row r of the output is row ids[r] of the table (embedding lookup).
  int gather_rows(int table, const std::vector<int>& ids) {
    const auto& vt = value(table);
    Mat<S> out(static_cast<int>(ids.size()), vt.cols);
    for (std::size_t r = 0; r < ids.size(); ++r) {
      if (ids[r] < 0 || ids[r] >= vt.rows)
        raise(ErrorKind::OutOfRange, "gather_rows: id out of table");
      for (int c = 0; c < vt.cols; ++c)
        out.at(static_cast<int>(r), c) = vt.at(ids[r], c);
    }
    return push(std::move(out), {table}, [ids](Tape& t, int self) {
      const auto& g = t.nodes_[self].grad;
      int table = t.nodes_[self].parents[0];
      Mat<S> gt(t.value(table).rows, t.value(table).cols);
      for (std::size_t r = 0; r < ids.size(); ++r)
        for (int c = 0; c < g.cols; ++c)
          gt.at(ids[r], c) += g.at(static_cast<int>(r), c);
      t.accumulate(table, std::move(gt));
    });
  }

  // Inverted dropout; identity when disabled or rate == 0.
  int dropout(int x, double rate, bool enabled, Rng& rng) {
    if (!enabled || rate <= 0.0) return x;
    if (rate >= 1.0) raise(ErrorKind::OutOfRange, "dropout rate must be < 1");
    const auto& vx = value(x);
    Mat<S> mask(vx.rows, vx.cols);
    const S keep_scale = static_cast<S>(1.0 / (1.0 - rate));
    for (auto& m : mask.a) m = rng.next_double() < rate ? S(0) : keep_scale;
    Mat<S> out = vx;
    for (std::size_t i = 0; i < out.a.size(); ++i) out.a[i] *= mask.a[i];
    return push(std::move(out), {x}, [mask = std::move(mask)](Tape& t, int self) {
      Mat<S> g = t.nodes_[self].grad;
      for (std::size_t i = 0; i < g.a.size(); ++i) g.a[i] *= mask.a[i];
      t.accumulate(t.nodes_[self].parents[0], std::move(g));
    });
  }

  // ---- backward ----------------------------------------------------------

  // Seeds d(root)/d(root) = 1 and propagates. Root must be a 1x1 scalar.
  void backward(int root) {
    auto& rn = nodes_[root];
    if (rn.value.rows != 1 || rn.value.cols != 1)
      raise(ErrorKind::InvalidArgument, "backward: root must be scalar");
    ensure_grad(root);
    rn.grad.a[0] = S(1);
    for (int i = root; i >= 0; --i) {
      if (nodes_[i].has_grad && nodes_[i].back) nodes_[i].back(*this, i);
    }
  }

 private:
  struct Node {
    Mat<S> value;
    Mat<S> grad;
    bool has_grad = false;
    std::vector<int> parents;
    BackFn back;
  };

  int push(Mat<S> value, std::vector<int> parents, BackFn back) {
    Node n;
    n.value = std::move(value);
    n.parents = std::move(parents);
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  void ensure_grad(int id) {
    auto& n = nodes_[id];
    if (!n.has_grad) {
      n.grad = Mat<S>(n.value.rows, n.value.cols);
      n.has_grad = true;
    }
  }

  void accumulate(int id, const Mat<S>& g) {
    ensure_grad(id);
    add_inplace(nodes_[id].grad, g);
  }

  std::vector<Node> nodes_;
};

}  // namespace gistill
