#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstddef>
#include <vector>

#include "gistill/error.hpp"
#include "gistill/rng.hpp"

namespace gistill {

// Dense row-major matrix. Vectors are 1xN or Nx1 matrices; scalars 1x1.
// Heavy products go through Eigen maps; everything else is plain loops.
template <typename S>
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<S> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, S(0)) {}
  Mat(int r, int c, S fill)
      : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, fill) {}

  static Mat zeros(int r, int c) { return Mat(r, c); }

  static Mat from_rows(int r, int c, std::vector<S> values) {
    Mat m;
    m.rows = r;
    m.cols = c;
    m.a = std::move(values);
    if (static_cast<int>(m.a.size()) != r * c)
      raise(ErrorKind::ShapeMismatch, "from_rows: value count does not match shape");
    return m;
  }

  S& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  S at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }

  std::size_t size() const { return a.size(); }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

  bool all_finite() const {
    for (S v : a)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  template <typename T>
  Mat<T> cast() const {
    Mat<T> m;
    m.rows = rows;
    m.cols = cols;
    m.a.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) m.a[i] = static_cast<T>(a[i]);
    return m;
  }
};

namespace detail {
template <typename S>
using EigenMap =
    Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename S>
using EigenCMap = Eigen::Map<
    const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
}  // namespace detail

// C = A * B
template <typename S>
Mat<S> matmul(const Mat<S>& x, const Mat<S>& y) {
  if (x.cols != y.rows) raise(ErrorKind::ShapeMismatch, "matmul: inner dims differ");
  Mat<S> c(x.rows, y.cols);
  detail::EigenCMap<S> mx(x.a.data(), x.rows, x.cols);
  detail::EigenCMap<S> my(y.a.data(), y.rows, y.cols);
  detail::EigenMap<S> mc(c.a.data(), c.rows, c.cols);
  mc.noalias() = mx * my;
  return c;
}

// C = A * B^T
template <typename S>
Mat<S> matmul_nt(const Mat<S>& x, const Mat<S>& y) {
  if (x.cols != y.cols) raise(ErrorKind::ShapeMismatch, "matmul_nt: inner dims differ");
  Mat<S> c(x.rows, y.rows);
  detail::EigenCMap<S> mx(x.a.data(), x.rows, x.cols);
  detail::EigenCMap<S> my(y.a.data(), y.rows, y.cols);
  detail::EigenMap<S> mc(c.a.data(), c.rows, c.cols);
  mc.noalias() = mx * my.transpose();
  return c;
}

// C = A^T * B
template <typename S>
Mat<S> matmul_tn(const Mat<S>& x, const Mat<S>& y) {
  if (x.rows != y.rows) raise(ErrorKind::ShapeMismatch, "matmul_tn: inner dims differ");
  Mat<S> c(x.cols, y.cols);
  detail::EigenCMap<S> mx(x.a.data(), x.rows, x.cols);
  detail::EigenCMap<S> my(y.a.data(), y.rows, y.cols);
  detail::EigenMap<S> mc(c.a.data(), c.rows, c.cols);
  mc.noalias() = mx.transpose() * my;
  return c;
}

template <typename S>
void add_inplace(Mat<S>& dst, const Mat<S>& src) {
  if (!dst.same_shape(src)) raise(ErrorKind::ShapeMismatch, "add_inplace: shape differs");
  for (std::size_t i = 0; i < dst.a.size(); ++i) dst.a[i] += src.a[i];
}

template <typename S>
Mat<S> random_uniform(int rows, int cols, S lo, S hi, Rng& rng) {
  Mat<S> m(rows, cols);
  for (auto& v : m.a) v = static_cast<S>(rng.uniform(lo, hi));
  return m;
}

// Glorot/Xavier uniform bound for a (fan_in x fan_out) weight.
template <typename S>
Mat<S> xavier_uniform(int fan_in, int fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  return random_uniform<S>(fan_in, fan_out, static_cast<S>(-bound),
                           static_cast<S>(bound), rng);
}

}  // namespace gistill
