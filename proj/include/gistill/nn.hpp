#pragma once

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gistill/error.hpp"
#include "gistill/mat.hpp"
#include "gistill/tape.hpp"

namespace gistill {

// Named tensors in registration order. Registration order is the declared
// order used by the checkpoint format, so it must be deterministic.
template <typename S>
class ParamStore {
 public:
  void add(const std::string& name, Mat<S> value) {
    if (index_.count(name)) raise(ErrorKind::DuplicateKey, "parameter " + name);
    index_[name] = entries_.size();
    entries_.emplace_back(name, std::move(value));
  }

  bool has(const std::string& name) const { return index_.count(name) > 0; }

  Mat<S>& get(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) raise(ErrorKind::UnknownKey, "parameter " + name);
    return entries_[it->second].second;
  }

  const Mat<S>& get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) raise(ErrorKind::UnknownKey, "parameter " + name);
    return entries_[it->second].second;
  }

  const std::vector<std::pair<std::string, Mat<S>>>& entries() const {
    return entries_;
  }
  std::vector<std::pair<std::string, Mat<S>>>& entries() { return entries_; }

  std::size_t total_size() const {
    std::size_t n = 0;
    for (const auto& [_, m] : entries_) n += m.size();
    return n;
  }

  bool all_finite() const {
    for (const auto& [_, m] : entries_)
      if (!m.all_finite()) return false;
    return true;
  }

  template <typename T>
  ParamStore<T> cast() const {
    ParamStore<T> out;
    for (const auto& [name, m] : entries_) out.add(name, m.template cast<T>());
    return out;
  }

 private:
  std::vector<std::pair<std::string, Mat<S>>> entries_;
  std::map<std::string, std::size_t> index_;
};

// Binds a ParamStore to one tape pass. Parameter nodes are created lazily so
// a forward only materializes what it touches; harvest() pulls their grads.
template <typename S>
class Bound {
 public:
  Bound(Tape<S>& tape, ParamStore<S>& params) : tape_(&tape), params_(&params) {}

  int operator()(const std::string& name) {
    auto it = nodes_.find(name);
    if (it != nodes_.end()) return it->second;
    const int id = tape_->input(params_->get(name));
    nodes_[name] = id;
    return id;
  }

  std::map<std::string, Mat<S>> harvest() const {
    std::map<std::string, Mat<S>> grads;
    for (const auto& [name, id] : nodes_)
      if (tape_->has_grad(id)) grads[name] = tape_->grad(id);
    return grads;
  }

 private:
  Tape<S>* tape_;
  ParamStore<S>* params_;
  std::map<std::string, int> nodes_;
};

template <typename S>
int linear(Tape<S>& tape, int x, int w, int b) {
  return tape.add_rowvec(tape.matmul(x, w), b);
}

// Scales all gradients in place so their global L2 norm is at most max_norm.
// Returns the pre-clip norm.
template <typename S>
double clip_global_norm(std::map<std::string, Mat<S>>& grads, double max_norm) {
  double sq = 0;
  for (const auto& [_, g] : grads)
    for (S v : g.a) sq += static_cast<double>(v) * static_cast<double>(v);
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0) {
    const S scale = static_cast<S>(max_norm / norm);
    for (auto& [_, g] : grads)
      for (auto& v : g.a) v *= scale;
  }
  return norm;
}

struct AdamConfig {
  double lr = 4e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 2.0;  // <= 0 disables clipping
};

// Adam with bias correction and global-norm clipping applied before the
// moment updates. Keeps per-step diagnostics for the clipping invariant.
template <typename S>
class Adam {
 public:
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

  const AdamConfig& config() const { return cfg_; }

  double last_pre_clip_norm() const { return last_pre_clip_norm_; }
  double last_post_clip_norm() const { return last_post_clip_norm_; }
  double last_update_norm() const { return last_update_norm_; }
  long step_count() const { return t_; }

  void step(ParamStore<S>& params, std::map<std::string, Mat<S>> grads) {
    ++t_;
    last_pre_clip_norm_ = cfg_.clip_norm > 0
                              ? clip_global_norm(grads, cfg_.clip_norm)
                              : global_norm(grads);
    last_post_clip_norm_ = global_norm(grads);
    const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
    double upd_sq = 0;
    for (auto& [name, g] : grads) {
      Mat<S>& p = params.get(name);
      if (!p.same_shape(g)) raise(ErrorKind::ShapeMismatch, "adam: grad shape for " + name);
      auto& m = moment1_[name];
      auto& v = moment2_[name];
      if (m.size() != g.size()) {
        m.assign(g.size(), 0.0);
        v.assign(g.size(), 0.0);
      }
      for (std::size_t i = 0; i < g.a.size(); ++i) {
        const double gi = static_cast<double>(g.a[i]);
        m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * gi;
        v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * gi * gi;
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        const double upd = cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        upd_sq += upd * upd;
        p.a[i] -= static_cast<S>(upd);
      }
    }
    last_update_norm_ = std::sqrt(upd_sq);
  }

 private:
  static double global_norm(const std::map<std::string, Mat<S>>& grads) {
    double sq = 0;
    for (const auto& [_, g] : grads)
      for (S v : g.a) sq += static_cast<double>(v) * static_cast<double>(v);
    return std::sqrt(sq);
  }

  AdamConfig cfg_;
  long t_ = 0;
  std::map<std::string, std::vector<double>> moment1_;
  std::map<std::string, std::vector<double>> moment2_;
  double last_pre_clip_norm_ = 0;
  double last_post_clip_norm_ = 0;
  double last_update_norm_ = 0;
};

}  // namespace gistill
