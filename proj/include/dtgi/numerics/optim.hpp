#pragma once

#include <map>
#include <string>

#include "dtgi/numerics/params.hpp"

namespace dtgi::num {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.95;
  double eps = 1e-8;
  double weight_decay = 0.1;
};

// AdamW with decoupled weight decay applied only to params flagged `decay`.
// Frozen params are never touched.
template <typename T>
class AdamW {
 public:
  explicit AdamW(AdamWConfig cfg = {}) : cfg_(cfg) {}

  void step(ParamStore<T>& ps, double lr);

  long steps() const { return steps_; }

  // Moment buffers as "adam.m/<name>", "adam.v/<name>" plus "adam.step",
  // so they can ride along in a checkpoint.
  void export_state(ParamStore<T>& out) const;
  void import_state(const ParamStore<T>& in);

 private:
  AdamWConfig cfg_;
  long steps_ = 0;
  std::map<std::string, Mat<T>> m_;
  std::map<std::string, Mat<T>> v_;
};

// Scales all trainable grads so their global L2 norm is at most max_norm.
// Returns the norm before clipping.
template <typename T>
double clip_grad_norm(ParamStore<T>& ps, double max_norm);

}  // namespace dtgi::num
