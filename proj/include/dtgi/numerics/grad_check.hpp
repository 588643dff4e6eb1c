#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "dtgi/numerics/params.hpp"

namespace dtgi::num {

// A deterministic scalar computation over a 64-bit store. When `with_grad`
// is set it must also accumulate dLoss/dParam into the store's grads (the
// caller zeroes them first).
using LossFn = std::function<double(ParamStore<double>&, bool with_grad)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  std::size_t coords_checked = 0;
};

struct GradCheckOptions {
  double step = 1e-5;
  std::size_t samples_per_tensor = 64;  // every coordinate when the tensor is smaller
  std::uint64_t seed = 0;
  std::string prefix;  // restrict to params whose name starts with this
};

// Compares analytic gradients against central differences
// (f(p+h) - f(p-h)) / 2h on sampled coordinates of every trainable tensor and
// returns the worst |a - n| / max(1e-8, |a| + |n|). Frozen tensors are
// skipped. Throws ContractError if two evaluations at the same point differ.
GradCheckReport grad_check(const LossFn& f, ParamStore<double>& params, const GradCheckOptions& opts = {});

}  // namespace dtgi::num
