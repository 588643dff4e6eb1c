#pragma once

#include <string>
#include <vector>

#include "dtgi/bench/model.hpp"
#include "dtgi/numerics/grad_check.hpp"

namespace dtgi::bench {

// The small DTGI configuration the gradient suite and invariant checks use:
// 2-layer DT with d=16 over state_dim-wide states, 8-wide conditioning with
// m=4 steps, hypernet hidden 6, bottleneck 3, dropout off.
ModelConfig test_scale_model(int state_dim = 10);

struct GradCase {
  std::string name;
  num::GradCheckReport report;
  double seconds = 0.0;
};

// Finite-difference checks (64-bit, dropout off) through the fusion MLP,
// both temporal encoders, the importance softmax path, both hypernetworks,
// candidate fusion, the adapter, the composed generator+adapter chain, a
// 2-layer DT and a full test-scale DTGI model.
std::vector<GradCase> run_grad_suite(std::uint64_t seed = 0, const num::GradCheckOptions& opts = {});

}  // namespace dtgi::bench
