#pragma once

#include <span>
#include <vector>

#include "dtgi/numerics/attention.hpp"

namespace dtgi::hyper {

using num::Mat;
using num::ParamStore;

struct HyperConfig {
  int feature_dim = 512;  // d'
  int hidden = 64;        // h
  int bottleneck = 32;    // b
  int model_dim = 128;    // d
  bool per_layer = false;
  int layers = 6;
  int layer_embed = 32;   // width of the per-layer embedding appended to C_tau
};

// One adapter: down-projection D (d x b) and up-projection U (b x d).
template <typename T>
struct AdapterParams {
  Mat<T> d_hat;
  Mat<T> u_hat;

  static AdapterParams zeros(int d, int b) { return {Mat<T>::Zero(d, b), Mat<T>::Zero(b, d)}; }
};

enum class Role { kDown, kUp };

// Bottleneck MLP C -> ReLU(C W_D + b_D) W_U + b_U producing one flattened
// adapter matrix per input row (row-major d x b for kDown, b x d for kUp).
struct HyperNet {
  Role role = Role::kDown;
  num::Linear w_down;
  num::Linear w_up;

  HyperNet() = default;
  HyperNet(const std::string& name, Role role_, int in, int hidden, int out);

  // w_down ~ N(0, stddev); w_up ~ N(0, up_stddev) (zero when up_stddev == 0);
  // biases zero.
  template <typename T>
  void init(ParamStore<T>& ps, num::Rng& rng, double stddev, double up_stddev) const;

  std::size_t param_count() const { return w_down.param_count() + w_up.param_count(); }
};

template <typename T>
struct CandidateCache {
  Mat<T> input;
  Mat<T> down_pre, down_hidden;
  Mat<T> up_pre, up_hidden;
};

// Candidates for n instructions: row tau of `down` is D_tau flattened,
// row tau of `up` is U_tau flattened.
template <typename T>
struct Candidates {
  Mat<T> down;
  Mat<T> up;
  int d = 0;
  int b = 0;
  int count() const { return static_cast<int>(down.rows()); }
  AdapterParams<T> candidate(int tau) const;
};

// Throws ConfigError listing d', h, b, d on a feature-width mismatch.
template <typename T>
Candidates<T> generate_candidates(const ParamStore<T>& ps, const Mat<T>& features, const HyperNet& down,
                                  const HyperNet& up, const HyperConfig& cfg, CandidateCache<T>* cache);

// Accumulates hypernet grads from dL/dcandidates; returns dL/dinput.
template <typename T>
Mat<T> generate_candidates_backward(ParamStore<T>& ps, const CandidateCache<T>& cache, const HyperNet& down,
                                    const HyperNet& up, const Mat<T>& d_down, const Mat<T>& d_up);

// (D^, U^) = sum_tau S_tau (D_tau, U_tau). Throws ContractError on a length
// mismatch.
template <typename T>
AdapterParams<T> fuse_candidates(const Candidates<T>& cands, std::span<const T> scores);

// Given dL/d(D^, U^): dL/dcandidates (rows) and dL/dscores.
template <typename T>
void fuse_candidates_backward(const Candidates<T>& cands, std::span<const T> scores, const AdapterParams<T>& grad,
                              Mat<T>& d_down, Mat<T>& d_up, std::vector<T>& d_scores);

// ReLU(z D^) U^, row-wise over z.
template <typename T>
Mat<T> adapter_forward(const Mat<T>& z, const AdapterParams<T>& p);

// Accumulates into grad and returns dL/dz.
template <typename T>
Mat<T> adapter_backward(const Mat<T>& z, const AdapterParams<T>& p, const Mat<T>& dy, AdapterParams<T>& grad);

// Adapter plugged into a transformer block in parallel with its FFN.
template <typename T>
class AdapterBranch : public num::FfnBranch<T> {
 public:
  explicit AdapterBranch(const AdapterParams<T>* params)
      : params_(params),
        grad_(AdapterParams<T>::zeros(static_cast<int>(params->d_hat.rows()), static_cast<int>(params->d_hat.cols()))) {}
  Mat<T> forward(const Mat<T>& normed) const override { return adapter_forward(normed, *params_); }
  Mat<T> backward(const Mat<T>& normed, const Mat<T>& d_out) override {
    return adapter_backward(normed, *params_, d_out, grad_);
  }
  const AdapterParams<T>& grad() const { return grad_; }

 private:
  const AdapterParams<T>* params_;
  AdapterParams<T> grad_;
};

template <typename T>
struct GeneratorCache {
  std::vector<CandidateCache<T>> layers;  // one entry, or one per layer
  std::vector<Candidates<T>> cands;
  std::vector<T> scores;
};

// SHyperGenerator: the down/up hypernet pair plus, in per-layer mode, a
// learned layer embedding appended to every C_tau.
class HyperGenerator {
 public:
  explicit HyperGenerator(const HyperConfig& cfg);
  const HyperConfig& config() const { return cfg_; }

  // Down-generator output layer ~ N(0, stddev); up-generator output layer
  // zero, so the initial adapter is exactly zero.
  template <typename T>
  void init(ParamStore<T>& ps, num::Rng& rng, double stddev = 0.02) const;

  // One AdapterParams (shared) or cfg.layers of them (per-layer mode).
  template <typename T>
  std::vector<AdapterParams<T>> generate(const ParamStore<T>& ps, const Mat<T>& features, std::span<const T> scores,
                                         GeneratorCache<T>* cache) const;

  // dadapters aligned with generate()'s output. Fills dL/dfeatures and
  // dL/dscores.
  template <typename T>
  void backward(ParamStore<T>& ps, const GeneratorCache<T>& cache, const std::vector<AdapterParams<T>>& dadapters,
                Mat<T>& dfeatures, std::vector<T>& dscores) const;

  std::size_t param_count() const;
  // d'h*2 + h*b*d*2 + biases (+ per-layer embedding), from the config alone.
  static std::size_t expected_param_count(const HyperConfig& cfg);

 private:
  HyperConfig cfg_;
  HyperNet down_;
  HyperNet up_;
};

}  // namespace dtgi::hyper
