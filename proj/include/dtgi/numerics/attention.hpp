#pragma once

#include <string>
#include <vector>

#include "dtgi/numerics/layers.hpp"

namespace dtgi::num {

// Extra term added in parallel to a block's FFN sublayer. It receives the
// same layer-normed input as the FFN; backward accumulates the branch's own
// gradients and returns dL/d(normed input).
template <typename T>
class FfnBranch {
 public:
  virtual ~FfnBranch() = default;
  virtual Mat<T> forward(const Mat<T>& normed) const = 0;
  virtual Mat<T> backward(const Mat<T>& normed, const Mat<T>& d_out) = 0;
};

struct AttentionConfig {
  int dim = 0;
  int heads = 1;
  int ffn_hidden = 0;
  Activation activation = Activation::kGelu;
  bool causal = false;
  double dropout = 0.0;
};

template <typename T>
struct AttentionCache {
  Mat<T> qkv;
  std::vector<Mat<T>> probs;  // one L x L matrix per (segment, head)
  Mat<T> merged;              // concatenated head outputs, before projection
};

// Multi-head self-attention applied independently to consecutive row
// segments of length seq_len (a batch of sequences stacked row-wise).
// Fused qkv projection without bias plus query and value biases; a key bias
// only shifts each softmax row and is left out.
struct MultiHeadAttention {
  std::string name;
  int dim = 0;
  int heads = 1;
  bool causal = false;
  Linear qkv;
  Linear proj;

  MultiHeadAttention() = default;
  MultiHeadAttention(std::string name_, int dim_, int heads_, bool causal_);

  template <typename T>
  void init(ParamStore<T>& ps, Rng& rng, double stddev) const;

  template <typename T>
  Mat<T> forward(const ParamStore<T>& ps, const Mat<T>& x, int seq_len, AttentionCache<T>* cache) const;

  template <typename T>
  Mat<T> backward(ParamStore<T>& ps, const Mat<T>& x, const AttentionCache<T>& cache, const Mat<T>& dy,
                  int seq_len) const;

  std::size_t param_count() const { return qkv.param_count() + 2 * static_cast<std::size_t>(dim) + proj.param_count(); }
};

template <typename T>
struct BlockCache {
  Mat<T> x;
  LayerNormCache<T> ln1;
  Mat<T> a;
  AttentionCache<T> attn;
  Mat<T> drop1;
  Mat<T> x1;
  LayerNormCache<T> ln2;
  Mat<T> b;
  Mat<T> hidden_pre;
  Mat<T> hidden;
  Mat<T> drop2;
};

// Pre-norm transformer block:
//   x1 = x + Drop(Attn(LN1(x)))
//   y  = x1 + Drop(FFN(LN2(x1))) [+ Branch(LN2(x1))]
struct AttentionBlock {
  std::string name;
  AttentionConfig cfg;
  LayerNorm ln1;
  LayerNorm ln2;
  MultiHeadAttention attn;
  Linear fc1;
  Linear fc2;

  AttentionBlock() = default;
  // Throws ConfigError when dim is not divisible by heads.
  AttentionBlock(std::string name_, const AttentionConfig& cfg_);

  template <typename T>
  void init(ParamStore<T>& ps, Rng& rng, double stddev) const;

  template <typename T>
  Mat<T> forward(const ParamStore<T>& ps, const Mat<T>& x, int seq_len, const ForwardContext& ctx,
                 BlockCache<T>* cache, const FfnBranch<T>* branch = nullptr) const;

  template <typename T>
  Mat<T> backward(ParamStore<T>& ps, const BlockCache<T>& cache, const Mat<T>& dy, int seq_len,
                  FfnBranch<T>* branch = nullptr) const;

  std::size_t param_count() const {
    return ln1.param_count() + ln2.param_count() + attn.param_count() + fc1.param_count() +
           fc2.param_count();
  }
};

}  // namespace dtgi::num
