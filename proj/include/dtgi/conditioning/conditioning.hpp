#pragma once

#include <span>
#include <vector>

#include "dtgi/numerics/attention.hpp"

namespace dtgi::cond {

using num::Mat;
using num::ParamStore;

struct ConditioningConfig {
  int dim = 512;         // provider width and fused feature width
  int steps = 20;        // m, length of positional tables
  int heads = 2;
  int ffn_hidden = 512;  // encoder FFN width
  int fusion_hidden = 512;
  bool positional = true;
  double dropout = 0.1;
};

enum class Stream { kFrames, kGuidance };

// Which modalities feed the fusion MLP; disabled ones enter as zero vectors.
struct Modalities {
  bool desc = true;
  bool frames = true;
  bool guidance = true;
};

// n instructions worth of frozen embeddings: desc is n x dim, frames and
// guidance are (n*m) x dim with instruction i in rows [i*m, (i+1)*m).
template <typename T>
struct InstructionBatch {
  Mat<T> desc;
  Mat<T> frames;
  Mat<T> guidance;
  int m = 0;
  int count() const { return static_cast<int>(desc.rows()); }
};

template <typename T>
struct TemporalCache {
  num::BlockCache<T> block;
  int m = 0;
};

template <typename T>
struct FuseCache {
  Mat<T> concat;
  Mat<T> hidden_pre;
  Mat<T> hidden;
};

template <typename T>
struct FeatureCache {
  Modalities use;
  TemporalCache<T> frames;
  TemporalCache<T> guidance;
  FuseCache<T> fuse;
};

// Encoder_f / Encoder_g (one non-causal ReLU attention block each, mean
// pooled) followed by the fusion MLP 3*dim -> fusion_hidden -> dim.
class Conditioning {
 public:
  explicit Conditioning(const ConditioningConfig& cfg);

  const ConditioningConfig& config() const { return cfg_; }

  template <typename T>
  void init(ParamStore<T>& ps, num::Rng& rng, double stddev = 0.02) const;

  // vecs is (k*m) x dim holding k sequences of length m; returns k x dim.
  // Throws ShapeError when the width is not cfg.dim.
  template <typename T>
  Mat<T> encode_temporal(const ParamStore<T>& ps, const Mat<T>& vecs, int m, Stream which,
                         const num::ForwardContext& ctx, TemporalCache<T>* cache) const;

  // Accumulates encoder grads; returns dL/dvecs.
  template <typename T>
  Mat<T> encode_temporal_backward(ParamStore<T>& ps, const TemporalCache<T>& cache, const Mat<T>& dpooled,
                                  Stream which) const;

  // Row-wise fusion of k x dim inputs into k x dim features.
  template <typename T>
  Mat<T> fuse(const ParamStore<T>& ps, const Mat<T>& desc, const Mat<T>& f, const Mat<T>& g,
              FuseCache<T>* cache) const;

  // Accumulates fusion grads; returns dL/d(concat) as k x 3*dim.
  template <typename T>
  Mat<T> fuse_backward(ParamStore<T>& ps, const FuseCache<T>& cache, const Mat<T>& dout) const;

  // Full instruction-set featurisation: n x dim matrix of C_tau.
  template <typename T>
  Mat<T> features(const ParamStore<T>& ps, const InstructionBatch<T>& batch, const Modalities& use,
                  const num::ForwardContext& ctx, FeatureCache<T>* cache) const;

  template <typename T>
  void features_backward(ParamStore<T>& ps, const FeatureCache<T>& cache, const Mat<T>& dfeatures) const;

  std::size_t param_count() const;

 private:
  const num::AttentionBlock& encoder(Stream s) const { return s == Stream::kFrames ? enc_f_ : enc_g_; }
  std::string pos_name(Stream s) const;

  ConditioningConfig cfg_;
  num::AttentionBlock enc_f_;
  num::AttentionBlock enc_g_;
  num::Linear fc1_;
  num::Linear fc2_;
};

// raw_tau = sum over k != tau of C_tau . C_k
template <typename T>
std::vector<T> importance_raw(const Mat<T>& features);

// softmax(importance_raw(features)); a single feature gives [1].
template <typename T>
std::vector<T> importance(const Mat<T>& features);

// dL/dfeatures given the scores returned by importance() and dL/dscores.
template <typename T>
Mat<T> importance_backward(const Mat<T>& features, std::span<const T> scores, std::span<const T> dscores);

// [1/n] * n. Throws ConfigError when n < 1.
std::vector<double> uniform_importance(int n);

}  // namespace dtgi::cond
