#pragma once

#include <span>
#include <string>

#include "dtgi/numerics/ops.hpp"
#include "dtgi/numerics/params.hpp"

namespace dtgi::num {

// Dropout is active only when train is set and rng is present.
struct ForwardContext {
  bool train = false;
  Rng* rng = nullptr;
};

// y = x W + b, W stored in x out. Parameters live in a ParamStore under
// "<name>.w" and "<name>.b"; the struct itself only carries the wiring so
// the same module serves 32-bit training and 64-bit verification stores.
struct Linear {
  std::string name;
  int in = 0;
  int out = 0;
  bool bias = true;

  Linear() = default;
  Linear(std::string name_, int in_, int out_, bool bias_ = true)
      : name(std::move(name_)), in(in_), out(out_), bias(bias_) {}

  template <typename T>
  void init(ParamStore<T>& ps, Rng& rng, double stddev) const;

  template <typename T>
  Mat<T> forward(const ParamStore<T>& ps, const Mat<T>& x) const;

  // Accumulates dW, db (unless frozen) and returns dL/dx.
  template <typename T>
  Mat<T> backward(ParamStore<T>& ps, const Mat<T>& x, const Mat<T>& dy) const;

  std::size_t param_count() const {
    return static_cast<std::size_t>(in) * out + (bias ? static_cast<std::size_t>(out) : 0);
  }
};

template <typename T>
struct LayerNormCache {
  Mat<T> xhat;
  Eigen::Matrix<T, Eigen::Dynamic, 1> rstd;
};

// Row-wise layer norm with learned gain "<name>.g" and bias "<name>.b".
struct LayerNorm {
  std::string name;
  int dim = 0;

  LayerNorm() = default;
  LayerNorm(std::string name_, int dim_) : name(std::move(name_)), dim(dim_) {}

  template <typename T>
  void init(ParamStore<T>& ps) const;

  template <typename T>
  Mat<T> forward(const ParamStore<T>& ps, const Mat<T>& x, LayerNormCache<T>* cache) const;

  template <typename T>
  Mat<T> backward(ParamStore<T>& ps, const LayerNormCache<T>& cache, const Mat<T>& dy) const;

  std::size_t param_count() const { return 2 * static_cast<std::size_t>(dim); }
};

// Lookup table "<name>.table" of shape vocab x dim.
struct Embedding {
  std::string name;
  int vocab = 0;
  int dim = 0;

  Embedding() = default;
  Embedding(std::string name_, int vocab_, int dim_) : name(std::move(name_)), vocab(vocab_), dim(dim_) {}

  template <typename T>
  void init(ParamStore<T>& ps, Rng& rng, double stddev) const;

  template <typename T>
  Mat<T> forward(const ParamStore<T>& ps, std::span<const int> ids) const;

  template <typename T>
  void backward(ParamStore<T>& ps, std::span<const int> ids, const Mat<T>& dy) const;

  std::size_t param_count() const { return static_cast<std::size_t>(vocab) * dim; }
};

// Inverted dropout. `mask` receives the per-entry scale (0 or 1/(1-p)); it is
// left empty when dropout is inactive.
template <typename T>
Mat<T> dropout(const Mat<T>& x, double p, const ForwardContext& ctx, Mat<T>& mask);

template <typename T>
Mat<T> dropout_backward(const Mat<T>& dy, const Mat<T>& mask);

}  // namespace dtgi::num
