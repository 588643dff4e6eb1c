#include "dtgi/conditioning/conditioning.hpp"

#include "dtgi/common/error.hpp"
#include "dtgi/numerics/ops.hpp"

namespace dtgi::cond {

namespace {

num::AttentionConfig encoder_config(const ConditioningConfig& c) {
  num::AttentionConfig a;
  a.dim = c.dim;
  a.heads = c.heads;
  a.ffn_hidden = c.ffn_hidden;
  a.activation = num::Activation::kRelu;
  a.causal = false;
  a.dropout = c.dropout;
  return a;
}

}  // namespace

Conditioning::Conditioning(const ConditioningConfig& cfg)
    : cfg_(cfg),
      enc_f_("cond.enc_f", encoder_config(cfg)),
      enc_g_("cond.enc_g", encoder_config(cfg)),
      fc1_("cond.fuse.fc1", 3 * cfg.dim, cfg.fusion_hidden),
      fc2_("cond.fuse.fc2", cfg.fusion_hidden, cfg.dim) {
  if (cfg.steps < 1) throw ConfigError("conditioning: instruction length must be at least 1");
}

std::string Conditioning::pos_name(Stream s) const {
  return s == Stream::kFrames ? "cond.enc_f.pos" : "cond.enc_g.pos";
}

template <typename T>
void Conditioning::init(ParamStore<T>& ps, num::Rng& rng, double stddev) const {
  enc_f_.init(ps, rng, stddev);
  enc_g_.init(ps, rng, stddev);
  if (cfg_.positional) {
    for (Stream s : {Stream::kFrames, Stream::kGuidance}) {
      auto& p = ps.add(pos_name(s), {static_cast<std::uint32_t>(cfg_.steps), static_cast<std::uint32_t>(cfg_.dim)});
      num::init_normal(p.value, rng, stddev);
    }
  }
  fc1_.init(ps, rng, stddev);
  fc2_.init(ps, rng, stddev);
}

std::size_t Conditioning::param_count() const {
  std::size_t n = enc_f_.param_count() + enc_g_.param_count() + fc1_.param_count() + fc2_.param_count();
  if (cfg_.positional) n += 2 * static_cast<std::size_t>(cfg_.steps) * cfg_.dim;
  return n;
}

template <typename T>
Mat<T> Conditioning::encode_temporal(const ParamStore<T>& ps, const Mat<T>& vecs, int m, Stream which,
                                     const num::ForwardContext& ctx, TemporalCache<T>* cache) const {
  if (vecs.cols() != cfg_.dim) {
    throw ShapeError("encode_temporal: input width " + std::to_string(vecs.cols()) + " != " +
                     std::to_string(cfg_.dim));
  }
  if (m < 1 || vecs.rows() % m != 0 || vecs.rows() == 0) {
    throw ShapeError("encode_temporal: " + std::to_string(vecs.rows()) + " rows not a positive multiple of m=" +
                     std::to_string(m));
  }
  if (cfg_.positional && m > cfg_.steps) {
    throw ShapeError("encode_temporal: sequence length " + std::to_string(m) + " exceeds positional table " +
                     std::to_string(cfg_.steps));
  }
  Mat<T> x = vecs;
  if (cfg_.positional) {
    const auto& pos = ps.value(pos_name(which));
    for (Eigen::Index r = 0; r < x.rows(); ++r) x.row(r) += pos.row(r % m);
  }
  TemporalCache<T> local;
  TemporalCache<T>& c = cache ? *cache : local;
  c.m = m;
  Mat<T> y = encoder(which).forward(ps, x, m, ctx, &c.block);
  const Eigen::Index k = y.rows() / m;
  Mat<T> pooled(k, cfg_.dim);
  for (Eigen::Index i = 0; i < k; ++i) pooled.row(i) = y.middleRows(i * m, m).colwise().mean();
  return pooled;
}

template <typename T>
Mat<T> Conditioning::encode_temporal_backward(ParamStore<T>& ps, const TemporalCache<T>& cache,
                                              const Mat<T>& dpooled, Stream which) const {
  const int m = cache.m;
  Mat<T> dy(dpooled.rows() * m, cfg_.dim);
  for (Eigen::Index r = 0; r < dy.rows(); ++r) dy.row(r) = dpooled.row(r / m) / static_cast<T>(m);
  Mat<T> dx = encoder(which).backward(ps, cache.block, dy, m);
  if (cfg_.positional) {
    auto& pos = ps.at(pos_name(which));
    if (!pos.frozen) {
      for (Eigen::Index r = 0; r < dx.rows(); ++r) pos.grad.row(r % m) += dx.row(r);
    }
  }
  return dx;
}

template <typename T>
Mat<T> Conditioning::fuse(const ParamStore<T>& ps, const Mat<T>& desc, const Mat<T>& f, const Mat<T>& g,
                          FuseCache<T>* cache) const {
  const Eigen::Index k = desc.rows();
  if (f.rows() != k || g.rows() != k || desc.cols() != cfg_.dim || f.cols() != cfg_.dim || g.cols() != cfg_.dim) {
    throw ShapeError("fuse: inputs must all be k x " + std::to_string(cfg_.dim));
  }
  FuseCache<T> local;
  FuseCache<T>& c = cache ? *cache : local;
  c.concat.resize(k, 3 * cfg_.dim);
  c.concat << desc, f, g;
  c.hidden_pre = fc1_.forward(ps, c.concat);
  c.hidden = num::activate(c.hidden_pre, num::Activation::kRelu);
  return fc2_.forward(ps, c.hidden);
}

template <typename T>
Mat<T> Conditioning::fuse_backward(ParamStore<T>& ps, const FuseCache<T>& c, const Mat<T>& dout) const {
  Mat<T> dh = fc2_.backward(ps, c.hidden, dout);
  Mat<T> dpre = num::activate_backward(c.hidden_pre, dh, num::Activation::kRelu);
  return fc1_.backward(ps, c.concat, dpre);
}

template <typename T>
Mat<T> Conditioning::features(const ParamStore<T>& ps, const InstructionBatch<T>& b, const Modalities& use,
                              const num::ForwardContext& ctx, FeatureCache<T>* cache) const {
  const Eigen::Index n = b.desc.rows();
  if (n < 1) throw ShapeError("features: empty instruction batch");
  FeatureCache<T> local;
  FeatureCache<T>& c = cache ? *cache : local;
  c.use = use;
  const Mat<T> zeros = Mat<T>::Zero(n, cfg_.dim);
  Mat<T> f = use.frames ? encode_temporal(ps, b.frames, b.m, Stream::kFrames, ctx, &c.frames) : zeros;
  Mat<T> g = use.guidance ? encode_temporal(ps, b.guidance, b.m, Stream::kGuidance, ctx, &c.guidance) : zeros;
  if (f.rows() != n || g.rows() != n) throw ShapeError("features: frame/guidance rows do not match n*m");
  return fuse(ps, use.desc ? b.desc : zeros, f, g, &c.fuse);
}

template <typename T>
void Conditioning::features_backward(ParamStore<T>& ps, const FeatureCache<T>& c, const Mat<T>& dfeat) const {
  Mat<T> dconcat = fuse_backward(ps, c.fuse, dfeat);
  const int d = cfg_.dim;
  if (c.use.frames) {
    encode_temporal_backward(ps, c.frames, Mat<T>(dconcat.middleCols(d, d)), Stream::kFrames);
  }
  if (c.use.guidance) {
    encode_temporal_backward(ps, c.guidance, Mat<T>(dconcat.middleCols(2 * d, d)), Stream::kGuidance);
  }
}

template <typename T>
std::vector<T> importance_raw(const Mat<T>& features) {
  const Eigen::Index n = features.rows();
  const num::RowVec<T> sum = features.colwise().sum();
  std::vector<T> raw(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    raw[static_cast<std::size_t>(i)] = features.row(i).dot(sum) - features.row(i).squaredNorm();
  }
  return raw;
}

template <typename T>
std::vector<T> importance(const Mat<T>& features) {
  if (features.rows() < 1) throw ShapeError("importance: empty feature set");
  const std::vector<T> raw = importance_raw(features);
  return num::softmax<T>(raw);
}

template <typename T>
Mat<T> importance_backward(const Mat<T>& features, std::span<const T> scores, std::span<const T> dscores) {
  const Eigen::Index n = features.rows();
  if (static_cast<Eigen::Index>(scores.size()) != n || static_cast<Eigen::Index>(dscores.size()) != n) {
    throw ShapeError("importance_backward: length mismatch");
  }
  const std::vector<T> graw = num::softmax_backward<T>(scores, dscores);
  const num::RowVec<T> sum = features.colwise().sum();
  num::RowVec<T> weighted = num::RowVec<T>::Zero(features.cols());
  for (Eigen::Index i = 0; i < n; ++i) weighted += graw[static_cast<std::size_t>(i)] * features.row(i);
  Mat<T> d(n, features.cols());
  for (Eigen::Index j = 0; j < n; ++j) {
    d.row(j) = graw[static_cast<std::size_t>(j)] * (sum - T(2) * features.row(j)) + weighted;
  }
  return d;
}

std::vector<double> uniform_importance(int n) {
  if (n < 1) throw ConfigError("uniform_importance: n must be at least 1");
  return std::vector<double>(static_cast<std::size_t>(n), 1.0 / n);
}

#define DTGI_INSTANTIATE(T)                                                                               \
  template void Conditioning::init<T>(ParamStore<T>&, num::Rng&, double) const;                           \
  template Mat<T> Conditioning::encode_temporal<T>(const ParamStore<T>&, const Mat<T>&, int, Stream,      \
                                                   const num::ForwardContext&, TemporalCache<T>*) const;  \
  template Mat<T> Conditioning::encode_temporal_backward<T>(ParamStore<T>&, const TemporalCache<T>&,      \
                                                            const Mat<T>&, Stream) const;                 \
  template Mat<T> Conditioning::fuse<T>(const ParamStore<T>&, const Mat<T>&, const Mat<T>&,               \
                                        const Mat<T>&, FuseCache<T>*) const;                              \
  template Mat<T> Conditioning::fuse_backward<T>(ParamStore<T>&, const FuseCache<T>&, const Mat<T>&)      \
      const;                                                                                              \
  template Mat<T> Conditioning::features<T>(const ParamStore<T>&, const InstructionBatch<T>&,             \
                                            const Modalities&, const num::ForwardContext&,                \
                                            FeatureCache<T>*) const;                                      \
  template void Conditioning::features_backward<T>(ParamStore<T>&, const FeatureCache<T>&, const Mat<T>&) \
      const;                                                                                              \
  template std::vector<T> importance_raw<T>(const Mat<T>&);                                               \
  template std::vector<T> importance<T>(const Mat<T>&);                                                   \
  template Mat<T> importance_backward<T>(const Mat<T>&, std::span<const T>, std::span<const T>);

DTGI_INSTANTIATE(float)
DTGI_INSTANTIATE(double)
#undef DTGI_INSTANTIATE

}  // namespace dtgi::cond
