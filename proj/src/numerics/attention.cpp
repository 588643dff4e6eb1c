#include "dtgi/numerics/attention.hpp"

#include <cmath>
#include <limits>

#include "dtgi/common/error.hpp"

namespace dtgi::num {

MultiHeadAttention::MultiHeadAttention(std::string name_, int dim_, int heads_, bool causal_)
    : name(std::move(name_)),
      dim(dim_),
      heads(heads_),
      causal(causal_),
      qkv(name + ".qkv", dim_, 3 * dim_, false),
      proj(name + ".proj", dim_, dim_) {
  if (heads_ <= 0 || dim_ % heads_ != 0) {
    throw ConfigError(name + ": dim " + std::to_string(dim_) + " not divisible by heads " +
                      std::to_string(heads_));
  }
}

template <typename T>
void MultiHeadAttention::init(ParamStore<T>& ps, Rng& rng, double stddev) const {
  qkv.init(ps, rng, stddev);
  ps.add(name + ".q_b", {static_cast<std::uint32_t>(dim)});
  ps.add(name + ".v_b", {static_cast<std::uint32_t>(dim)});
  proj.init(ps, rng, stddev);
}

namespace {

int segment_count(Eigen::Index rows, int seq_len, const std::string& name) {
  if (seq_len <= 0 || rows % seq_len != 0) {
    throw ShapeError(name + ": " + std::to_string(rows) + " rows not a multiple of sequence length " +
                     std::to_string(seq_len));
  }
  return static_cast<int>(rows / seq_len);
}

}  // namespace

template <typename T>
Mat<T> MultiHeadAttention::forward(const ParamStore<T>& ps, const Mat<T>& x, int seq_len,
                                   AttentionCache<T>* cache) const {
  const int segments = segment_count(x.rows(), seq_len, name);
  const int dh = dim / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  Mat<T> qkv_out = qkv.forward(ps, x);
  qkv_out.leftCols(dim).rowwise() += ps.value(name + ".q_b").row(0);
  qkv_out.rightCols(dim).rowwise() += ps.value(name + ".v_b").row(0);
  Mat<T> merged(x.rows(), dim);
  std::vector<Mat<T>> probs;
  if (cache) probs.reserve(static_cast<std::size_t>(segments * heads));
  for (int s = 0; s < segments; ++s) {
    const Eigen::Index r0 = static_cast<Eigen::Index>(s) * seq_len;
    for (int h = 0; h < heads; ++h) {
      auto q = qkv_out.block(r0, h * dh, seq_len, dh);
      auto k = qkv_out.block(r0, dim + h * dh, seq_len, dh);
      auto v = qkv_out.block(r0, 2 * dim + h * dh, seq_len, dh);
      Mat<T> scores = (q * k.transpose()) * scale;
      if (causal) {
        for (int i = 0; i < seq_len; ++i) {
          for (int j = i + 1; j < seq_len; ++j) scores(i, j) = -std::numeric_limits<T>::infinity();
        }
      }
      softmax_rows(scores);
      merged.block(r0, h * dh, seq_len, dh).noalias() = scores * v;
      if (cache) probs.push_back(std::move(scores));
    }
  }
  Mat<T> y = proj.forward(ps, merged);
  if (cache) {
    cache->qkv = std::move(qkv_out);
    cache->probs = std::move(probs);
    cache->merged = std::move(merged);
  }
  return y;
}

template <typename T>
Mat<T> MultiHeadAttention::backward(ParamStore<T>& ps, const Mat<T>& x, const AttentionCache<T>& cache,
                                    const Mat<T>& dy, int seq_len) const {
  const int segments = segment_count(x.rows(), seq_len, name);
  const int dh = dim / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  Mat<T> dmerged = proj.backward(ps, cache.merged, dy);
  Mat<T> dqkv(x.rows(), 3 * dim);
  for (int s = 0; s < segments; ++s) {
    const Eigen::Index r0 = static_cast<Eigen::Index>(s) * seq_len;
    for (int h = 0; h < heads; ++h) {
      const Mat<T>& p = cache.probs[static_cast<std::size_t>(s * heads + h)];
      auto q = cache.qkv.block(r0, h * dh, seq_len, dh);
      auto k = cache.qkv.block(r0, dim + h * dh, seq_len, dh);
      auto v = cache.qkv.block(r0, 2 * dim + h * dh, seq_len, dh);
      auto dout = dmerged.block(r0, h * dh, seq_len, dh);
      Mat<T> dp = dout * v.transpose();
      dqkv.block(r0, 2 * dim + h * dh, seq_len, dh).noalias() = p.transpose() * dout;
      // softmax backward, row-wise; masked entries have p == 0 and stay 0
      Eigen::Matrix<T, Eigen::Dynamic, 1> rowdot = dp.cwiseProduct(p).rowwise().sum();
      Mat<T> ds = p.cwiseProduct(dp - rowdot.replicate(1, seq_len)) * scale;
      dqkv.block(r0, h * dh, seq_len, dh).noalias() = ds * k;
      dqkv.block(r0, dim + h * dh, seq_len, dh).noalias() = ds.transpose() * q;
    }
  }
  auto& qb = ps.at(name + ".q_b");
  if (!qb.frozen) qb.grad.row(0) += dqkv.leftCols(dim).colwise().sum();
  auto& vb = ps.at(name + ".v_b");
  if (!vb.frozen) vb.grad.row(0) += dqkv.rightCols(dim).colwise().sum();
  return qkv.backward(ps, x, dqkv);
}

AttentionBlock::AttentionBlock(std::string name_, const AttentionConfig& cfg_)
    : name(std::move(name_)),
      cfg(cfg_),
      ln1(name + ".ln1", cfg_.dim),
      ln2(name + ".ln2", cfg_.dim),
      attn(name + ".attn", cfg_.dim, cfg_.heads, cfg_.causal),
      fc1(name + ".fc1", cfg_.dim, cfg_.ffn_hidden),
      fc2(name + ".fc2", cfg_.ffn_hidden, cfg_.dim) {
  if (cfg_.ffn_hidden <= 0) throw ConfigError(name + ": ffn_hidden must be positive");
}

template <typename T>
void AttentionBlock::init(ParamStore<T>& ps, Rng& rng, double stddev) const {
  ln1.init(ps);
  attn.init(ps, rng, stddev);
  ln2.init(ps);
  fc1.init(ps, rng, stddev);
  fc2.init(ps, rng, stddev);
}

template <typename T>
Mat<T> AttentionBlock::forward(const ParamStore<T>& ps, const Mat<T>& x, int seq_len,
                               const ForwardContext& ctx, BlockCache<T>* cache,
                               const FfnBranch<T>* branch) const {
  BlockCache<T> local;
  BlockCache<T>& c = cache ? *cache : local;
  c.x = x;
  c.a = ln1.forward(ps, x, &c.ln1);
  Mat<T> att = attn.forward(ps, c.a, seq_len, &c.attn);
  c.x1 = x + dropout(att, cfg.dropout, ctx, c.drop1);
  c.b = ln2.forward(ps, c.x1, &c.ln2);
  c.hidden_pre = fc1.forward(ps, c.b);
  c.hidden = activate(c.hidden_pre, cfg.activation);
  Mat<T> f = fc2.forward(ps, c.hidden);
  Mat<T> y = c.x1 + dropout(f, cfg.dropout, ctx, c.drop2);
  if (branch) y += branch->forward(c.b);
  return y;
}

template <typename T>
Mat<T> AttentionBlock::backward(ParamStore<T>& ps, const BlockCache<T>& c, const Mat<T>& dy, int seq_len,
                                FfnBranch<T>* branch) const {
  // y = x1 + drop(fc2(act(fc1(b)))) + branch(b), b = ln2(x1)
  Mat<T> df = dropout_backward(dy, c.drop2);
  Mat<T> dhidden = fc2.backward(ps, c.hidden, df);
  Mat<T> dhidden_pre = activate_backward(c.hidden_pre, dhidden, cfg.activation);
  Mat<T> db = fc1.backward(ps, c.b, dhidden_pre);
  if (branch) db += branch->backward(c.b, dy);
  Mat<T> dx1 = dy + ln2.backward(ps, c.ln2, db);
  // x1 = x + drop(attn(ln1(x)))
  Mat<T> datt = dropout_backward(dx1, c.drop1);
  Mat<T> da = attn.backward(ps, c.a, c.attn, datt, seq_len);
  return dx1 + ln1.backward(ps, c.ln1, da);
}

#define DTGI_INSTANTIATE(T)                                                                          \
  template void MultiHeadAttention::init<T>(ParamStore<T>&, Rng&, double) const;                     \
  template Mat<T> MultiHeadAttention::forward<T>(const ParamStore<T>&, const Mat<T>&, int,           \
                                                 AttentionCache<T>*) const;                          \
  template Mat<T> MultiHeadAttention::backward<T>(ParamStore<T>&, const Mat<T>&,                     \
                                                  const AttentionCache<T>&, const Mat<T>&, int)      \
      const;                                                                                         \
  template void AttentionBlock::init<T>(ParamStore<T>&, Rng&, double) const;                         \
  template Mat<T> AttentionBlock::forward<T>(const ParamStore<T>&, const Mat<T>&, int,               \
                                             const ForwardContext&, BlockCache<T>*,                  \
                                             const FfnBranch<T>*) const;                             \
  template Mat<T> AttentionBlock::backward<T>(ParamStore<T>&, const BlockCache<T>&, const Mat<T>&,   \
                                              int, FfnBranch<T>*) const;

DTGI_INSTANTIATE(float)
DTGI_INSTANTIATE(double)
#undef DTGI_INSTANTIATE

}  // namespace dtgi::num
